#include "lstat/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "lstat/error.hpp"

namespace ltest {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, end == std::string_view::npos ? end : end - start)));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return fields;
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError("expected " + std::to_string(table.header.size()) + " fields, found " +
                          std::to_string(fields.size()),
                      lineno);
    }
    table.rows.push_back(std::move(fields));
    table.lines.push_back(lineno);
  }
  if (!have_header) throw DataError("empty CSV input");
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return read_csv(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

bool is_missing(std::string_view field) noexcept {
  return field.empty() || field == "NA" || field == "NaN" || field == "nan" || field == "null";
}

double parse_real(std::string_view field, std::size_t line) {
  double v = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw DataError("not a finite number: '" + std::string(field) + "'", line);
  }
  return v;
}

NumericCsv read_numeric_csv_file(const std::string& path) {
  const CsvTable t = read_csv_file(path);
  NumericCsv out;
  out.columns = t.header;
  out.values.resize(static_cast<Eigen::Index>(t.rows.size()),
                    static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      try {
        out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            parse_real(t.rows[i][j], t.lines[i]);
      } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
      }
    }
  }
  return out;
}

}  // namespace ltest

#pragma once

// Minimal comma-separated reading: UTF-8, '.' decimals, no quoting.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lstat/core.hpp"

namespace ltest {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row
};

std::vector<std::string> split_csv_line(std::string_view line);

/// Reads a header line followed by rows; every row must have the header's
/// width. Blank lines are skipped. Throws DataError with the line number.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Parses a finite decimal; throws DataError pointing at `line` otherwise.
double parse_real(std::string_view field, std::size_t line);

/// True for cells that denote a missing value ("", "NA", "NaN", "null").
bool is_missing(std::string_view field) noexcept;

struct NumericCsv {
  std::vector<std::string> columns;
  Matrix values;
};

/// Header plus an all-numeric body, e.g. the n x p input of `lstat test`.
NumericCsv read_numeric_csv_file(const std::string& path);

}  // namespace ltest

#pragma once

// Comma-separated tables: UTF-8, mandatory header row, '.' decimal point, no
// quoting. Reals are written with 17 significant digits so they read back
// bit-for-bit.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ltbench/matrix.hpp"
#include "ltbench/tunnel.hpp"

namespace lt {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header, or -1.
  long column(std::string_view name) const;
  /// Throws SchemaError naming every column of `required` that is missing.
  void require(const std::vector<std::string>& required) const;
  double number(std::size_t row, std::size_t col) const;
};

std::string format_double(double v);
/// Full-string parse; throws FormatError naming `context` on failure.
double parse_double(std::string_view s, std::string_view context);

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Numeric table with every column parsed as a real.
struct NumericTable {
  std::vector<std::string> columns;
  RowMatrix values;
};

NumericTable read_numeric_csv(const std::filesystem::path& path);
void write_numeric_csv(const std::filesystem::path& path, const NumericTable& t);

/// Encoding table: numeric code columns, row-aligned with a factor table.
EncodingTable read_encoding_csv(const std::filesystem::path& path);

}  // namespace lt

#include "ltbench/table_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ltbench/errors.hpp"

namespace lt {

long CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<long>(i);
  return -1;
}

void CsvTable::require(const std::vector<std::string>& required) const {
  std::string missing;
  for (const auto& r : required) {
    if (column(r) < 0) missing += (missing.empty() ? "" : ", ") + r;
  }
  if (!missing.empty()) throw SchemaError("missing columns: " + missing);
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  return parse_double(rows.at(row).at(col), header.at(col) + " row " + std::to_string(row + 1));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s, std::string_view context) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != end) {
    throw FormatError("cannot parse '" + std::string(s) + "' as a number (" + std::string(context) + ")");
  }
  return v;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line.empty()) continue;
    if (line.find('"') != std::string::npos) throw FormatError(path.string() + ": quoted fields are not supported");
    auto fields = split_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw FormatError(path.string() + " line " + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw SchemaError(path.string() + " has no header row");
  return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  auto write_row = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out << ',';
      out << r[i];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& r : table.rows) write_row(r);
  if (!out) throw FormatError("write failed for " + path.string());
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  NumericTable n;
  n.columns = t.header;
  n.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.header.size(); ++c)
      n.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = t.number(r, c);
  return n;
}

void write_numeric_csv(const std::filesystem::path& path, const NumericTable& t) {
  if (static_cast<std::size_t>(t.values.cols()) != t.columns.size()) throw ShapeError("one name per column");
  CsvTable c;
  c.header = t.columns;
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    std::vector<std::string> row;
    for (Eigen::Index j = 0; j < t.values.cols(); ++j) row.push_back(format_double(t.values(r, j)));
    c.rows.push_back(std::move(row));
  }
  write_csv(path, c);
}

EncodingTable read_encoding_csv(const std::filesystem::path& path) {
  auto n = read_numeric_csv(path);
  EncodingTable e;
  e.columns = std::move(n.columns);
  e.codes = std::move(n.values);
  return e;
}

}  // namespace lt

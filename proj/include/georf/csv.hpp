#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "georf/dataset.hpp"
#include "georf/error.hpp"

namespace georf {

/// Shortest decimal representation that round-trips to the same double.
/// Locale-independent.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

} // namespace detail

/// Reads a comma-separated file with a header row. Cells are kept as strings;
/// numeric interpretation happens in validate_dataset.
inline RawTable read_csv(const std::string& path) {
  if (!std::filesystem::exists(path)) raise(Errc::file_not_found, "no such file: " + path);
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open " + path);
  RawTable table;
  std::string line;
  if (!std::getline(in, line)) raise(Errc::empty_data, path + " is empty");
  table.column_names = detail::split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(detail::split_csv_line(line));
  }
  return table;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  }
  if (!out) raise(Errc::io_error, "failed writing " + path);
}

/// Writes a dataset as CSV with columns id, x, y, <features...>, <target>.
inline void write_dataset_csv(const std::string& path, const SpatialDataset& data,
                              const std::string& target_name = "target") {
  std::vector<std::string> header = {"id", "x", "y"};
  for (const auto& f : data.feature_names()) header.push_back(f);
  header.push_back(target_name);
  std::vector<std::vector<std::string>> rows(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto& row = rows[i];
    row.reserve(header.size());
    row.push_back(data.row_ids()[i]);
    row.push_back(format_double(data.coord(i).x));
    row.push_back(format_double(data.coord(i).y));
    for (std::size_t j = 0; j < data.feature_count(); ++j) row.push_back(format_double(data.feature(i, j)));
    row.push_back(format_double(data.target(i)));
  }
  write_csv(path, header, rows);
}

/// Loads and validates a dataset from CSV.
inline ValidatedDataset load_csv(const std::string& path, const ColumnSpec& columns) {
  return validate_dataset(read_csv(path), columns);
}

} // namespace georf

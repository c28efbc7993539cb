#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "rmu/errors.hpp"
#include "rmu/types.hpp"

namespace rmu {

// Shortest decimal that parses back to the exact same double. Deterministic,
// locale-independent, and much faster than iostreams for bulk output.
inline std::string format_double(double v) {
  char buf[32];
  const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0;
  const std::from_chars_result res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw IoError("parse_double: not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

// Row-major CSV, one matrix row per line, full round-trip precision.
template <typename Scalar>
void write_matrix_csv(const std::filesystem::path& path, const MatrixX<Scalar>& m) {
  std::ofstream out(path);
  if (!out) throw IoError("write_matrix_csv: cannot open " + path.string());
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) line.push_back(',');
      line += format_double(static_cast<double>(m(i, j)));
    }
    line.push_back('\n');
    out << line;
  }
  out.flush();
  if (!out) throw IoError("write_matrix_csv: write failed for " + path.string());
}

inline MatrixX<double> read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("read_matrix_csv: cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (std::string_view field : split_csv_line(line)) row.push_back(parse_double(field));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("read_matrix_csv: ragged rows in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("read_matrix_csv: empty file " + path.string());
  MatrixX<double> m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

}  // namespace rmu

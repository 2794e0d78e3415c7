#pragma once

// CSV reader/writer for matrices: comma separated, one matrix row per line,
// '.' decimal separator regardless of locale. No header unless the caller
// says to skip one.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "musel/linalg.hpp"

namespace musel {

inline double parse_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw std::runtime_error(where + ": bad number '" + tok + "'");
  }
  return v;
}

inline DenseMatrix read_csv_matrix(const std::string& path, bool skip_header = false) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> entries;
  std::size_t rows = 0, cols = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (skip_header && lineno == 1) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t ncols = 0;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      entries.push_back(parse_double(tok, path + ":" + std::to_string(lineno)));
      ++ncols;
    }
    if (rows == 0) {
      cols = ncols;
    } else if (ncols != cols) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(cols) + " fields, got " +
                               std::to_string(ncols));
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error(path + ": no data rows");
  return DenseMatrix(rows, cols, std::move(entries));
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv_matrix(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

inline Vector read_csv_vector(const std::string& path, bool skip_header = false) {
  DenseMatrix m = read_csv_matrix(path, skip_header);
  if (m.cols() == 1) return m.data();
  if (m.rows() == 1) return m.data();
  throw std::runtime_error(path + ": expected a single row or column");
}

}  // namespace musel

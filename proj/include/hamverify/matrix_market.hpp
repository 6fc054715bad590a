#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hamverify/errors.hpp"
#include "hamverify/operator.hpp"

namespace hamverify {

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Reads "matrix {array|coordinate} {complex|real|integer} general".
/// Array data is column-major, one entry per line. Coordinate indices are
/// 1-based; duplicates are summed.
inline Matrix parse_matrix_market(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file");
  ++lineno;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw ParseError(source, lineno, "missing %%MatrixMarket banner");
  object = detail::lowercase(object);
  format = detail::lowercase(format);
  field = detail::lowercase(field);
  symmetry = detail::lowercase(symmetry);
  if (object != "matrix") throw ParseError(source, lineno, "unsupported object '" + object + "'");
  if (format != "array" && format != "coordinate") throw ParseError(source, lineno, "unsupported format '" + format + "'");
  if (field != "complex" && field != "real" && field != "integer")
    throw ParseError(source, lineno, "unsupported field '" + field + "'");
  if (symmetry != "general") throw ParseError(source, lineno, "unsupported symmetry '" + symmetry + "'");
  const bool is_complex = field == "complex";

  auto next_data_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++lineno;
      if (!out.empty() && out.back() == '\r') out.pop_back();
      if (!out.empty() && out[0] == '%') continue;
      if (detail::blank(out)) continue;
      return true;
    }
    return false;
  };

  if (!next_data_line(line)) throw ParseError(source, lineno + 1, "missing size line");
  std::istringstream sizes(line);
  long long rows = -1, cols = -1, nnz = -1;
  sizes >> rows >> cols;
  if (format == "coordinate") sizes >> nnz;
  if (sizes.fail() || rows < 0 || cols < 0 || (format == "coordinate" && nnz < 0))
    throw ParseError(source, lineno, "malformed size line '" + line + "'");
  std::string extra;
  if (sizes >> extra) throw ParseError(source, lineno, "trailing tokens on size line");

  Matrix m = Matrix::Zero(rows, cols);
  const long long expected = format == "array" ? rows * cols : nnz;
  long long count = 0;
  while (next_data_line(line)) {
    if (count >= expected) throw ParseError(source, lineno, "more entries than the header declares");
    std::istringstream ls(line);
    long long r = 0, c = 0;
    if (format == "coordinate") ls >> r >> c;
    double re = 0.0, im = 0.0;
    ls >> re;
    if (is_complex) ls >> im;
    if (ls.fail()) throw ParseError(source, lineno, "malformed entry '" + line + "'");
    if (ls >> extra) throw ParseError(source, lineno, "trailing tokens in entry '" + line + "'");
    if (format == "array") {
      r = count % rows + 1;
      c = count / rows + 1;
    } else if (r < 1 || r > rows || c < 1 || c > cols) {
      throw DimensionError(source + ":" + std::to_string(lineno) + ": index (" + std::to_string(r) + ", " +
                           std::to_string(c) + ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    m(r - 1, c - 1) += Scalar(re, im);
    ++count;
  }
  if (count != expected)
    throw ParseError(source, lineno, "header declares " + std::to_string(expected) + " entries, found " +
                                         std::to_string(count));
  return m;
}

inline OperatorRep read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return OperatorRep::abstract(parse_matrix_market(in, path.string()));
}

/// Array complex general, column-major, 17 significant digits, LF endings.
inline void format_matrix_market(std::ostream& out, const Matrix& m) {
  out << "%%MatrixMarket matrix array complex general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r)
      out << detail::format_double(m(r, c).real()) << ' ' << detail::format_double(m(r, c).imag()) << '\n';
}

inline void write_matrix_market(const OperatorRep& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  format_matrix_market(out, m.entries());
  if (!out) throw Error("write to " + path.string() + " failed");
}

}  // namespace hamverify

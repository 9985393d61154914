#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "oxytrees/errors.hpp"
#include "oxytrees/matrix.hpp"

namespace oxytrees {

// Dense matrix text format: one row per line, tab-separated decimals,
// '#' comment lines and blank lines ignored, no header.

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \r\n");
  return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view token, const std::string& source, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(source, line, "cannot parse '" + std::string(token) + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw ParseError(source, line, "non-finite value '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace detail

inline Matrix read_matrix(std::istream& in, const std::string& source = "<stream>") {
  std::vector<double> data;
  Index cols = 0;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = detail::trim(line);
    if (content.empty() || content.front() == '#') continue;
    Index count = 0;
    std::size_t start = 0;
    for (;;) {
      const auto tab = content.find('\t', start);
      const auto token = content.substr(start, tab == std::string_view::npos ? tab : tab - start);
      data.push_back(detail::parse_number(token, source, line_no));
      ++count;
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(cols) + " columns, found " + std::to_string(count));
    }
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

inline Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_matrix(in, path);
}

inline std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline void write_matrix(std::ostream& out, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << '\t';
      out << format_number(m(i, j));
    }
    out << '\n';
  }
}

inline void write_matrix_file(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_matrix(out, m);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace oxytrees

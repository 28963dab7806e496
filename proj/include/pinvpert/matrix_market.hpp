#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pinvpert/matrix.hpp"

namespace pinvpert {

// Matrix Market I/O restricted to `matrix {array|coordinate} {real|complex} general`.

enum class MatrixMarketFormat { array, coordinate };

class MatrixMarketError : public std::runtime_error {
public:
  enum class Kind {
    io,
    malformed_header,
    unsupported_format,
    unsupported_field,
    unsupported_symmetry,
    malformed_size,
    non_numeric_token,
    wrong_token_count,
    index_out_of_range,
    entry_count_mismatch,
  };

  MatrixMarketError(Kind kind, std::size_t line, const std::string& message)
      : std::runtime_error(describe(kind, line, message)), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  /// 1-based line number; 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

  static std::string_view kind_name(Kind k) {
    switch (k) {
      case Kind::io: return "io";
      case Kind::malformed_header: return "malformed_header";
      case Kind::unsupported_format: return "unsupported_format";
      case Kind::unsupported_field: return "unsupported_field";
      case Kind::unsupported_symmetry: return "unsupported_symmetry";
      case Kind::malformed_size: return "malformed_size";
      case Kind::non_numeric_token: return "non_numeric_token";
      case Kind::wrong_token_count: return "wrong_token_count";
      case Kind::index_out_of_range: return "index_out_of_range";
      case Kind::entry_count_mismatch: return "entry_count_mismatch";
    }
    return "unknown";
  }

private:
  static std::string describe(Kind kind, std::size_t line, const std::string& message) {
    std::string s = "matrix market ";
    s += kind_name(kind);
    if (line) s += " at line " + std::to_string(line);
    return s + ": " + message;
  }

  Kind kind_;
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline double parse_real(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = first + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw MatrixMarketError(MatrixMarketError::Kind::non_numeric_token, line, "'" + tok + "' is not a finite number");
  }
  return v;
}

inline std::size_t parse_index(const std::string& tok, std::size_t line, MatrixMarketError::Kind kind) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw MatrixMarketError(kind, line, "'" + tok + "' is not a non-negative integer");
  }
  return v;
}

}  // namespace detail

inline Matrix read_matrix(std::istream& in) {
  using Kind = MatrixMarketError::Kind;
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw MatrixMarketError(Kind::malformed_header, 1, "empty input");
  ++lineno;
  const auto head = detail::split_ws(line);
  if (head.size() != 5 || head[0] != "%%MatrixMarket" || detail::lower(head[1]) != "matrix") {
    throw MatrixMarketError(Kind::malformed_header, lineno, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'");
  }
  const std::string format = detail::lower(head[2]);
  const std::string field = detail::lower(head[3]);
  const std::string symmetry = detail::lower(head[4]);
  if (format != "array" && format != "coordinate") throw MatrixMarketError(Kind::unsupported_format, lineno, format);
  if (field != "real" && field != "complex") throw MatrixMarketError(Kind::unsupported_field, lineno, field);
  if (symmetry != "general") throw MatrixMarketError(Kind::unsupported_symmetry, lineno, symmetry);
  const bool coordinate = format == "coordinate";
  const bool complex = field == "complex";

  // Next non-comment, non-blank line; false at end of input.
  auto next_data_line = [&](std::vector<std::string>& toks) {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line[0] == '%') continue;
      toks = detail::split_ws(line);
      if (!toks.empty()) return true;
    }
    return false;
  };

  std::vector<std::string> toks;
  if (!next_data_line(toks)) throw MatrixMarketError(Kind::malformed_size, lineno, "missing size line");
  if (toks.size() != (coordinate ? 3u : 2u)) {
    throw MatrixMarketError(Kind::malformed_size, lineno, coordinate ? "expected 'rows cols entries'" : "expected 'rows cols'");
  }
  const std::size_t rows = detail::parse_index(toks[0], lineno, Kind::malformed_size);
  const std::size_t cols = detail::parse_index(toks[1], lineno, Kind::malformed_size);
  if (rows == 0 || cols == 0) throw MatrixMarketError(Kind::malformed_size, lineno, "dimensions must be positive");
  const std::size_t expected = coordinate ? detail::parse_index(toks[2], lineno, Kind::malformed_size) : rows * cols;

  std::vector<Complex> data(rows * cols);
  const std::size_t value_tokens = complex ? 2 : 1;
  std::size_t count = 0;
  while (next_data_line(toks)) {
    if (count == expected) {
      throw MatrixMarketError(Kind::entry_count_mismatch, lineno, "more entries than the " + std::to_string(expected) + " declared");
    }
    const std::size_t want = value_tokens + (coordinate ? 2 : 0);
    if (toks.size() != want) {
      throw MatrixMarketError(Kind::wrong_token_count, lineno,
                              "expected " + std::to_string(want) + " tokens, found " + std::to_string(toks.size()));
    }
    std::size_t i = 0, j = 0, k = 0;
    if (coordinate) {
      i = detail::parse_index(toks[0], lineno, Kind::non_numeric_token);
      j = detail::parse_index(toks[1], lineno, Kind::non_numeric_token);
      if (i < 1 || i > rows || j < 1 || j > cols) {
        throw MatrixMarketError(Kind::index_out_of_range, lineno,
                                "(" + toks[0] + ", " + toks[1] + ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
      }
      --i;
      --j;
      k = 2;
    } else {
      i = count % rows;  // column-major
      j = count / rows;
    }
    const double re = detail::parse_real(toks[k], lineno);
    const double im = complex ? detail::parse_real(toks[k + 1], lineno) : 0.0;
    data[i * cols + j] += Complex(re, im);
    ++count;
  }
  if (count != expected) {
    throw MatrixMarketError(Kind::entry_count_mismatch, lineno,
                            "expected " + std::to_string(expected) + " entries, found " + std::to_string(count));
  }
  return Matrix(rows, cols, std::move(data));
}

inline Matrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MatrixMarketError(MatrixMarketError::Kind::io, 0, "cannot open '" + path + "'");
  return read_matrix(in);
}

namespace detail {

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Writes Matrix Market; the field is complex iff some imaginary part is nonzero.
/// Values carry 17 significant digits, so binary64 entries round-trip exactly.
inline void write_matrix(const Matrix& m, std::ostream& out, MatrixMarketFormat format = MatrixMarketFormat::array) {
  const bool complex = !m.is_real();
  const bool coordinate = format == MatrixMarketFormat::coordinate;
  out << "%%MatrixMarket matrix " << (coordinate ? "coordinate" : "array") << ' ' << (complex ? "complex" : "real")
      << " general\n";
  auto value = [&](const Complex& z) {
    out << detail::format_double(z.real());
    if (complex) out << ' ' << detail::format_double(z.imag());
    out << '\n';
  };
  if (coordinate) {
    std::size_t nnz = 0;
    for (const auto& z : m.entries()) nnz += z != Complex{};
    out << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
    for (std::size_t j = 0; j < m.cols(); ++j)
      for (std::size_t i = 0; i < m.rows(); ++i)
        if (m(i, j) != Complex{}) {
          out << i + 1 << ' ' << j + 1 << ' ';
          value(m(i, j));
        }
  } else {
    out << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t j = 0; j < m.cols(); ++j)
      for (std::size_t i = 0; i < m.rows(); ++i) value(m(i, j));
  }
}

inline void write_matrix(const Matrix& m, const std::string& path, MatrixMarketFormat format = MatrixMarketFormat::array) {
  std::ofstream out(path);
  if (!out) throw MatrixMarketError(MatrixMarketError::Kind::io, 0, "cannot open '" + path + "' for writing");
  write_matrix(m, out, format);
  out.flush();
  if (!out) throw MatrixMarketError(MatrixMarketError::Kind::io, 0, "write to '" + path + "' failed");
}

}  // namespace pinvpert

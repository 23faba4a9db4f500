#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cflow/numeric.hpp"

namespace cflow {

/// Malformed input text: matrix documents, complex literals, flag values.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"n": n, "entries": [[[re, im], ...], ...]}, row-major.
Matrix parse_matrix_document(std::string_view text);
Matrix read_matrix_file(const std::string& path);
/// Inverse of parse_matrix_document; every number at 17 significant digits.
std::string format_matrix_document(const Matrix& a);

/// "a+bi", "a-bi", "a", "bi", "i", "-i". U+2212 is accepted as a minus sign.
Complex parse_complex(std::string_view text);
/// Comma-separated complex literals.
std::vector<Complex> parse_complex_list(std::string_view text);

std::string format_real(double x);
/// Shortest of the literal forms above that parse_complex reads back exactly.
std::string format_complex(Complex z);

}  // namespace cflow

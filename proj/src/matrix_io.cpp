#include "cflow/matrix_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace cflow {
namespace {

std::string normalize_literal(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    // U+2212 MINUS SIGN, as typed in documents.
    if (text.compare(i, 3, "\xE2\x88\x92") == 0) {
      out.push_back('-');
      i += 2;
    } else if (!std::isspace(static_cast<unsigned char>(text[i]))) {
      out.push_back(text[i]);
    }
  }
  return out;
}

double parse_real(std::string_view s, std::string_view whole) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(value))
    throw ParseError("not a complex number: '" + std::string(whole) + "'");
  return value;
}

// Bare sign before the 'i' means a unit coefficient.
double parse_imag(std::string_view s, std::string_view whole) {
  if (s.empty() || s == "+") return 1;
  if (s == "-") return -1;
  return parse_real(s, whole);
}

double json_number(const nlohmann::json& v) {
  if (!v.is_number()) throw ParseError("matrix entry component is not a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError("matrix entry component is not finite");
  return x;
}

}  // namespace

Matrix parse_matrix_document(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("matrix document: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("entries"))
    throw ParseError("matrix document needs the keys \"n\" and \"entries\"");
  const auto& n_field = doc["n"];
  if (!n_field.is_number_integer() || n_field.get<long long>() < 1)
    throw ParseError("\"n\" must be a positive integer");
  const auto n = static_cast<Index>(n_field.get<long long>());
  const auto& rows = doc["entries"];
  if (!rows.is_array() || static_cast<Index>(rows.size()) != n)
    throw ParseError("\"entries\" must hold n = " + std::to_string(n) + " rows");
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      throw ParseError("row " + std::to_string(i) + " must hold n = " + std::to_string(n) + " entries");
    for (Index j = 0; j < n; ++j) {
      const auto& pair = row[static_cast<std::size_t>(j)];
      if (!pair.is_array() || pair.size() != 2)
        throw ParseError("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") must be [re, im]");
      a(i, j) = Complex(json_number(pair[0]), json_number(pair[1]));
    }
  }
  return a;
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matrix_document(buf.str());
}

std::string format_real(double x) {
  if (x == 0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_matrix_document(const Matrix& a) {
  require_square(a, "matrix document");
  std::string out = "{\"n\": " + std::to_string(a.rows()) + ", \"entries\": [";
  for (Index i = 0; i < a.rows(); ++i) {
    out += i ? ",\n  [" : "\n  [";
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) out += ", ";
      out += "[" + format_real(a(i, j).real()) + ", " + format_real(a(i, j).imag()) + "]";
    }
    out += "]";
  }
  out += "\n]}\n";
  return out;
}

Complex parse_complex(std::string_view text) {
  const std::string s = normalize_literal(text);
  if (s.empty()) throw ParseError("empty complex literal");
  if (s.back() != 'i') return {parse_real(s, text), 0};
  const std::string_view body(s.data(), s.size() - 1);
  // The sign that separates the parts is the last one not part of an exponent.
  std::size_t split = std::string_view::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string_view::npos) return {0, parse_imag(body, text)};
  return {parse_real(body.substr(0, split), text), parse_imag(body.substr(split), text)};
}

std::vector<Complex> parse_complex_list(std::string_view text) {
  std::vector<Complex> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    out.push_back(parse_complex(text.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string format_complex(Complex z) {
  if (z.imag() == 0) return format_real(z.real());
  const std::string im = format_real(z.imag()) + "i";
  if (z.real() == 0) return im;
  return format_real(z.real()) + (z.imag() < 0 ? "" : "+") + im;
}

}  // namespace cflow

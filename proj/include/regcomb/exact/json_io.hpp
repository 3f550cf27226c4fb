#pragma once

#include <json.hpp>

#include <string>

#include "regcomb/exact/matrix.hpp"

namespace regcomb {

// Matrix exchange format:
//   {"rows": r, "cols": c, "entries": [["num", "den"], ...]}   (row-major)
// Numerators and denominators are decimal strings so nothing is lost.

inline nlohmann::json rational_to_json(const Rational& q) {
  return nlohmann::json::array({q.get_num().get_str(), q.get_den().get_str()});
}

inline Rational rational_from_json(const nlohmann::json& j) {
  auto as_integer = [](const nlohmann::json& x) -> Integer {
    if (x.is_string()) {
      Integer z;
      if (z.set_str(x.get<std::string>(), 10) != 0) throw DomainError("bad integer string in JSON");
      return z;
    }
    if (x.is_number_integer()) {
      Integer z;
      mpz_set_si(z.get_mpz_t(), x.get<long>());
      return z;
    }
    throw DomainError("expected an integer (decimal string) in JSON");
  };
  if (!j.is_array() || j.size() != 2) throw DomainError("rational entry must be [num, den]");
  Integer num = as_integer(j[0]);
  Integer den = as_integer(j[1]);
  if (den == 0) throw DomainError("zero denominator in JSON matrix");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline nlohmann::json matrix_to_json(const RatMatrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& x : m.data()) entries.push_back(rational_to_json(x));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", std::move(entries)}};
}

inline nlohmann::json matrix_to_json(const IntMatrix& m) { return matrix_to_json(to_rational_matrix(m)); }

inline RatMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries"))
    throw DomainError("matrix JSON needs rows, cols and entries");
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto& e = j.at("entries");
  if (rows == 0 || cols == 0) throw DomainError("matrix dimensions must be positive");
  if (!e.is_array() || e.size() != rows * cols)
    throw DomainError("matrix JSON entry count does not match rows*cols");
  RatMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = rational_from_json(e[i * cols + k]);
  return m;
}

}  // namespace regcomb

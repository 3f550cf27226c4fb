#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <string>

#include "regcomb/core.hpp"

namespace regcomb {

using Real = boost::multiprecision::mpfr_float;

inline constexpr unsigned kDefaultPrecisionBits = 200;

inline unsigned bits_to_digits10(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}

/// Sets the default working precision of newly created Reals for the
/// lifetime of the scope (thread-local in boost's mpfr backend).
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned bits = kDefaultPrecisionBits) : saved_(Real::default_precision()) {
    Real::default_precision(bits_to_digits10(bits));
  }
  ~PrecisionScope() { Real::default_precision(saved_); }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  unsigned saved_;
};

inline Real to_real(Rational q) {
  q.canonicalize();
  Real r;
  mpfr_set_q(r.backend().data(), q.get_mpq_t(), MPFR_RNDN);
  return r;
}

inline Real to_real(const Integer& z) {
  Real r;
  mpfr_set_z(r.backend().data(), z.get_mpz_t(), MPFR_RNDN);
  return r;
}

inline Real real_pi() {
  Real r;
  mpfr_const_pi(r.backend().data(), MPFR_RNDN);
  return r;
}

inline Real real_log(const Rational& q) { return boost::multiprecision::log(to_real(q)); }
inline Real real_log(const Integer& z) { return boost::multiprecision::log(to_real(z)); }

/// Minimal complex number over Real (std::complex is unspecified for
/// non-builtin scalar types).
struct Complex {
  Real re = 0;
  Real im = 0;

  friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
  friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  Real abs() const { return boost::multiprecision::sqrt(re * re + im * im); }
};

/// e^{2πi x}.
inline Complex unit_phase(const Real& x) {
  Real a = 2 * real_pi() * x;
  return {boost::multiprecision::cos(a), boost::multiprecision::sin(a)};
}

inline std::string format_real(const Real& x, int digits = 20) {
  return x.str(digits, std::ios_base::fmtflags(0));
}

}  // namespace regcomb

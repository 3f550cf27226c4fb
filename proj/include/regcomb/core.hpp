#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace regcomb {

using Integer = mpz_class;
using Rational = mpq_class;

// Error hierarchy. The CLI maps DomainError to exit code 1 and
// WorkBoundExceeded to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class RankDeficientError : public DomainError {
 public:
  RankDeficientError(const std::string& what, std::size_t rank)
      : DomainError(what), rank_(rank) {}
  std::size_t rank() const noexcept { return rank_; }

 private:
  std::size_t rank_;
};

class WorkBoundExceeded : public Error {
 public:
  using Error::Error;
};

// Binomial coefficient with the convention C(n, m) = 0 whenever m < 0,
// n < 0 or n < m.
inline Integer binomial(long n, long m) {
  Integer r;
  if (m < 0 || n < 0 || n < m) return r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n),
               static_cast<unsigned long>(m));
  return r;
}

// Small binomial for index arithmetic; throws if the value does not fit.
inline std::uint64_t binomial_u64(long n, long m) {
  Integer r = binomial(n, m);
  if (!r.fits_ulong_p()) throw WorkBoundExceeded("binomial does not fit in 64 bits");
  return r.get_ui();
}

inline Integer factorial(long n) {
  Integer r;
  if (n < 0) throw DomainError("factorial of a negative number");
  mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
  return r;
}

inline Integer ipow(const Integer& base, unsigned long e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

inline Rational rpow(const Rational& base, unsigned long e) {
  Integer num = ipow(base.get_num(), e);
  Integer den = ipow(base.get_den(), e);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

inline Integer gcd(const Integer& a, const Integer& b) {
  Integer r;
  mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

inline Integer lcm(const Integer& a, const Integer& b) {
  Integer r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

// Floor division for arbitrary signs.
inline Integer floor_div(const Integer& a, const Integer& b) {
  Integer q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

inline Integer abs(const Integer& a) {
  Integer r;
  mpz_abs(r.get_mpz_t(), a.get_mpz_t());
  return r;
}

inline bool is_integral(const Rational& q) { return q.get_den() == 1; }

inline std::string to_string(const Integer& z) { return z.get_str(); }

}  // namespace regcomb

#pragma once

#include <optional>
#include <string>

#include "regcomb/core.hpp"
#include "regcomb/real.hpp"

namespace regcomb {

/// Result of a counting formula. Either `exact` is set (a trivially known
/// count such as 0 when a divisibility condition fails) or `log_main` holds
/// the natural log of the main term, with the parametric δ bound.
struct CountResult {
  Rational p = 0;
  std::optional<Integer> exact;
  std::string reason;
  std::optional<Real> log_main;
  std::optional<Real> delta_bound;

  Real log10_main() const { return *log_main / boost::multiprecision::log(Real(10)); }
  Real main() const { return boost::multiprecision::exp(*log_main); }
};

/// Work limits shared by the structure modules.
struct Limits {
  std::size_t max_ground = 1u << 20;        // |B| for materialized maps
  std::size_t max_entries = 100'000'000;    // |B|·|A|
  double work_bound = 1e9;                  // enumeration subsets
  std::size_t dp_states = 10'000'000;       // exact distribution states
};

inline void check_map_size(const Integer& ground, const Integer& dim, const Limits& lim) {
  if (ground > static_cast<unsigned long>(lim.max_ground) ||
      ground * dim > static_cast<unsigned long>(lim.max_entries))
    throw WorkBoundExceeded("feature map with |B| = " + ground.get_str() + " and |A| = " + dim.get_str() +
                            " exceeds the size bound");
}

/// ln of ρ / ((2πp(1−p))^{dim/2} p^N (1−p)^{|B|−N}), with p = N/|B|.
/// Requires 0 < N < |B|.
inline Real log_main_term(const Rational& rho_sq, const Integer& dim, const Integer& n, const Integer& ground) {
  Rational p(n, ground);
  p.canonicalize();
  Rational q = 1 - p;
  Real lp = real_log(p), lq = real_log(q);
  Real two_pi_pq = 2 * real_pi() * to_real(Rational(p * q));
  return real_log(rho_sq) / 2 - to_real(dim) / 2 * boost::multiprecision::log(two_pi_pq) - to_real(n) * lp -
         to_real(Integer(ground - n)) * lq;
}

/// Edge cases shared by all counting formulas: N outside (0, |B|).
inline std::optional<CountResult> trivial_count(const Integer& n, const Integer& ground) {
  CountResult r;
  if (n < 0 || n > ground) {
    r.exact = 0;
    r.reason = "N outside [0, |B|]";
    return r;
  }
  if (n == 0 || n == ground) {
    r.p = n == 0 ? Rational(0) : Rational(1);
    r.exact = 1;
    r.reason = n == 0 ? "empty set is the only structure of size 0" : "B itself is the only structure of size |B|";
    return r;
  }
  return std::nullopt;
}

/// (base)^(c·t) / √min(N, |B|−N).
inline Real delta_bound(const Real& base, const Real& c, long t, const Integer& n, const Integer& ground) {
  Integer m = n < ground - n ? n : Integer(ground - n);
  return boost::multiprecision::pow(base, c * t) / boost::multiprecision::sqrt(to_real(m));
}

}  // namespace regcomb

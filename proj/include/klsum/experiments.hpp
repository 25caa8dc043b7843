#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "klsum/arith.hpp"
#include "klsum/discrepancy.hpp"
#include "klsum/parallel.hpp"

// The two desk-scale experiments: equidistribution of the divisor function in
// arithmetic progressions for almost all moduli q ~ Q, and the exact binary
// cubic sum Σ_{n1,n2≤X} d(n1·n2²+1) against its predicted main term.

namespace klsum {

// Prime-window parameters (P1,Q1,P2,Q2) = (X^{10ε}, X^{√ε/2}, X^{2√ε}, X^{1/12}).
// The asymptotic admissibility window ε ∈ (loglog X/log X, 1/1000) is empty for
// every X a double can hold, so eps_admissible() is a recorded flag, never a
// gate: out-of-window runs proceed — exploration is the point.
struct GoodModuliParams {
  double X = 1e6;
  double Q = 1e4;
  double eps = 0.012;

  double P1() const { return std::pow(X, 10.0 * eps); }
  double Q1() const { return std::pow(X, 0.5 * std::sqrt(eps)); }
  double P2() const { return std::pow(X, 2.0 * std::sqrt(eps)); }
  double Q2() const { return std::pow(X, 1.0 / 12.0); }
  bool degenerate() const { return P1() >= Q1() || P2() >= Q2(); }
  bool eps_admissible() const {
    return eps > std::log(std::log(X)) / std::log(X) && eps < 1e-3;
  }
};

struct ModuliSet {
  std::vector<u64> members;
  u64 interval_count = 0;
  bool degenerate = false;
};

namespace detail {

inline void require_good_moduli_params(const GoodModuliParams& gp, double qcap,
                                       const char* who) {
  if (!(gp.X >= 16.0)) throw std::invalid_argument(std::string(who) + ": X < 16");
  if (!(gp.eps > 0.0 && gp.eps < 1.0))
    throw std::invalid_argument(std::string(who) + ": eps outside (0,1)");
  if (!(gp.Q >= 1.0 && gp.Q <= qcap))
    throw std::invalid_argument(std::string(who) + ": Q outside enumeration budget");
}

// q matches the pattern p1·p2·k with p1 ∈ (lo1,hi1], p2 ∈ (lo2,hi2],
// gcd(k, p1p2) = 1 — i.e. distinct primes exactly dividing q, one per window.
inline bool window_pattern(const Factorization& f, double lo1, double hi1, double lo2,
                           double hi2) {
  for (const auto& [p1, e1] : f.factors) {
    if (e1 != 1) continue;
    const double pd1 = static_cast<double>(p1);
    if (!(pd1 > lo1 && pd1 <= hi1)) continue;
    for (const auto& [p2, e2] : f.factors) {
      if (e2 != 1 || p2 == p1) continue;
      const double pd2 = static_cast<double>(p2);
      if (pd2 > lo2 && pd2 <= hi2) return true;
    }
  }
  return false;
}

inline std::vector<std::int8_t> mobius_table(u64 n) {
  std::vector<std::int8_t> mu(n + 1, 1);
  std::vector<u32> spf(n + 1, 0);
  for (u64 i = 2; i <= n; ++i) {
    if (spf[i] == 0)
      for (u64 j = i; j <= n; j += i)
        if (spf[j] == 0) spf[j] = static_cast<u32>(i);
  }
  mu[0] = 0;
  for (u64 i = 2; i <= n; ++i) {
    const u64 p = spf[i];
    const u64 m = i / p;
    mu[i] = (m % p == 0) ? 0 : static_cast<std::int8_t>(-mu[m]);
  }
  return mu;
}

// #{n ∈ [lo,hi] : n ≡ c (mod d)} with 0 ≤ c < d
inline u64 ap_count(u64 lo, u64 hi, u64 c, u64 d) {
  if (hi < lo) return 0;
  const auto upto = [&](u64 x) { return x >= c ? (x - c) / d + 1 : 0; };
  return upto(hi) - (lo == 0 ? 0 : upto(lo - 1));
}

}  // namespace detail

// All q ∈ (Q,2Q] of the form p1·p2·k with p1 ∈ (P1,Q1], p2 ∈ (P2,Q2],
// gcd(k, p1p2) = 1, decided from factorizations.  Degenerate windows return
// the empty set with the flag raised.
inline ModuliSet good_moduli(const GoodModuliParams& gp) {
  detail::require_good_moduli_params(gp, 1e6, "good_moduli");
  ModuliSet out;
  const u64 qlo = static_cast<u64>(std::floor(gp.Q)) + 1;
  const u64 qhi = static_cast<u64>(std::floor(2.0 * gp.Q));
  out.interval_count = qhi >= qlo ? qhi - qlo + 1 : 0;
  out.degenerate = gp.degenerate();
  if (out.degenerate) return out;
  const double lo1 = gp.P1(), hi1 = gp.Q1(), lo2 = gp.P2(), hi2 = gp.Q2();
  for (u64 q = qlo; q <= qhi; ++q)
    if (detail::window_pattern(factorize(q), lo1, hi1, lo2, hi2)) out.members.push_back(q);
  return out;
}

struct ExceptionalReport {
  u64 bad_count = 0;
  u64 interval_count = 0;
  double sieve_rhs = 0.0;   // Q(log P1/log Q1 + log P2/log Q2 + 1/P1 + 1/P2)
  double ratio = 0.0;       // bad_count / sieve_rhs
  double envelope_C = 0.0;  // bad_count / (√ε·Q)
  bool degenerate = false;
};

inline ExceptionalReport exceptional_fraction(const GoodModuliParams& gp) {
  const auto set = good_moduli(gp);
  ExceptionalReport rep;
  rep.interval_count = set.interval_count;
  rep.bad_count = set.interval_count - set.members.size();
  rep.degenerate = set.degenerate;
  rep.sieve_rhs = gp.Q * (std::log(gp.P1()) / std::log(gp.Q1()) +
                          std::log(gp.P2()) / std::log(gp.Q2()) + 1.0 / gp.P1() +
                          1.0 / gp.P2());
  rep.ratio = static_cast<double>(rep.bad_count) / rep.sieve_rhs;
  rep.envelope_C = static_cast<double>(rep.bad_count) / (std::sqrt(gp.eps) * gp.Q);
  return rep;
}

struct ApModulusRow {
  u64 q = 0;
  double delta = 0.0;      // exact integer numerator over φ(q), rounded once
  double threshold = 0.0;  // X^{1-ε}(log X)^B / q
  bool violator = false;
  bool good = false;  // q in the good-moduli set
};

struct ApRunReport {
  GoodModuliParams params;
  i64 a = 1;
  double B = 2.0;
  u64 moduli_checked = 0;  // q ∈ (Q,2Q] with gcd(a,q) = 1
  u64 violators = 0;
  u64 good_violators = 0, bad_violators = 0;
  u64 good_count = 0;
  double sqrt_eps_Q = 0.0;
  double worst_excess = 0.0;  // max |Δ|/threshold
  std::vector<ApModulusRow> rows;
};

// Δ(X;q,a) for every q ∈ (Q,2Q] with gcd(a,q)=1, against the per-modulus
// threshold X^{1-ε}(log X)^B/q.  One divisor table serves all moduli: AP sums
// walk the progression directly (Σ_q X/q table hits) and the coprime sums come
// from Möbius inversion over Σ_{e|n} d(n) aggregates, so the whole sweep is
// ~X·log(2Q) work instead of |interval|·X.
inline ApRunReport ap_equidistribution_run(const GoodModuliParams& gp, i64 a, double B,
                                           int threads = 1) {
  detail::require_good_moduli_params(gp, 1e6, "ap_equidistribution_run");
  if (!(gp.X <= 1e8))
    throw std::invalid_argument("ap_equidistribution_run: X over the desk budget");
  if (a == 0) throw std::invalid_argument("ap_equidistribution_run: a = 0 is no residue class");
  ApRunReport rep;
  rep.params = gp;
  rep.a = a;
  rep.B = B;
  rep.sqrt_eps_Q = std::sqrt(gp.eps) * gp.Q;

  const u64 nmax = static_cast<u64>(std::floor(gp.X));
  const u64 qlo = static_cast<u64>(std::floor(gp.Q)) + 1;
  const u64 qhi = static_cast<u64>(std::floor(2.0 * gp.Q));
  if (qhi < qlo) return rep;
  const auto table = divisor_sieve(1, nmax);
  const auto mu = detail::mobius_table(qhi);

  // S[e] = Σ_{n ≤ X, e|n} d(n) for square-free e ≤ 2Q
  std::vector<u64> sdiv(qhi + 1, 0);
  for (u64 e = 1; e <= qhi; ++e) {
    if (mu[e] == 0) continue;
    u64 acc = 0;
    for (u64 n = e; n <= nmax; n += e) acc += table.at(n);
    sdiv[e] = acc;
  }

  const auto good = good_moduli(gp);
  rep.good_count = good.members.size();
  const double thr_num = std::pow(gp.X, 1.0 - gp.eps) * std::pow(std::log(gp.X), B);

  const u64 span = qhi - qlo + 1;
  auto chunks = chunked_map<std::vector<ApModulusRow>>(
      span, 512, threads, [&](u64 clo, u64 chi) {
        std::vector<ApModulusRow> rows;
        for (u64 q = qlo + clo; q < qlo + chi; ++q) {
          const u64 ar = detail::reduce_mod(a, q);
          if (std::gcd(ar, q) != 1) continue;
          ApModulusRow row;
          row.q = q;
          u64 ap = 0;
          for (u64 n = ar == 0 ? q : ar; n <= nmax; n += q) ap += table.at(n);
          const auto f = factorize(q);
          i64 cop = 0;
          const u64 ndiv = u64{1} << f.factors.size();
          for (u64 mask = 0; mask < ndiv; ++mask) {  // square-free divisors of q
            u64 e = 1;
            for (u64 bit = 0, m = mask; m != 0; ++bit, m >>= 1)
              if (m & 1) e *= f.factors[bit].first;
            cop += static_cast<i64>(mu[e]) * static_cast<i64>(sdiv[e]);
          }
          const u64 phi = euler_phi(q);
          row.delta = static_cast<double>(static_cast<i64>(phi * ap) - cop) /
                      static_cast<double>(phi);
          row.threshold = thr_num / static_cast<double>(q);
          row.violator = std::abs(row.delta) > row.threshold;
          row.good = std::binary_search(good.members.begin(), good.members.end(), q);
          rows.push_back(row);
        }
        return rows;
      });
  for (auto& part : chunks)
    for (auto& row : part) {
      ++rep.moduli_checked;
      rep.worst_excess = std::max(rep.worst_excess, std::abs(row.delta) / row.threshold);
      if (row.violator) {
        ++rep.violators;
        ++(row.good ? rep.good_violators : rep.bad_violators);
      }
      rep.rows.push_back(row);
    }
  return rep;
}

// ---- binary cubic sum ------------------------------------------------------

inline constexpr double kZeta2 = 1.6449340668482264;  // π²/6

struct CubicExperiment {
  u64 X = 1;
  u64 lhs = 0;  // Σ_{n1,n2 ≤ X} d(n1·n2² + 1), exact
  double main_term = 0.0;
  double ratio = 0.0;
};

namespace detail {

// Σ_{n1 ≤ X} d(q·n1 + 1) for q = n2², by counting divisor pairs: every
// divisor dv with dv² < m = q·n1+1 pairs with m/dv > dv, plus the square
// diagonal.  Divisors of m are coprime to q, so each dv ≤ √(qX+1) hits the
// progression n1 ≡ -q̄ (mod dv) and contributes 2 per hit with n1 above the
// dv² < m cut.
inline u64 cubic_ap_strip(u64 X, u64 n2) {
  const u64 q = n2 * n2;
  const u64 mmax = q * X + 1;
  u64 total = 0;
  for (u64 dv = 1, top = isqrt(mmax); dv <= top; ++dv) {
    if (std::gcd(dv, n2) != 1) continue;
    const u64 c = dv == 1 ? 0 : (dv - mod_inv(q % dv, dv)) % dv;
    const u64 lo = (dv * dv - 1) / q + 1;  // n1 ≥ lo ⇔ m > dv²
    total += 2 * ap_count(std::max<u64>(lo, 1), X, c, dv);
  }
  for (u64 t = 1; t * t <= mmax; ++t)  // m = t² exactly
    if ((t * t - 1) % q == 0 && (t * t - 1) / q >= 1 && (t * t - 1) / q <= X) ++total;
  return total;
}

}  // namespace detail

// Exact lhs via per-n2 divisor-pair counting along each progression; the n2
// strips are independent and parallelize chunk-deterministically.
inline CubicExperiment binary_cubic_sum(u64 X, int threads = 1) {
  if (X < 1 || X > 3000)
    throw std::invalid_argument("binary_cubic_sum: X outside [1, 3000]");
  CubicExperiment ex;
  ex.X = X;
  const auto parts = chunked_map<u64>(X, 16, threads, [&](u64 clo, u64 chi) {
    u64 acc = 0;
    for (u64 n2 = clo + 1; n2 <= chi; ++n2) acc += detail::cubic_ap_strip(X, n2);
    return acc;
  });
  for (const u64 p : parts) ex.lhs += p;
  const double xd = static_cast<double>(X);
  ex.main_term = 3.0 / kZeta2 * xd * xd * std::log(xd);
  ex.ratio = static_cast<double>(ex.lhs) / ex.main_term;
  return ex;
}

// Oracle route: factorize every value (small X only).
inline u64 cubic_factor_path(u64 X) {
  if (X > 60) throw std::invalid_argument("cubic_factor_path: X > 60");
  u64 total = 0;
  for (u64 n2 = 1; n2 <= X; ++n2)
    for (u64 n1 = 1; n1 <= X; ++n1) total += divisor_count(n1 * n2 * n2 + 1);
  return total;
}

// Oracle route: one divisor table over [1, X³+1] and straight lookups.  An
// optional caller-provided table (covering at least X³+1) is reused across X.
inline u64 cubic_sieve_path(u64 X, const DivisorTable* table = nullptr) {
  if (X > 200) throw std::invalid_argument("cubic_sieve_path: X > 200");
  const u64 mmax = X * X * X + 1;
  DivisorTable own;
  if (table == nullptr) {
    own = divisor_sieve(1, mmax);
    table = &own;
  } else if (table->start != 1 || table->values.size() < mmax) {
    throw std::invalid_argument("cubic_sieve_path: table does not cover [1, X^3+1]");
  }
  u64 total = 0;
  for (u64 n2 = 1; n2 <= X; ++n2) {
    const u64 q = n2 * n2;
    for (u64 n1 = 1; n1 <= X; ++n1) total += table->at(q * n1 + 1);
  }
  return total;
}

struct CubicMainTerm {
  double direct = 0.0;  // X·Σ_{n2≤X} φ(n2)/n2 · log(X·n2²)
  double closed = 0.0;  // (3/ζ(2))·X²·log X
  double rel_gap = 0.0;
};

inline CubicMainTerm cubic_main_term(u64 X) {
  if (X < 2) throw std::invalid_argument("cubic_main_term: X < 2");
  CubicMainTerm mt;
  const double xd = static_cast<double>(X);
  Kahan acc;
  for (u64 n2 = 1; n2 <= X; ++n2) {
    const double nd = static_cast<double>(n2);
    acc.add(static_cast<double>(euler_phi(n2)) / nd * std::log(xd * nd * nd));
  }
  mt.direct = xd * acc.value();
  mt.closed = 3.0 / kZeta2 * xd * xd * std::log(xd);
  mt.rel_gap = std::abs(mt.direct - mt.closed) / mt.closed;
  return mt;
}

// The n2 analogue of the good moduli: n2 = p1·p2·k ≤ X with the windows
// square-rooted.  At desk scale the windows sit below the smallest primes
// whenever they are non-degenerate, so the set is empty or degenerate; the
// enumeration is faithful regardless.
inline ModuliSet good_n2_set(double X, double eps) {
  GoodModuliParams gp{X, 1.0, eps};
  detail::require_good_moduli_params(gp, 1.0, "good_n2_set");
  if (!(X <= 1e6)) throw std::invalid_argument("good_n2_set: X over enumeration budget");
  ModuliSet out;
  out.interval_count = static_cast<u64>(std::floor(X));
  out.degenerate = gp.degenerate();
  if (out.degenerate) return out;
  const double lo1 = std::sqrt(gp.P1()), hi1 = std::sqrt(gp.Q1());
  const double lo2 = std::sqrt(gp.P2()), hi2 = std::sqrt(gp.Q2());
  for (u64 n = 1; n <= out.interval_count; ++n)
    if (detail::window_pattern(factorize(n), lo1, hi1, lo2, hi2)) out.members.push_back(n);
  return out;
}

// ε convention for the cubic experiment: A·loglog X/log X, A a free report
// parameter (default 10).
inline double eps_for_cubic(double X, double A = 10.0) {
  if (!(X >= 16.0)) throw std::invalid_argument("eps_for_cubic: X < 16");
  return A * std::log(std::log(X)) / std::log(X);
}

}  // namespace klsum

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "klsum/arith.hpp"
#include "klsum/compensated.hpp"
#include "klsum/incomplete_sums.hpp"
#include "klsum/parallel.hpp"

// Divisor-function discrepancy in arithmetic progressions:
//   Δ(X;q,a)   = Σ_{n≤X, n≡a(q)} d(n) − (1/φ(q))·Σ_{n≤X,(n,q)=1} d(n)
//   Δ^ψ(X;q,a) = Σ_n ψ(n/X)·d(n)·(1_{n≡a(q)} − 1_{(n,q)=1}/φ(q))
// The sharp-cutoff Δ is kept exact: an integer numerator over φ(q), reduced
// only at output.  Smooth and averaged variants stream the divisor sieve once
// and feed every (q,a) cell from the same pass, so theorem-scale sweeps never
// re-sieve; chunked accumulation keeps results thread-count independent.

namespace klsum {

struct ExactRational {
  i64 num = 0;
  u64 den = 1;  // kept unreduced at den = φ(q) so cells over one q share it

  ExactRational reduced() const {
    const u64 g = std::gcd(static_cast<u64>(num < 0 ? -num : num), den);
    return g <= 1 ? *this : ExactRational{num / static_cast<i64>(g), den / g};
  }
};

struct DiscrepancyRecord {
  double X = 1.0;
  u64 q = 1, a = 0;
  u64 ap_sum = 0, coprime_sum = 0;  // integer divisor sums behind the rational
  ExactRational exact;               // φ(q)·ap_sum − coprime_sum over φ(q)
  double delta = 0.0;
  double trivial_scale = 0.0;  // X·log X / q
};

namespace detail {

inline void require_reduced_unit(u64 a, u64 q, const char* who) {
  if (q == 0) throw std::invalid_argument(std::string(who) + ": q = 0");
  if (std::gcd(a % q, q) != 1)
    throw std::invalid_argument(std::string(who) + ": residue not coprime to modulus");
}

}  // namespace detail

// Sharp-cutoff discrepancy for every unit residue of one modulus in a single
// sieve pass.  An optional caller-provided divisor table covering [1, X]
// avoids re-sieving across many moduli at the same X.
inline std::vector<DiscrepancyRecord> delta_all_residues(double X, u64 q,
                                                         const DivisorTable* table = nullptr) {
  if (q == 0) throw std::invalid_argument("delta_all_residues: q = 0");
  if (!(X >= 1.0)) throw std::invalid_argument("delta_all_residues: X < 1");
  const u64 nmax = static_cast<u64>(std::floor(X));
  std::vector<u64> cls(q, 0);
  if (table != nullptr) {
    if (table->start != 1 || table->values.size() < nmax)
      throw std::invalid_argument("delta_all_residues: table does not cover [1, X]");
    for (u64 n = 1; n <= nmax; ++n) cls[n % q] += table->at(n);
  } else {
    divisor_sieve_blocks(1, nmax, u64{1} << 20, [&](const DivisorTable& t) {
      for (u64 i = 0; i < t.values.size(); ++i) cls[(t.start + i) % q] += t.values[i];
    });
  }
  const u64 phi = euler_phi(q);
  u64 coprime = 0;
  for (u64 b = 0; b < q; ++b)
    if (std::gcd(b, q) == 1) coprime += cls[b];
  std::vector<DiscrepancyRecord> out;
  for (u64 a = 0; a < q; ++a) {
    if (std::gcd(a, q) != 1) continue;
    DiscrepancyRecord r;
    r.X = X;
    r.q = q;
    r.a = a;
    r.ap_sum = cls[a];
    r.coprime_sum = coprime;
    r.exact = {static_cast<i64>(phi * cls[a]) - static_cast<i64>(coprime), phi};
    r.delta = static_cast<double>(r.exact.num) / static_cast<double>(phi);
    r.trivial_scale = X * std::log(X) / static_cast<double>(q);
    out.push_back(r);
  }
  return out;
}

inline DiscrepancyRecord delta(double X, u64 q, u64 a) {
  detail::require_reduced_unit(a, q, "delta");
  const auto all = delta_all_residues(X, q);
  for (const auto& r : all)
    if (r.a == a % q) return r;
  throw std::logic_error("delta: residue not found");  // unreachable
}

// Oracle route: identical definition with per-n divisor counts from trial
// factorization instead of the sieve.
inline DiscrepancyRecord delta_trial_division(double X, u64 q, u64 a) {
  detail::require_reduced_unit(a, q, "delta_trial_division");
  const u64 nmax = static_cast<u64>(std::floor(X));
  DiscrepancyRecord r;
  r.X = X;
  r.q = q;
  r.a = a % q;
  for (u64 n = 1; n <= nmax; ++n) {
    const u64 d = divisor_count(n);
    if (n % q == r.a) r.ap_sum += d;
    if (std::gcd(n, q) == 1) r.coprime_sum += d;
  }
  const u64 phi = euler_phi(q);
  r.exact = {static_cast<i64>(phi * r.ap_sum) - static_cast<i64>(r.coprime_sum), phi};
  r.delta = static_cast<double>(r.exact.num) / static_cast<double>(phi);
  r.trivial_scale = X * std::log(X) / static_cast<double>(q);
  return r;
}

struct SmoothCell {
  u64 q = 1;
  u64 a = 0;
};

// Δ^ψ for many (q,a) cells from one streamed pass over n ∈ (X, 2X).  The
// n-range is cut into fixed chunks whose partial sums are combined in index
// order, so the result is independent of the thread count.
inline std::vector<double> delta_smooth_batch(double X, const WeightSpec& spec,
                                              const std::vector<SmoothCell>& cells,
                                              int threads = 1) {
  if (spec.kind != WeightKind::kBump12)
    throw std::invalid_argument("delta_smooth_batch: weight must be the bump kind");
  if (!(X >= 1.0)) throw std::invalid_argument("delta_smooth_batch: X < 1");
  for (const auto& c : cells) detail::require_reduced_unit(c.a, c.q, "delta_smooth_batch");
  const Weight psi = make_weight(spec);
  const u64 lo = static_cast<u64>(std::floor(X)) + 1;
  const u64 hi = static_cast<u64>(std::floor(2.0 * X));
  const std::size_t ncells = cells.size();
  using Partial = std::vector<std::pair<double, double>>;  // (ap, coprime) per cell
  if (ncells == 0) return {};
  std::vector<double> out(ncells, 0.0);
  if (hi < lo) return out;

  const u64 chunk = u64{1} << 16;
  const auto partials =
      chunked_map<Partial>(hi - lo + 1, chunk, threads, [&](u64 clo, u64 chi) {
        Partial acc(ncells, {0.0, 0.0});
        std::vector<Kahan> ap(ncells), cop(ncells);
        const auto dt = divisor_sieve(lo + clo, lo + chi - 1);
        for (u64 n = lo + clo; n < lo + chi; ++n) {
          const double f =
              psi(static_cast<double>(n) / X) * static_cast<double>(dt.at(n));
          if (f == 0.0) continue;
          for (std::size_t i = 0; i < ncells; ++i) {
            if (n % cells[i].q == cells[i].a) ap[i].add(f);
            if (std::gcd(n, cells[i].q) == 1) cop[i].add(f);
          }
        }
        for (std::size_t i = 0; i < ncells; ++i) acc[i] = {ap[i].value(), cop[i].value()};
        return acc;
      });
  for (std::size_t i = 0; i < ncells; ++i) {
    Kahan ap, cop;
    for (const auto& p : partials) {
      ap.add(p[i].first);
      cop.add(p[i].second);
    }
    out[i] = ap.value() - cop.value() / static_cast<double>(euler_phi(cells[i].q));
  }
  return out;
}

inline double delta_smooth(double X, u64 q, u64 a, const WeightSpec& spec, int threads = 1) {
  return delta_smooth_batch(X, spec, {{q, a % q}}, threads)[0];
}

struct AvgDeltaSpec {
  u64 r = 1, s = 1;
  double U = 4.0;
  i64 a = 1;
  bool squares = false;  // average over q = rsu² (u² ~ U) instead of q = rsu (u ~ U)
};

struct AvgDeltaResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::vector<u64> moduli;  // the q = rsu (or rsu²) actually averaged
};

namespace detail {

inline std::vector<u64> avg_u_support(const AvgDeltaSpec& sp) {
  const u64 amod = static_cast<u64>(sp.a < 0 ? -sp.a : sp.a);
  std::vector<u64> us;
  const u64 hi = static_cast<u64>(std::floor(2.0 * sp.U));
  for (u64 u = 1; (sp.squares ? u * u : u) <= hi; ++u) {
    const u64 w = sp.squares ? u * u : u;
    if (static_cast<double>(w) > sp.U && is_squarefree(u) &&
        std::gcd(u, amod * sp.r * sp.s) == 1)
      us.push_back(u);
  }
  return us;
}

}  // namespace detail

// Averaged |Δ^ψ| against the envelopes, for a whole sweep of (r,s,U) cells at
// one X: every modulus of every cell lands in a single streamed pass.
//   square-free: lhs = (1/U)·Σ_{u ~ U sq-free, (u,ars)=1} |Δ^ψ(X; rsu, a)|, rhs the
//                square-free envelope;
//   squares:     lhs = U^{-1/2}·Σ_{u² ~ U, u sq-free} |Δ^ψ(X; rsu², a)|, rhs the
//                square-moduli envelope (its U^{o(1)} factor taken as 1).
inline std::vector<AvgDeltaResult> avg_delta_sweep(double X, const WeightSpec& weight,
                                                   const std::vector<AvgDeltaSpec>& specs,
                                                   int threads = 1) {
  std::vector<SmoothCell> cells;
  std::vector<AvgDeltaResult> out(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& sp = specs[i];
    detail::require_coprime(sp.r, sp.s, "avg_delta_sweep");
    if (!detail::is_cube_free(sp.s))
      throw std::invalid_argument("avg_delta_sweep: s not cube-free");
    detail::require_unit(sp.a, sp.r * sp.s, "avg_delta_sweep");
    const double rd = static_cast<double>(sp.r), sd = static_cast<double>(sp.s);
    out[i].rhs = sp.squares ? bound_M(rd, sd, sp.U, X) : bound_L(rd, sd, sp.U, X);
    for (const u64 u : detail::avg_u_support(sp)) {
      const u64 q = sp.r * sp.s * (sp.squares ? u * u : u);
      out[i].moduli.push_back(q);
      cells.push_back({q, detail::reduce_mod(sp.a, q)});
    }
  }
  const auto vals = delta_smooth_batch(X, weight, cells, threads);
  std::size_t at = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Kahan acc;
    for (std::size_t j = 0; j < out[i].moduli.size(); ++j) acc.add(std::abs(vals[at++]));
    out[i].lhs = acc.value() / (specs[i].squares ? std::sqrt(specs[i].U) : specs[i].U);
    out[i].ratio = out[i].lhs / out[i].rhs;
  }
  return out;
}

inline AvgDeltaResult avg_delta_squarefree(u64 r, u64 s, double U, double X, i64 a,
                                           const WeightSpec& weight, int threads = 1) {
  return avg_delta_sweep(X, weight, {{r, s, U, a, false}}, threads)[0];
}

inline AvgDeltaResult avg_delta_squares(u64 r, u64 s, double U, double X, i64 a,
                                        const WeightSpec& weight, int threads = 1) {
  return avg_delta_sweep(X, weight, {{r, s, U, a, true}}, threads)[0];
}

struct RangeReport {
  bool cond[4] = {false, false, false, false};  // s³U⁶<X^{2−ε}, r≤X^{1/3−ε}, U>X^ε, r¹²s⁹U⁶<X^{8−ε}
  bool all = false;
  bool degenerate = false;                          // ε ≤ 0
  bool boundary[4] = {false, false, false, false};  // comparison at equality
};

// The power-saving parameter window, evaluated on the log scale.
inline RangeReport range_check(double r, double s, double U, double X, double eps) {
  if (!(r >= 1.0 && s >= 1.0 && U > 0.0 && X > 1.0))
    throw std::invalid_argument("range_check: parameters out of range");
  RangeReport rep;
  rep.degenerate = eps <= 0.0;
  const double lx = std::log(X);
  const double lhs[4] = {3.0 * std::log(s) + 6.0 * std::log(U), std::log(r), std::log(U),
                         12.0 * std::log(r) + 9.0 * std::log(s) + 6.0 * std::log(U)};
  const double rhsv[4] = {(2.0 - eps) * lx, (1.0 / 3.0 - eps) * lx, eps * lx, (8.0 - eps) * lx};
  const bool strict[4] = {true, false, true, true};  // the middle one is ≤
  for (int i = 0; i < 4; ++i) {
    rep.boundary[i] = std::abs(lhs[i] - rhsv[i]) <= 1e-12 * std::max(1.0, std::abs(rhsv[i]));
    // U > X^ε compares the other way around
    const bool lt = i == 2 ? lhs[i] > rhsv[i] : lhs[i] < rhsv[i];
    const bool le = i == 2 ? lhs[i] >= rhsv[i] : lhs[i] <= rhsv[i];
    rep.cond[i] = strict[i] ? (lt && !rep.boundary[i]) : (le || rep.boundary[i]);
  }
  rep.all = rep.cond[0] && rep.cond[1] && rep.cond[2] && rep.cond[3];
  return rep;
}

}  // namespace klsum

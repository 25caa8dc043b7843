#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "klsum/arith.hpp"
#include "klsum/compensated.hpp"
#include "klsum/kloosterman.hpp"

// Incomplete sums of Kloosterman values against smooth cutoffs:
//   - compactly supported C∞ weights and their Fourier transforms,
//   - Poisson completion of the four-factor correlation over a composite
//     cube-free modulus, with adaptively certified frequency truncation,
//   - the shifted-window correlation sum behind the averaging step,
//   - bilinear forms Σ_u γ_u Σ_n λ_n Kl2(an; rsu) with their closed-form
//     envelope expressions.
// Every lhs here is a literal finite sum; every rhs is an explicit formula.
// Divisor-power and log-power factors are deliberately left out of each rhs
// and surfaced as a separate column so ratios stay comparable across sweeps.

namespace klsum {

enum class WeightKind { kBump12, kWindowSym, kWindowHalf };

struct WeightSpec {
  WeightKind kind = WeightKind::kWindowSym;
  double delta = 0.25;  // kBump12 edge width, in (0,1]
  double N = 10.0;      // window kinds: support scale, N ≥ 1
};

namespace detail {

// C∞ monotone 0→1 transition on [0,1] built from exp(-1/t).
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double g0 = std::exp(-1.0 / x);
  const double g1 = std::exp(-1.0 / (1.0 - x));
  return g0 / (g0 + g1);
}

}  // namespace detail

// Mollified indicator: 1 on an inner plateau, C∞ edges of width `edge`,
// exact support (lo, hi).
class Weight {
 public:
  Weight(WeightSpec spec, double lo, double hi, double edge)
      : spec_(spec), lo_(lo), hi_(hi), edge_(edge) {}

  double operator()(double t) const {
    if (t <= lo_ || t >= hi_) return 0.0;
    return detail::smooth_step((t - lo_) / edge_) * detail::smooth_step((hi_ - t) / edge_);
  }

  const WeightSpec& spec() const { return spec_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double edge() const { return edge_; }

 private:
  WeightSpec spec_;
  double lo_, hi_, edge_;
};

inline Weight make_weight(const WeightSpec& spec) {
  switch (spec.kind) {
    case WeightKind::kBump12:
      if (!(spec.delta > 0.0 && spec.delta <= 1.0))
        throw std::invalid_argument("make_weight: delta outside (0,1]");
      return Weight(spec, 1.0, 2.0, spec.delta);
    case WeightKind::kWindowSym:
      if (!(spec.N >= 1.0)) throw std::invalid_argument("make_weight: N < 1");
      return Weight(spec, -spec.N, spec.N, 2.0 * spec.N / 3.0);
    case WeightKind::kWindowHalf:
      if (!(spec.N >= 1.0)) throw std::invalid_argument("make_weight: N < 1");
      return Weight(spec, 0.5, spec.N, (spec.N - 0.5) / 3.0);
  }
  throw std::invalid_argument("make_weight: unknown kind");
}

// Grid estimate of sup |ψ^(j)| by central finite differences, j ≤ 4.  Records
// the c_j in ‖ψ^(j)‖ ≤ c_j·edge^{-j}; a coarse scan, not a tight assertion.
inline double weight_derivative_sup(const Weight& w, int j, int grid = 10000) {
  if (j < 0 || j > 4) throw std::invalid_argument("weight_derivative_sup: j outside [0,4]");
  const double h = w.edge() / 256.0;
  double sup = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double t = w.lo() + (w.hi() - w.lo()) * static_cast<double>(i) / grid;
    double v = 0.0;
    switch (j) {
      case 0:
        v = w(t);
        break;
      case 1:
        v = (w(t - 2 * h) - 8 * w(t - h) + 8 * w(t + h) - w(t + 2 * h)) / (12 * h);
        break;
      case 2:
        v = (-w(t - 2 * h) + 16 * w(t - h) - 30 * w(t) + 16 * w(t + h) - w(t + 2 * h)) /
            (12 * h * h);
        break;
      case 3:
        v = (-w(t - 3 * h) + 8 * w(t - 2 * h) - 13 * w(t - h) + 13 * w(t + h) - 8 * w(t + 2 * h) +
             w(t + 3 * h)) /
            (8 * h * h * h);
        break;
      case 4:
        v = (-w(t - 3 * h) + 12 * w(t - 2 * h) - 39 * w(t - h) + 56 * w(t) - 39 * w(t + h) +
             12 * w(t + 2 * h) - w(t + 3 * h)) /
            (6 * h * h * h * h);
        break;
    }
    sup = std::max(sup, std::abs(v));
  }
  return sup;
}

// ψ̂(ξ) = ∫ ψ(t) e^{-2πiξt} dt by composite 15-point Gauss-Legendre with
// panels sized to at most half an oscillation at |ξ| ≤ xi_max and at least
// four panels per smooth edge.
class FourierEval {
 public:
  FourierEval(const Weight& w, double xi_max) {
    const double len = w.hi() - w.lo();
    const double cap = std::min(1.0 / (2.0 * std::max(xi_max, 1e-12)), w.edge() / 4.0);
    const std::size_t panels = std::max<std::size_t>(8, static_cast<std::size_t>(len / cap) + 1);
    using G = boost::math::quadrature::gauss<double, 15>;
    const auto& xs = G::abscissa();  // nonnegative half of the nodes
    const auto& ws = G::weights();
    for (std::size_t pnl = 0; pnl < panels; ++pnl) {
      const double a = w.lo() + len * static_cast<double>(pnl) / panels;
      const double b = w.lo() + len * static_cast<double>(pnl + 1) / panels;
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        nodes_.push_back(mid + half * xs[i]);
        scaled_.push_back(half * ws[i] * w(mid + half * xs[i]));
        if (xs[i] != 0.0) {
          nodes_.push_back(mid - half * xs[i]);
          scaled_.push_back(half * ws[i] * w(mid - half * xs[i]));
        }
      }
    }
  }

  std::complex<double> operator()(double xi) const {
    KahanComplex acc;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      acc.add(scaled_[i] * std::polar(1.0, -kTwoPi * xi * nodes_[i]));
    return acc.value();
  }

  // Evaluates ψ̂ on ξ = 0, step, 2·step, … by incremental rotor updates,
  // re-anchored from fresh sin/cos every 1024 steps so drift stays ~1e-13.
  template <class F>
  void march(double step, u64 count, F&& emit) const {
    std::vector<std::complex<double>> rot(nodes_.size()), pw(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      rot[i] = std::polar(1.0, -kTwoPi * step * nodes_[i]);
    for (u64 j = 0; j <= count; ++j) {
      if (j % 1024 == 0)
        for (std::size_t i = 0; i < nodes_.size(); ++i)
          pw[i] = std::polar(1.0, -kTwoPi * (static_cast<double>(j) * step) * nodes_[i]);
      KahanComplex acc;
      for (std::size_t i = 0; i < nodes_.size(); ++i) {
        acc.add(scaled_[i] * pw[i]);
        pw[i] *= rot[i];
      }
      emit(j, acc.value());
    }
  }

  std::size_t nodes() const { return nodes_.size(); }

 private:
  std::vector<double> nodes_, scaled_;  // scaled_ = panel weight × ψ(node)
};

namespace detail {

inline bool is_cube_free(u64 n) { return cube_split(n).second == 1; }

inline void require_coprime(u64 x, u64 y, const char* who) {
  if (std::gcd(x, y) != 1) throw std::invalid_argument(std::string(who) + ": moduli not coprime");
}

inline void require_unit(i64 a, u64 m, const char* who) {
  if (m > 1 && std::gcd(reduce_mod(a, m), m) != 1)
    throw std::invalid_argument(std::string(who) + ": a shares a factor with the modulus");
}

// ∏_{p^k || s} gcd(d, p)^{k/2}; s cube-free so k ≤ 2.
inline double gcd_power_product(u64 s, i64 d) {
  double prod = 1.0;
  const u64 ad = static_cast<u64>(d < 0 ? -d : d);
  for (const auto& [p, k] : factorize(s).factors) {
    const u64 g = std::gcd(ad, p);
    prod *= (k == 1) ? std::sqrt(static_cast<double>(g)) : static_cast<double>(g);
  }
  return prod;
}

}  // namespace detail

// Envelope for the completed four-factor sum over modulus su1u2.
inline double bound_P(u64 s, u64 u1, u64 u2, i64 b1, i64 b2, double N) {
  const i64 bd = b1 - b2;
  const double prod_u = detail::gcd_power_product(u1, bd) * detail::gcd_power_product(u2, bd);
  double prod_s = 1.0;
  const i64 usq = static_cast<i64>(u1) * static_cast<i64>(u1) -
                  static_cast<i64>(u2) * static_cast<i64>(u2);
  for (const auto& [p, k] : factorize(s).factors) {
    const u64 ga = std::gcd(static_cast<u64>(usq < 0 ? -usq : usq), p);
    const u64 gb = std::gcd(static_cast<u64>(bd < 0 ? -bd : bd), p);
    const double half = (k == 1) ? 0.5 : 1.0;
    prod_s *= std::pow(static_cast<double>(ga), half) + std::pow(static_cast<double>(gb), half);
  }
  const double m = static_cast<double>(s) * static_cast<double>(u1) * static_cast<double>(u2);
  return 1.0 + (N / m) * prod_u * prod_s;
}

// Average-discrepancy envelope over square-free moduli.
inline double bound_L(double r, double s, double U, double X) {
  return std::pow(s, 0.125) * std::pow(U, 0.25) * std::pow(X, 0.25) +
         std::pow(r, 0.25) * std::pow(X, 0.25) + std::sqrt(r * s) +
         std::sqrt(r) * std::pow(s, 0.375) * std::pow(U, 0.25);
}

// Square-moduli variant; the trailing U^{o(1)} factor is taken as 1.
inline double bound_M(double r, double s, double U, double X) {
  return std::pow(s, 0.125) * std::pow(U, 0.25) * std::pow(X, 0.25) +
         std::pow(r, 0.25) * std::pow(X, 0.25) + std::sqrt(r * s) * std::pow(U, 0.25) +
         std::sqrt(r) * std::pow(s, 0.375) * std::pow(U, 0.25);
}

struct CompletionSpec {
  u64 s = 1, u1 = 1, u2 = 1;
  i64 a = 1, b1 = 0, b2 = 0;
  double N = 10.0;  // window weight on [-N, N]
};

struct CompletionResult {
  std::complex<double> direct, completed;
  double P_rhs = 0.0;     // (su1u2)^{1/2}·P envelope
  double ratio = 0.0;     // |direct| / P_rhs
  double tail_rel = 0.0;  // relative change from the final cutoff doubling
  u64 h_cutoff = 0;       // final |h| truncation (after doubling)
  bool certified = false;
  double d_factor = 1.0;  // excluded divisor factor d(su1u2)
};

// Σ_n ψ_N(n) ∏_{i,j} Kl2(a(n+b_j); su_i) two ways: the literal n-sum and the
// frequency side (1/m) Σ_h ψ̂(h/m) S(h), m = su1u2, where the cutoff
// |h| ≤ (m/N)·T doubles until one more doubling moves the value < 1e-8
// relative.  S(h) = Σ_{x mod m} e_m(hx) ∏ Kl is cached per residue.
inline CompletionResult poisson_complete(const CompletionSpec& c) {
  detail::require_coprime(c.s, c.u1, "poisson_complete");
  detail::require_coprime(c.s, c.u2, "poisson_complete");
  detail::require_coprime(c.u1, c.u2, "poisson_complete");
  for (const u64 v : {c.s, c.u1, c.u2})
    if (!detail::is_cube_free(v))
      throw std::invalid_argument("poisson_complete: modulus not cube-free");
  const u64 m = c.s * c.u1 * c.u2;
  detail::require_unit(c.a, m, "poisson_complete");
  if (!(c.N >= 1.0)) throw std::invalid_argument("poisson_complete: N < 1");

  const auto t1 = kl_table(c.s * c.u1);
  const auto t2 = kl_table(c.s * c.u2);
  const u64 ar = detail::reduce_mod(c.a, m);
  const u64 rb1 = detail::reduce_mod(c.b1, m), rb2 = detail::reduce_mod(c.b2, m);
  std::vector<std::complex<double>> F(m);
  for (u64 x = 0; x < m; ++x) {
    const u64 t = mulmod(ar, (x + rb1) % m, m);
    const u64 u = mulmod(ar, (x + rb2) % m, m);
    F[x] = t1.values[t % t1.modulus] * t1.values[u % t1.modulus] *
           t2.values[t % t2.modulus] * t2.values[u % t2.modulus];
  }

  CompletionResult out;
  const Weight psi = make_weight({WeightKind::kWindowSym, 0.25, c.N});
  {
    KahanComplex acc;
    const i64 n0 = static_cast<i64>(std::ceil(-c.N)), n1 = static_cast<i64>(std::floor(c.N));
    for (i64 n = n0; n <= n1; ++n)
      acc.add(psi(static_cast<double>(n)) * F[detail::reduce_mod(n, m)]);
    out.direct = acc.value();
  }

  const auto wm = detail::root_table(m);
  std::vector<std::complex<double>> scache(m);
  std::vector<char> sdone(m, 0);
  const auto S = [&](u64 r) {
    if (!sdone[r]) {
      KahanComplex acc;
      for (u64 x = 0; x < m; ++x) acc.add(wm[mulmod(r, x, m)] * F[x]);
      scache[r] = acc.value();
      sdone[r] = 1;
    }
    return scache[r];
  };

  double T = 40.0;
  for (int round = 0; round < 10; ++round) {
    const u64 H1 = static_cast<u64>(std::ceil(static_cast<double>(m) / c.N * T));
    const u64 H2 = 2 * H1;
    const FourierEval psi_hat(psi, static_cast<double>(H2) / static_cast<double>(m));
    KahanComplex acc;
    std::complex<double> at_h1{0.0, 0.0};
    psi_hat.march(1.0 / static_cast<double>(m), H2, [&](u64 h, std::complex<double> fh) {
      if (h == 0) {
        acc.add(fh * S(0));
        return;
      }
      const u64 hm = h % m;
      acc.add(fh * S(hm));
      acc.add(std::conj(fh) * S(hm ? m - hm : 0));
      if (h == H1) at_h1 = acc.value();
    });
    const std::complex<double> c1 = at_h1 / static_cast<double>(m);
    const std::complex<double> c2 = acc.value() / static_cast<double>(m);
    out.tail_rel = std::abs(c2 - c1) / (1.0 + std::abs(c2));
    out.completed = c2;
    out.h_cutoff = H2;
    if (out.tail_rel < 1e-8) {
      out.certified = true;
      break;
    }
    T *= 2.0;
  }
  out.P_rhs = std::sqrt(static_cast<double>(m)) * bound_P(c.s, c.u1, c.u2, c.b1, c.b2, c.N);
  out.ratio = std::abs(out.direct) / out.P_rhs;
  out.d_factor = static_cast<double>(divisor_count(m));
  return out;
}

struct QvdcSpec {
  u64 r = 1, s = 1, u1 = 1, u2 = 1, c = 1;
  i64 a = 1;
  double N = 100.0;  // window weight on [1/2, N]
};

struct QvdcResult {
  std::complex<double> lhs;
  double rhs = 0.0;
  double ratio = 0.0;
  double d_factor = 1.0;  // excluded divisor factor d(rsu1u2)
};

// Σ_{(n,r)=c} ψ_N(n) Kl2(an; rsu1) Kl2(an; rsu2) against the shifted-window
// envelope (cN)^{1/2}((su1u2)^{1/4}(1 + N·Π/(su1u2))^{1/2} + r^{1/2}).
inline QvdcResult qvdc_sum(const QvdcSpec& q) {
  const u64 mods[4] = {q.r, q.s, q.u1, q.u2};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) detail::require_coprime(mods[i], mods[j], "qvdc_sum");
  for (const u64 v : {q.s, q.u1, q.u2})
    if (!detail::is_cube_free(v)) throw std::invalid_argument("qvdc_sum: modulus not cube-free");
  if (q.c == 0 || q.r % q.c != 0) throw std::invalid_argument("qvdc_sum: c does not divide r");
  const u64 full = q.r * q.s * q.u1 * q.u2;
  detail::require_unit(q.a, full, "qvdc_sum");

  QvdcResult out;
  if (q.N >= 1.0) {
    const Weight psi = make_weight({WeightKind::kWindowHalf, 0.25, q.N});
    const u64 nmax = static_cast<u64>(std::floor(q.N));
    const auto k1 = kl2_batch(q.a, q.r * q.s * q.u1, nmax);
    const auto k2 = kl2_batch(q.a, q.r * q.s * q.u2, nmax);
    KahanComplex acc;
    for (u64 n = 1; n <= nmax; ++n)
      if (std::gcd(n, q.r) == q.c)
        acc.add(psi(static_cast<double>(n)) * k1[n - 1].value * k2[n - 1].value);
    out.lhs = acc.value();
  }
  const double su =
      static_cast<double>(q.s) * static_cast<double>(q.u1) * static_cast<double>(q.u2);
  const double gprod = detail::gcd_power_product(
      q.s, static_cast<i64>(q.u1) * static_cast<i64>(q.u1) -
               static_cast<i64>(q.u2) * static_cast<i64>(q.u2));
  out.rhs = std::sqrt(static_cast<double>(q.c) * q.N) *
            (std::pow(su, 0.25) * std::sqrt(1.0 + q.N * gprod / su) +
             std::sqrt(static_cast<double>(q.r)));
  out.ratio = std::abs(out.lhs) / out.rhs;
  out.d_factor = static_cast<double>(divisor_count(full));
  return out;
}

enum class LambdaRule { kDivisor, kOne, kSignedDivisor };

struct BilinearSpec {
  u64 r = 1, s = 1;
  i64 a = 1;
  double U = 4.0;  // u-range (U, 2U]
  u64 N = 20;
  LambdaRule lambda = LambdaRule::kDivisor;
  bool squares = false;  // moduli rsu² with u² ∈ (U, 2U], u square-free
  u64 seed = 1;          // sign pattern for kSignedDivisor
};

struct BilinearResult {
  std::complex<double> lhs;
  double K_rhs = 0.0;          // Σ_{c|r} ‖λ^(c)‖₂ · K, symmetric v1·v2 reading
  double K_rhs_display = 0.0;  // same with the repeated-v1 reading as displayed
  double ratio = 0.0;          // |lhs| / K_rhs
  double d_factor = 1.0;       // excluded divisor factor d(rs)
  u64 support_size = 0;
};

namespace detail {

inline std::vector<double> lambda_coeffs(const BilinearSpec& b);

}  // namespace detail

// Σ_{u ~ U} γ_u Σ_{n ≤ N} λ_n Kl2(an; rsu) with γ = 1 on its support, plus
// both readings of the closed-form envelope (the display repeats the v1
// coefficient where its own proof uses v2; we report both).
inline BilinearResult bilinear_sum(const BilinearSpec& b) {
  detail::require_coprime(b.r, b.s, "bilinear_sum");
  if (!detail::is_cube_free(b.s)) throw std::invalid_argument("bilinear_sum: s not cube-free");
  detail::require_unit(b.a, b.r * b.s, "bilinear_sum");
  if (!(b.U > 0.0) || b.N == 0) throw std::invalid_argument("bilinear_sum: empty ranges");

  // Support: elements w ∈ (U, 2U] with γ_w = 1.  The squares flag keeps
  // w = root² for square-free roots; otherwise w itself must be square-free.
  const u64 amod = static_cast<u64>(b.a < 0 ? -b.a : b.a);
  std::vector<u64> support;
  const u64 hi = static_cast<u64>(std::floor(2.0 * b.U));
  if (b.squares) {
    for (u64 root = 1; root * root <= hi; ++root) {
      const u64 w = root * root;
      if (static_cast<double>(w) > b.U && is_squarefree(root) &&
          std::gcd(root, amod * b.r * b.s) == 1)
        support.push_back(w);
    }
  } else {
    for (u64 u = static_cast<u64>(std::floor(b.U)) + 1; u <= hi; ++u)
      if (static_cast<double>(u) > b.U && is_squarefree(u) &&
          std::gcd(u, amod * b.r * b.s) == 1)
        support.push_back(u);
  }

  const auto lam = detail::lambda_coeffs(b);
  BilinearResult out;
  out.support_size = support.size();
  KahanComplex acc;
  for (const u64 w : support) {
    const auto kl = kl2_batch(b.a, b.r * b.s * w, b.N);
    for (u64 n = 1; n <= b.N; ++n) acc.add(lam[n] * kl[n - 1].value);
  }
  out.lhs = acc.value();

  // K envelope with γ̃_w = γ_w·d(w) (divisor exponent 1).
  const std::set<u64> in_support(support.begin(), support.end());
  double l1 = 0.0;
  for (const u64 w : support) l1 += static_cast<double>(divisor_count(w));
  const double term1 = std::pow(static_cast<double>(b.N), 0.25) * l1 *
                       (std::pow(static_cast<double>(b.s), 0.125) * std::pow(b.U, 0.25) +
                        std::pow(static_cast<double>(b.r), 0.25));
  double inner_sym = 0.0, inner_lit = 0.0;
  for (u64 u0 = 1; static_cast<double>(u0) <= b.U; ++u0) {
    const double vlo = b.U / static_cast<double>(u0), vhi = 2.0 * b.U / static_cast<double>(u0);
    const u64 v_hi = static_cast<u64>(std::floor(vhi));
    for (u64 v1 = static_cast<u64>(std::floor(vlo)) + 1; v1 <= v_hi; ++v1) {
      if (!(static_cast<double>(v1) > vlo) || !in_support.count(u0 * v1)) continue;
      const double g1 = static_cast<double>(divisor_count(u0 * v1));
      for (u64 v2 = static_cast<u64>(std::floor(vlo)) + 1; v2 <= v_hi; ++v2) {
        if (!(static_cast<double>(v2) > vlo) || std::gcd(v1, v2) != 1) continue;
        double gp = 1.0;
        const i64 vd = static_cast<i64>(v1) * static_cast<i64>(v1) -
                       static_cast<i64>(v2) * static_cast<i64>(v2);
        for (const auto& [p, k] : factorize(b.s * u0).factors)
          gp *= std::pow(static_cast<double>(std::gcd(static_cast<u64>(vd < 0 ? -vd : vd), p)),
                         0.25 * static_cast<double>(k));
        const double q = gp / std::pow(static_cast<double>(b.s) * static_cast<double>(u0) *
                                           static_cast<double>(v1) * static_cast<double>(v2),
                                       0.25);
        inner_lit += g1 * g1 * q;  // the display's |γ̃_{u0v1}|² leaves v2 free
        if (in_support.count(u0 * v2))
          inner_sym += g1 * static_cast<double>(divisor_count(u0 * v2)) * q;
      }
    }
  }
  const double K_sym = term1 + std::sqrt(static_cast<double>(b.N)) * std::sqrt(inner_sym);
  const double K_lit = term1 + std::sqrt(static_cast<double>(b.N)) * std::sqrt(inner_lit);
  double lnorms = 0.0;
  for (u64 c = 1; c <= b.r; ++c) {
    if (b.r % c != 0) continue;
    double ss = 0.0;
    for (u64 n = c; n <= b.N; n += c) ss += lam[n] * lam[n];
    lnorms += std::pow(static_cast<double>(c), 0.25) * std::sqrt(ss);
  }
  out.K_rhs = lnorms * K_sym;
  out.K_rhs_display = lnorms * K_lit;
  out.ratio = out.K_rhs > 0.0 ? std::abs(out.lhs) / out.K_rhs : 0.0;
  out.d_factor = static_cast<double>(divisor_count(b.r * b.s));
  return out;
}

namespace detail {

inline std::vector<double> lambda_coeffs(const BilinearSpec& b) {
  std::vector<double> lam(b.N + 1, 0.0);
  if (b.lambda == LambdaRule::kOne) {
    for (u64 n = 1; n <= b.N; ++n) lam[n] = 1.0;
    return lam;
  }
  const auto d = divisor_sieve(1, b.N);
  std::mt19937_64 rng(b.seed);
  for (u64 n = 1; n <= b.N; ++n) {
    lam[n] = static_cast<double>(d.at(n));
    if (b.lambda == LambdaRule::kSignedDivisor && (rng() & 1)) lam[n] = -lam[n];
  }
  return lam;
}

}  // namespace detail

}  // namespace klsum

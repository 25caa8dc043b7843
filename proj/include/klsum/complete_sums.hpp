#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "klsum/arith.hpp"
#include "klsum/compensated.hpp"
#include "klsum/kloosterman.hpp"

// Complete correlation sums of Kloosterman sums against additive characters:
//   mod p:  Σ_{x ∈ F_p} e_p(xh) ∏_i Kl2(γ_i.x; p)   (γ_i Möbius, poles skipped)
//   mod p²: Σ_{x mod p²} e_{p²}(xh) ∏ Kl2(a_i(x+b_j); p²)
// plus the 5-variable solution-counting system that bounds the p² sums.
//
// The p² evaluator uses the exact stationary-phase parametrization: writing
// x = x₀ + pz, each factor collapses onto ≤2 critical points y with
// (y^{-1} mod p)² ≡ a_i(x₀+b_j), and the z-sum forces
// h + Σ a_i y_ij ≡ 0 (mod p), leaving
//   S = p · Σ_{x₀} Σ_{admissible y-tuples} e_{p²}(x₀h + Σ [a_i(x₀+b_j)y + ȳ])
// with ȳ the inverse mod p².  |S| ≤ p·(number of admissible tuples) is exact.
// The literal x-sum is kept as corr_sum_p2_direct and the tests hold the two
// routes together.

namespace klsum {

struct MobiusMap {
  i64 a = 1, b = 0, c = 0, d = 1;  // x ↦ (ax+b)/(cx+d)
};

struct CorrelationSpec {
  u64 p = 3;
  u32 k = 1;  // modulus p^k, k ∈ {1,2}
  i64 h = 0;
  std::vector<MobiusMap> factors;  // k = 1 only
  // k = 2 shape: factors a_i(x+b_j); two-factor uses a1 with both shifts,
  // four-factor uses the (i,j) grid in the order (1,1),(2,1),(1,2),(2,2).
  bool four_factor = false;
  i64 a1 = 1, a2 = 1, b1 = 0, b2 = 0;
};

inline CorrelationSpec spec_mod_p(u64 p, i64 h, std::vector<MobiusMap> maps) {
  CorrelationSpec s;
  s.p = p;
  s.k = 1;
  s.h = h;
  s.factors = std::move(maps);
  return s;
}

inline CorrelationSpec spec_p2_two_factor(u64 p, i64 h, i64 a1, i64 b1, i64 b2) {
  CorrelationSpec s;
  s.p = p;
  s.k = 2;
  s.h = h;
  s.four_factor = false;
  s.a1 = s.a2 = a1;
  s.b1 = b1;
  s.b2 = b2;
  return s;
}

inline CorrelationSpec spec_p2_four_factor(u64 p, i64 h, i64 a1, i64 a2, i64 b1, i64 b2) {
  CorrelationSpec s;
  s.p = p;
  s.k = 2;
  s.h = h;
  s.four_factor = true;
  s.a1 = a1;
  s.a2 = a2;
  s.b1 = b1;
  s.b2 = b2;
  return s;
}

struct CorrelationValue {
  std::complex<double> value;
  CorrelationSpec spec;
  double bound_rhs = 0.0;
  double ratio = 0.0;  // |value| / bound_rhs
};

namespace detail {

inline void require_prime(u64 p, const char* who) {
  if (!is_prime(p)) throw std::invalid_argument(std::string(who) + ": p not prime");
}

inline u64 gcd3(i64 x, i64 y, u64 p) {
  const u64 g = std::gcd(static_cast<u64>(x < 0 ? -x : x), static_cast<u64>(y < 0 ? -y : y));
  return std::gcd(g, p);  // gcd(0,0,p) = p
}

// factor list in linear-condition order: (a1,b1),(a2,b1),(a1,b2),(a2,b2)
inline std::vector<std::pair<u64, u64>> p2_factor_list(const CorrelationSpec& s) {
  const u64 p2 = s.p * s.p;
  const u64 a1 = reduce_mod(s.a1, p2), a2 = reduce_mod(s.a2, p2);
  const u64 b1 = reduce_mod(s.b1, p2), b2 = reduce_mod(s.b2, p2);
  if (s.four_factor) return {{a1, b1}, {a2, b1}, {a1, b2}, {a2, b2}};
  return {{a1, b1}, {a1, b2}};
}

inline void require_p2_spec(const CorrelationSpec& s, const char* who) {
  require_prime(s.p, who);
  if (s.k != 2) throw std::invalid_argument(std::string(who) + ": k must be 2");
  const u64 a1 = reduce_mod(s.a1, s.p), a2 = reduce_mod(s.a2, s.p);
  if (a1 == 0 || (s.four_factor && a2 == 0))
    throw std::invalid_argument(std::string(who) + ": p divides a factor multiplier");
}

inline double p2_bound_rhs(const CorrelationSpec& s) {
  const double p = static_cast<double>(s.p);
  const u64 gb = gcd3(s.h, s.b1 - s.b2, s.p);
  if (!s.four_factor) return p * static_cast<double>(gb);
  const u64 ga = gcd3(s.h, s.a1 * s.a1 - s.a2 * s.a2, s.p);
  return p * static_cast<double>(ga + gb);
}

}  // namespace detail

// Σ_{x ∈ F_p, all γ_i.x defined} e_p(xh) ∏_i Kl2(γ_i.x; p)
inline CorrelationValue corr_sum_p(const CorrelationSpec& s) {
  detail::require_prime(s.p, "corr_sum_p");
  if (s.k != 1) throw std::invalid_argument("corr_sum_p: k must be 1");
  if (s.factors.empty()) throw std::invalid_argument("corr_sum_p: no factors");
  const u64 p = s.p;
  struct Reduced {
    u64 a, b, c, d;
  };
  std::vector<Reduced> maps;
  for (const auto& g : s.factors) {
    const Reduced r{detail::reduce_mod(g.a, p), detail::reduce_mod(g.b, p),
                    detail::reduce_mod(g.c, p), detail::reduce_mod(g.d, p)};
    if ((mulmod(r.a, r.d, p) + p - mulmod(r.b, r.c, p)) % p == 0)
      throw std::invalid_argument("corr_sum_p: degenerate factor map");
    maps.push_back(r);
  }
  const auto klt = kl_table(p);
  const auto w = detail::root_table(p);
  const u64 hr = detail::reduce_mod(s.h, p);
  KahanComplex acc;
  for (u64 x = 0; x < p; ++x) {
    std::complex<double> term = w[mulmod(x, hr, p)];
    bool defined = true;
    for (const auto& m : maps) {
      const u64 den = (mulmod(m.c, x, p) + m.d) % p;
      if (den == 0) {
        defined = false;
        break;
      }
      const u64 num = (mulmod(m.a, x, p) + m.b) % p;
      term *= klt.values[mulmod(num, mod_inv(static_cast<i64>(den), p), p)];
    }
    if (defined) acc.add(term);
  }
  CorrelationValue out;
  out.value = acc.value();
  out.spec = s;
  out.bound_rhs = std::sqrt(static_cast<double>(p));
  out.ratio = std::abs(out.value) / out.bound_rhs;
  return out;
}

// Exact stationary-phase evaluation of the p² correlation sum, O(p) per spec.
inline CorrelationValue corr_sum_p2(const CorrelationSpec& s) {
  detail::require_p2_spec(s, "corr_sum_p2");
  const u64 p = s.p, p2 = p * p;
  const auto factors = detail::p2_factor_list(s);
  const std::size_t F = factors.size();
  const u64 hr = detail::reduce_mod(s.h, p2);
  const u64 hp = hr % p;
  // root lookup: sqrtp[r] = the two square roots of r mod p (if any)
  std::vector<std::array<u64, 2>> sqrtp(p);
  std::vector<bool> has_root(p, false);
  for (u64 r = 0; r < p; ++r) {
    const auto roots = sqrt_mod_p(r, p);
    if (r != 0 && !roots.empty()) {
      sqrtp[r] = {roots[0], roots[1]};
      has_root[r] = true;
    }
  }
  std::vector<u64> invp(p, 0), invp2(p, 0);
  for (u64 y = 1; y < p; ++y) {
    invp[y] = mod_inv(static_cast<i64>(y), p);
    invp2[y] = mod_inv(static_cast<i64>(y), p2);
  }
  KahanComplex acc;
  std::vector<std::array<u64, 2>> cand(F);  // the two y-candidates per factor
  std::vector<u64> tfull(F);                // a_i(x₀+b_j) mod p²
  for (u64 x0 = 0; x0 < p; ++x0) {
    bool alive = true;
    for (std::size_t f = 0; f < F; ++f) {
      const u64 t2 = mulmod(factors[f].first, (x0 + factors[f].second) % p2, p2);
      const u64 tp = t2 % p;
      if (tp == 0 || !has_root[tp]) {
        alive = false;
        break;
      }
      tfull[f] = t2;
      // ȳ ≡ ±s (mod p) with s² ≡ t ⟺ y ≡ (±s)^{-1} (mod p)
      cand[f] = {invp[sqrtp[tp][0]], invp[sqrtp[tp][1]]};
    }
    if (!alive) continue;
    const u64 x0h = mulmod(x0, hr, p2);
    for (u64 mask = 0; mask < (u64{1} << F); ++mask) {
      u64 lin = hp;  // h + Σ a_i y_ij mod p
      u64 phase = x0h;
      for (std::size_t f = 0; f < F; ++f) {
        const u64 y = cand[f][(mask >> f) & 1];
        lin = (lin + mulmod(factors[f].first % p, y, p)) % p;
        phase = (phase + mulmod(tfull[f], y, p2) + invp2[y]) % p2;
      }
      if (lin == 0) acc.add(unit_root(phase, p2));
    }
  }
  CorrelationValue out;
  out.value = static_cast<double>(p) * acc.value();
  out.spec = s;
  out.bound_rhs = detail::p2_bound_rhs(s);
  out.ratio = std::abs(out.value) / out.bound_rhs;
  return out;
}

// Literal Σ over x mod p² with a dense Kl table: the oracle route.
inline CorrelationValue corr_sum_p2_direct(const CorrelationSpec& s) {
  detail::require_p2_spec(s, "corr_sum_p2_direct");
  const u64 p = s.p, p2 = p * p;
  const auto factors = detail::p2_factor_list(s);
  const auto klt = kl_table(p2);
  const u64 hr = detail::reduce_mod(s.h, p2);
  KahanComplex acc;
  for (u64 x = 0; x < p2; ++x) {
    std::complex<double> term = unit_root(mulmod(x, hr, p2), p2);
    for (const auto& [a, b] : factors) term *= klt.values[mulmod(a, (x + b) % p2, p2)];
    acc.add(term);
  }
  CorrelationValue out;
  out.value = acc.value();
  out.spec = s;
  out.bound_rhs = detail::p2_bound_rhs(s);
  out.ratio = std::abs(out.value) / out.bound_rhs;
  return out;
}

// #{(y,y₁..y₄) ∈ (Z/p)⁵ : (y_f^{-1})² ≡ a_i(y+b_j) for the four (i,j) factors
// and h + a₁y₁ + a₂y₂ + a₁y₃ + a₂y₄ ≡ 0}, by literal 5-loop enumeration.
inline u64 count_solution_system(const CorrelationSpec& s) {
  detail::require_p2_spec(s, "count_solution_system");
  if (!s.four_factor) throw std::invalid_argument("count_solution_system: four-factor shape required");
  const u64 p = s.p;
  const u64 a1 = detail::reduce_mod(s.a1, p), a2 = detail::reduce_mod(s.a2, p);
  const u64 b1 = detail::reduce_mod(s.b1, p), b2 = detail::reduce_mod(s.b2, p);
  const u64 hp = detail::reduce_mod(s.h, p);
  std::vector<u64> invp(p, 0);
  for (u64 y = 1; y < p; ++y) invp[y] = mod_inv(static_cast<i64>(y), p);
  const std::array<u64, 4> fa{a1, a2, a1, a2};
  const std::array<u64, 4> fb{b1, b1, b2, b2};
  u64 count = 0;
  std::array<u64, 4> rhs{};
  for (u64 y = 0; y < p; ++y) {
    for (int f = 0; f < 4; ++f) rhs[f] = mulmod(fa[f], (y + fb[f]) % p, p);
    for (u64 y1 = 1; y1 < p; ++y1) {
      if (mulmod(invp[y1], invp[y1], p) != rhs[0]) continue;
      for (u64 y2 = 1; y2 < p; ++y2) {
        if (mulmod(invp[y2], invp[y2], p) != rhs[1]) continue;
        for (u64 y3 = 1; y3 < p; ++y3) {
          if (mulmod(invp[y3], invp[y3], p) != rhs[2]) continue;
          for (u64 y4 = 1; y4 < p; ++y4) {
            if (mulmod(invp[y4], invp[y4], p) != rhs[3]) continue;
            if ((hp + mulmod(a1, y1, p) + mulmod(a2, y2, p) + mulmod(a1, y3, p) +
                 mulmod(a2, y4, p)) %
                    p ==
                0)
              ++count;
          }
        }
      }
    }
  }
  return count;
}

// Same count through the ≤16-candidate parametrization; the tests pin this to
// count_solution_system before the sweeps rely on it.
inline u64 count_solution_fast(const CorrelationSpec& s) {
  detail::require_p2_spec(s, "count_solution_fast");
  if (!s.four_factor) throw std::invalid_argument("count_solution_fast: four-factor shape required");
  const u64 p = s.p;
  const u64 a1 = detail::reduce_mod(s.a1, p), a2 = detail::reduce_mod(s.a2, p);
  const u64 b1 = detail::reduce_mod(s.b1, p), b2 = detail::reduce_mod(s.b2, p);
  const u64 hp = detail::reduce_mod(s.h, p);
  std::vector<std::array<u64, 2>> sqrtp(p);
  std::vector<bool> has_root(p, false);
  for (u64 r = 1; r < p; ++r) {
    const auto roots = sqrt_mod_p(r, p);
    if (!roots.empty()) {
      sqrtp[r] = {roots[0], roots[1]};
      has_root[r] = true;
    }
  }
  std::vector<u64> invp(p, 0);
  for (u64 y = 1; y < p; ++y) invp[y] = mod_inv(static_cast<i64>(y), p);
  const std::array<u64, 4> fa{a1, a2, a1, a2};
  const std::array<u64, 4> fb{b1, b1, b2, b2};
  u64 count = 0;
  std::array<std::array<u64, 2>, 4> cand{};
  for (u64 y = 0; y < p; ++y) {
    bool alive = true;
    for (int f = 0; f < 4 && alive; ++f) {
      const u64 t = mulmod(fa[f], (y + fb[f]) % p, p);
      if (t == 0 || !has_root[t])
        alive = false;
      else
        cand[f] = {invp[sqrtp[t][0]], invp[sqrtp[t][1]]};
    }
    if (!alive) continue;
    for (u64 mask = 0; mask < 16; ++mask) {
      u64 lin = hp;
      for (int f = 0; f < 4; ++f) lin = (lin + mulmod(fa[f], cand[f][(mask >> f) & 1], p)) % p;
      if (lin == 0) ++count;
    }
  }
  return count;
}

// Plancherel: Σ_{h mod p^k} |S(h)|² against p^k · Σ_x |∏ Kl2|².
inline std::pair<double, double> parseval_check(const CorrelationSpec& s) {
  const u64 m = s.k == 1 ? s.p : s.p * s.p;
  // F[x] = ∏ Kl2(...) with zeros at skipped points
  std::vector<std::complex<double>> F(m, {0.0, 0.0});
  CorrelationSpec base = s;
  base.h = 0;
  if (s.k == 1) {
    detail::require_prime(s.p, "parseval_check");
    const auto klt = kl_table(s.p);
    for (u64 x = 0; x < m; ++x) {
      std::complex<double> term{1.0, 0.0};
      bool defined = true;
      for (const auto& g : s.factors) {
        const u64 den = (mulmod(detail::reduce_mod(g.c, s.p), x, s.p) + detail::reduce_mod(g.d, s.p)) % s.p;
        if (den == 0) {
          defined = false;
          break;
        }
        const u64 num = (mulmod(detail::reduce_mod(g.a, s.p), x, s.p) + detail::reduce_mod(g.b, s.p)) % s.p;
        term *= klt.values[mulmod(num, mod_inv(static_cast<i64>(den), s.p), s.p)];
      }
      if (defined) F[x] = term;
    }
  } else {
    detail::require_p2_spec(s, "parseval_check");
    const auto klt = kl_table(m);
    const auto factors = detail::p2_factor_list(s);
    for (u64 x = 0; x < m; ++x) {
      std::complex<double> term{1.0, 0.0};
      for (const auto& [a, b] : factors) term *= klt.values[mulmod(a, (x + b) % m, m)];
      F[x] = term;
    }
  }
  const auto w = detail::root_table(m);
  Kahan lhs;
  for (u64 h = 0; h < m; ++h) {
    KahanComplex sh;
    for (u64 x = 0; x < m; ++x) sh.add(w[mulmod(x, h, m)] * F[x]);
    lhs.add(std::norm(sh.value()));
  }
  Kahan power;
  for (u64 x = 0; x < m; ++x) power.add(std::norm(F[x]));
  return {lhs.value(), static_cast<double>(m) * power.value()};
}

// Canonical PGL₂(F_p) class key: scale so the first nonzero entry of
// (a,b,c,d) is 1; used for multiplicity counting in the mod-p hypothesis.
inline u64 mobius_class_key(const MobiusMap& g, u64 p) {
  std::array<u64, 4> v{detail::reduce_mod(g.a, p), detail::reduce_mod(g.b, p),
                       detail::reduce_mod(g.c, p), detail::reduce_mod(g.d, p)};
  for (u64 e : v) {
    if (e != 0) {
      const u64 inv = mod_inv(static_cast<i64>(e), p);
      for (auto& x : v) x = mulmod(x, inv, p);
      break;
    }
  }
  return ((v[0] * p + v[1]) * p + v[2]) * p + v[3];
}

// "h ≠ 0 or some γ appears with odd multiplicity" (multiplicity in PGL₂)
inline bool lemma_hypothesis_mod_p(const CorrelationSpec& s) {
  if (detail::reduce_mod(s.h, s.p) != 0) return true;
  std::vector<u64> keys;
  for (const auto& g : s.factors) keys.push_back(mobius_class_key(g, s.p));
  for (u64 k : keys) {
    u64 mult = 0;
    for (u64 k2 : keys) mult += k2 == k;
    if (mult % 2 == 1) return true;
  }
  return false;
}

}  // namespace klsum

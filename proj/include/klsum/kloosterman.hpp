#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "klsum/arith.hpp"
#include "klsum/compensated.hpp"

// Normalized Kloosterman sums Kl2(a;q) = q^{-1/2} Σ_{x mod q, unit} e_q(ax + x̄)
// for arbitrary positive moduli.  Three routes, cross-checked in the tests:
//   * literal unit sum (kl2_direct),
//   * stationary-phase closed form at odd p² with unit argument (kl2_p2_closed),
//   * factored evaluation combined over coprime parts (kl2, kl2_batch, kl_table)
//     through Kl2(a;rs) = Kl2(r̄²a;s)·Kl2(s̄²a;r).
// The factored paths reuse the exact same per-factor evaluators and fold
// factors in ascending-prime order, so scalar, batch and table values agree
// bit for bit.

namespace klsum {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;
inline constexpr u64 kKlDirectBudget = 10'000'000;

struct KlValue {
  std::complex<double> value;
  u64 modulus = 1;
  i64 argument = 0;  // reduced to [0, modulus)
};

inline std::complex<double> unit_root(u64 t, u64 m) {
  return std::polar(1.0, kTwoPi * (static_cast<double>(t % m) / static_cast<double>(m)));
}

namespace detail {

inline u64 reduce_mod(i64 a, u64 m) {
  i64 r = a % static_cast<i64>(m);
  if (r < 0) r += static_cast<i64>(m);
  return static_cast<u64>(r);
}

// Unit inverses by Montgomery batch inversion; non-units hold 0 (no unit has
// inverse 0 when m > 1, so 0 doubles as the miss marker).
inline std::vector<u64> inverse_table(u64 m) {
  std::vector<u64> inv(m, 0);
  if (m == 1) return inv;
  std::vector<u64> units, prefix;
  units.reserve(m);
  prefix.reserve(m);
  u64 acc = 1;
  for (u64 x = 1; x < m; ++x) {
    if (std::gcd(x, m) == 1) {
      units.push_back(x);
      acc = mulmod(acc, x, m);
      prefix.push_back(acc);
    }
  }
  u64 inv_acc = mod_inv(static_cast<i64>(acc), m);
  for (std::size_t i = units.size(); i-- > 0;) {
    inv[units[i]] = mulmod(inv_acc, i ? prefix[i - 1] : 1, m);
    inv_acc = mulmod(inv_acc, units[i], m);
  }
  return inv;
}

inline std::vector<std::complex<double>> root_table(u64 m) {
  std::vector<std::complex<double>> w(m);
  for (u64 t = 0; t < m; ++t) w[t] = unit_root(t, m);
  return w;
}

inline constexpr u64 kTableCap = u64{1} << 16;

// Σ_{x unit mod m} e_m(ax + x̄), compensated, ascending x.  The tabled and
// untabled paths perform identical floating-point operations.
inline std::complex<double> unit_sum_tabled(u64 a, u64 m, const std::vector<u64>& inv,
                                            const std::vector<std::complex<double>>& w) {
  KahanComplex acc;
  u64 t = 0;
  for (u64 x = 1; x < m; ++x) {
    t += a;
    if (t >= m) t -= m;
    const u64 xbar = inv[x];
    if (xbar == 0) continue;  // non-unit (for m > 1 no unit inverts to 0)
    u64 idx = t + xbar;
    if (idx >= m) idx -= m;
    acc.add(w[idx]);
  }
  return acc.value();
}

inline std::complex<double> unit_sum(u64 a, u64 m) {
  if (m == 1) return {1.0, 0.0};
  a %= m;
  if (m <= kTableCap) return unit_sum_tabled(a, m, inverse_table(m), root_table(m));
  KahanComplex acc;
  u64 t = 0;
  for (u64 x = 1; x < m; ++x) {
    t += a;
    if (t >= m) t -= m;
    if (std::gcd(x, m) != 1) continue;
    u64 idx = t + mod_inv(static_cast<i64>(x), m);
    if (idx >= m) idx -= m;
    acc.add(unit_root(idx, m));
  }
  return acc.value();
}

}  // namespace detail

inline KlValue kl2_direct(i64 a, u64 q, u64 budget = kKlDirectBudget) {
  if (q == 0) throw std::invalid_argument("kl2_direct: q = 0");
  if (q > budget) throw std::length_error("kl2_direct: q over direct budget, use kl2");
  const u64 ar = detail::reduce_mod(a, q);
  return {detail::unit_sum(ar, q) / std::sqrt(static_cast<double>(q)), q,
          static_cast<i64>(ar)};
}

// Kl2(a;p²) = Σ_{ℓ mod p², ℓ² ≡ a} e_{p²}(2ℓ): the p-term stationary blocks
// of the unit sum cancel except at the critical points, and the normalization
// p cancels the block count.  Roots come in a ± pair, so the value is exactly
// real: 2cos(4πℓ/p²), or 0 when a is a non-residue.
inline KlValue kl2_p2_closed(i64 a, u64 p) {
  if (p == 2) throw std::invalid_argument("kl2_p2_closed: p = 2");
  if (!is_prime(p)) throw std::invalid_argument("kl2_p2_closed: p not prime");
  const u64 p2 = p * p;
  const u64 ar = detail::reduce_mod(a, p2);
  if (ar % p == 0) throw std::invalid_argument("kl2_p2_closed: p | a");
  double v = 0.0;
  const auto roots = sqrt_mod_p2(ar, p);
  if (!roots.empty())
    v = 2.0 * std::cos(kTwoPi * (static_cast<double>(2 * roots[0] % p2) / static_cast<double>(p2)));
  return {{v, 0.0}, p2, static_cast<i64>(ar)};
}

namespace detail {

struct PrimePowerFactor {
  u64 p, pk;
  u32 e;
  u64 twist;  // ((q/pk)^{-1} mod pk)², the argument multiplier for this factor
};

inline std::vector<PrimePowerFactor> twist_factors(u64 q, u64 budget) {
  std::vector<PrimePowerFactor> out;
  for (auto [p, e] : factorize(q).factors) {
    u64 pk = 1;
    for (u32 i = 0; i < e; ++i) pk *= p;
    const bool closed = e == 2 && p != 2;  // closed form may still apply per argument
    if (pk > budget && !closed)
      throw std::length_error("kl2: unsupported modulus (prime-power factor over direct budget)");
    const u64 minv = mod_inv(static_cast<i64>((q / pk) % pk), pk);
    out.push_back({p, pk, e, mulmod(minv, minv, pk)});
  }
  return out;
}

// Per-factor evaluator shared by the scalar, batch and table paths.
inline std::complex<double> factor_value(const PrimePowerFactor& f, u64 residue, u64 budget) {
  if (f.e == 2 && f.p != 2 && residue % f.p != 0) return kl2_p2_closed(static_cast<i64>(residue), f.p).value;
  if (f.pk > budget)
    throw std::length_error("kl2: unsupported modulus (prime-power factor over direct budget)");
  return kl2_direct(static_cast<i64>(residue), f.pk, budget).value;
}

}  // namespace detail

inline KlValue kl2(i64 a, u64 q, u64 budget = kKlDirectBudget) {
  if (q == 0) throw std::invalid_argument("kl2: q = 0");
  const u64 ar = detail::reduce_mod(a, q);
  std::complex<double> prod{1.0, 0.0};
  for (const auto& f : detail::twist_factors(q, budget))
    prod *= detail::factor_value(f, mulmod(f.twist, ar % f.pk, f.pk), budget);
  return {prod, q, static_cast<i64>(ar)};
}

struct KlTable {
  u64 modulus = 1;
  std::vector<std::complex<double>> values;  // index = residue of the argument

  const std::complex<double>& at(u64 r) const { return values[r % modulus]; }
};

// All of Kl2(·;q) at once: one table per prime-power factor (the direct
// factors amortize their inverse/root tables), folded by the twist rule.
inline KlTable kl_table(u64 q, u64 budget = kKlDirectBudget) {
  if (q == 0) throw std::invalid_argument("kl_table: q = 0");
  if (q > 2'000'000) throw std::length_error("kl_table: modulus too large for a dense table");
  KlTable t;
  t.modulus = q;
  t.values.assign(q, {1.0, 0.0});
  for (const auto& f : detail::twist_factors(q, budget)) {
    std::vector<std::complex<double>> ft(f.pk);
    if (f.e == 2 && f.p != 2) {
      for (u64 r = 0; r < f.pk; ++r) ft[r] = detail::factor_value(f, r, budget);
    } else {
      const auto inv = detail::inverse_table(f.pk);
      const auto w = detail::root_table(f.pk);
      const double norm = std::sqrt(static_cast<double>(f.pk));
      for (u64 r = 0; r < f.pk; ++r) ft[r] = detail::unit_sum_tabled(r, f.pk, inv, w) / norm;
    }
    for (u64 r = 0; r < q; ++r) t.values[r] *= ft[mulmod(f.twist, r % f.pk, f.pk)];
  }
  return t;
}

inline std::vector<KlValue> kl2_batch(i64 a, u64 q, u64 N, u64 budget = kKlDirectBudget) {
  if (q == 0) throw std::invalid_argument("kl2_batch: q = 0");
  std::vector<KlValue> out;
  out.reserve(N);
  const u64 ar = detail::reduce_mod(a, q);
  if (q <= 2'000'000) {
    const auto t = kl_table(q, budget);
    u64 idx = 0;
    for (u64 n = 1; n <= N; ++n) {
      idx += ar;
      if (idx >= q) idx -= q;
      out.push_back({t.values[idx], q, static_cast<i64>(idx)});
    }
  } else {
    u64 idx = 0;
    for (u64 n = 1; n <= N; ++n) {
      idx += ar;
      if (idx >= q) idx -= q;
      out.push_back(kl2(static_cast<i64>(idx), q, budget));
    }
  }
  return out;
}

}  // namespace klsum

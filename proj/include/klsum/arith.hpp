#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

// Exact integer and modular arithmetic kernels: factorization, divisor
// sieves, modular inverses/square roots, CRT.  Everything here is a pure
// function of its inputs; 128-bit intermediates keep products exact.

namespace klsum {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using u32 = std::uint32_t;
using i128 = __int128;
using u128 = unsigned __int128;

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(u128(a) * b % m); }

inline u64 powmod(u64 a, u64 e, u64 m) {
  if (m == 1) return 0;
  u64 r = 1;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

inline u64 isqrt(u64 n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && u128(r) * r > n) --r;
  while (u128(r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Deterministic Miller-Rabin; the 12-base certificate covers all 64-bit n.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) d >>= 1, ++s;
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 0; i + 1 < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

inline const std::vector<u32>& small_primes() {
  static const std::vector<u32> primes = [] {
    const u32 limit = 1'000'000;
    std::vector<bool> comp(limit + 1, false);
    std::vector<u32> out;
    for (u32 i = 2; i <= limit; ++i) {
      if (!comp[i]) {
        out.push_back(i);
        for (u64 j = u64(i) * i; j <= limit; j += i) comp[j] = true;
      }
    }
    return out;
  }();
  return primes;
}

namespace detail {

inline u64 rho_step(u64 x, u64 c, u64 n) { return static_cast<u64>((u128(x) * x + c) % n); }

// Brent cycle detection with deterministic polynomial constants c = 1,2,3,...
// Caller guarantees n composite with no factor below 10^6.
inline u64 pollard_brent(u64 n) {
  for (u64 c = 1;; ++c) {
    u64 y = 2, r = 1, q = 1, g = 1, x = 0, ys = 0;
    const u64 m = 128;
    do {
      x = y;
      for (u64 i = 0; i < r; ++i) y = rho_step(y, c, n);
      for (u64 k = 0; k < r && g == 1; k += m) {
        ys = y;
        const u64 lim = std::min(m, r - k);
        for (u64 i = 0; i < lim; ++i) {
          y = rho_step(y, c, n);
          const u64 diff = x > y ? x - y : y - x;
          q = mulmod(q, diff ? diff : 1, n);
        }
        g = std::gcd(q, n);
      }
      r <<= 1;
    } while (g == 1);
    if (g == n) {
      g = 1;
      do {
        ys = rho_step(ys, c, n);
        const u64 diff = x > ys ? x - ys : ys - x;
        g = std::gcd(diff ? diff : 1, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

inline void split_into_primes(u64 n, std::vector<u64>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  const u64 d = pollard_brent(n);
  split_into_primes(d, out);
  split_into_primes(n / d, out);
}

}  // namespace detail

struct Factorization {
  u64 value = 1;
  std::vector<std::pair<u64, u32>> factors;  // (prime, exponent), primes increasing
};

inline Factorization factorize(u64 n) {
  if (n == 0) throw std::invalid_argument("factorize: n = 0");
  Factorization f;
  f.value = n;
  u64 rem = n;
  for (u32 p : small_primes()) {
    if (u64(p) * p > rem) break;
    if (rem % p == 0) {
      u32 e = 0;
      while (rem % p == 0) rem /= p, ++e;
      f.factors.emplace_back(p, e);
    }
  }
  if (rem > 1) {
    if (rem <= u64(1'000'000) * 1'000'000 || is_prime(rem)) {
      // no factor below 10^6 and rem <= 10^12 forces rem prime
      f.factors.emplace_back(rem, 1);
    } else {
      std::vector<u64> ps;
      detail::split_into_primes(rem, ps);
      std::sort(ps.begin(), ps.end());
      for (std::size_t i = 0; i < ps.size();) {
        std::size_t j = i;
        while (j < ps.size() && ps[j] == ps[i]) ++j;
        f.factors.emplace_back(ps[i], static_cast<u32>(j - i));
        i = j;
      }
    }
  }
  std::sort(f.factors.begin(), f.factors.end());
  return f;
}

inline u64 euler_phi(u64 n) {
  u64 phi = 1;
  for (auto [p, e] : factorize(n).factors) {
    phi *= p - 1;
    for (u32 i = 1; i < e; ++i) phi *= p;
  }
  return phi;
}

inline bool is_squarefree(u64 n) {
  for (auto [p, e] : factorize(n).factors)
    if (e >= 2) return false;
  return true;
}

inline u64 divisor_count(u64 n) {
  u64 d = 1;
  for (auto [p, e] : factorize(n).factors) d *= e + 1;
  return d;
}

// n = cubefree * cubefull with the parts coprime: exponents <= 2 go left,
// exponents >= 3 go right.
inline std::pair<u64, u64> cube_split(u64 n) {
  u64 cubefree = 1, cubefull = 1;
  for (auto [p, e] : factorize(n).factors) {
    u64 pe = 1;
    for (u32 i = 0; i < e; ++i) pe *= p;
    (e <= 2 ? cubefree : cubefull) *= pe;
  }
  return {cubefree, cubefull};
}

struct DivisorTable {
  u64 start = 1;
  std::vector<u32> values;  // values[i] = d(start + i)

  u32 at(u64 n) const { return values[n - start]; }
};

namespace detail {

inline void divisor_fill(u64 lo, u64 hi, std::vector<u32>& v) {
  v.assign(hi - lo + 1, 0);
  const u64 root = isqrt(hi);
  for (u64 d = 1; d <= root; ++d) {
    u64 m = std::max(d * d, (lo + d - 1) / d * d);
    for (; m <= hi; m += d) v[m - lo] += (m / d == d) ? 1 : 2;
  }
}

}  // namespace detail

// Streaming divisor-count sieve: emits one DivisorTable per block so ranges
// up to ~10^9 run in bounded memory.  Pairs each divisor d <= sqrt(m) with
// its cofactor, so counts are exact.
template <class F>
void divisor_sieve_blocks(u64 lo, u64 hi, u64 block, F&& emit) {
  if (lo == 0) throw std::invalid_argument("divisor_sieve: lo = 0");
  if (lo > hi) throw std::invalid_argument("divisor_sieve: lo > hi");
  if (block == 0) block = 1;
  DivisorTable t;
  for (u64 L = lo; L <= hi; L = L + block > L ? L + block : hi + 1) {
    const u64 R = std::min(hi, L + block - 1);
    t.start = L;
    detail::divisor_fill(L, R, t.values);
    emit(t);
    if (R == hi) break;
  }
}

inline DivisorTable divisor_sieve(u64 lo, u64 hi, u64 block = u64{1} << 20) {
  if (lo == 0) throw std::invalid_argument("divisor_sieve: lo = 0");
  if (lo > hi) throw std::invalid_argument("divisor_sieve: lo > hi");
  if (hi - lo + 1 > (u64{1} << 28)) throw std::length_error("divisor_sieve: range too large");
  DivisorTable out;
  out.start = lo;
  out.values.reserve(hi - lo + 1);
  divisor_sieve_blocks(lo, hi, block, [&](const DivisorTable& t) {
    out.values.insert(out.values.end(), t.values.begin(), t.values.end());
  });
  return out;
}

inline u64 mod_inv(i64 a, u64 m) {
  if (m == 0) throw std::invalid_argument("mod_inv: m = 0");
  if (m == 1) return 0;
  i64 r = a % static_cast<i64>(m);
  if (r < 0) r += static_cast<i64>(m);
  // extended Euclid on (r, m)
  i64 old_r = r, cur_r = static_cast<i64>(m);
  i64 old_s = 1, cur_s = 0;
  while (cur_r != 0) {
    const i64 q = old_r / cur_r;
    old_r -= q * cur_r;
    std::swap(old_r, cur_r);
    old_s -= q * cur_s;
    std::swap(old_s, cur_s);
  }
  if (old_r != 1) throw std::invalid_argument("mod_inv: arguments not coprime");
  i64 inv = old_s % static_cast<i64>(m);
  if (inv < 0) inv += static_cast<i64>(m);
  return static_cast<u64>(inv);
}

// All y in [0,p) with y^2 = a (mod p), via Tonelli-Shanks.  Only odd primes:
// p = 2 and composite p are rejected, callers that need those go elsewhere.
inline std::vector<u64> sqrt_mod_p(u64 a, u64 p) {
  if (p == 2 || !is_prime(p)) throw std::invalid_argument("sqrt_mod_p: p must be an odd prime");
  a %= p;
  if (a == 0) return {0};
  if (powmod(a, (p - 1) / 2, p) != 1) return {};
  u64 r;
  if (p % 4 == 3) {
    r = powmod(a, (p + 1) / 4, p);
  } else {
    // Tonelli-Shanks: p - 1 = q * 2^s with q odd
    u64 q = p - 1;
    int s = 0;
    while ((q & 1) == 0) q >>= 1, ++s;
    u64 z = 2;
    while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
    u64 m = static_cast<u64>(s);
    u64 c = powmod(z, q, p);
    u64 t = powmod(a, q, p);
    r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
      u64 i = 0, tt = t;
      while (tt != 1) tt = mulmod(tt, tt, p), ++i;
      u64 b = c;
      for (u64 j = 0; j + i + 1 < m; ++j) b = mulmod(b, b, p);
      m = i;
      c = mulmod(b, b, p);
      t = mulmod(t, c, p);
      r = mulmod(r, b, p);
    }
  }
  const u64 r2 = p - r;
  return r < r2 ? std::vector<u64>{r, r2} : std::vector<u64>{r2, r};
}

// Roots of y^2 = a (mod p^2) for gcd(a,p) = 1, by Hensel lift: 0 or 2 roots.
inline std::vector<u64> sqrt_mod_p2(u64 a, u64 p) {
  const u64 p2 = p * p;
  a %= p2;
  if (a % p == 0) throw std::invalid_argument("sqrt_mod_p2: p | a");
  std::vector<u64> out;
  for (u64 r : sqrt_mod_p(a % p, p)) {
    const u64 r2 = static_cast<u64>(u128(r) * r % p2);
    const u64 diff = (a + p2 - r2) % p2;  // divisible by p
    const u64 t = mulmod(diff / p, mod_inv(static_cast<i64>(2 * r % p), p), p);
    out.push_back((r + t * p) % p2);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Fold pairwise-coprime congruences into one; rejects non-coprime moduli and
// products that leave 64 bits.
inline std::pair<u64, u64> crt_combine(const std::vector<std::pair<u64, u64>>& congruences) {
  u64 r = 0, m = 1;
  for (auto [r2, m2] : congruences) {
    if (m2 == 0) throw std::invalid_argument("crt_combine: modulus 0");
    r2 %= m2;
    if (std::gcd(m, m2) != 1) throw std::invalid_argument("crt_combine: moduli not coprime");
    if (m > (u64(-1)) / m2) throw std::overflow_error("crt_combine: modulus product overflows");
    const u64 t = mulmod((r2 + m2 - r % m2) % m2, mod_inv(static_cast<i64>(m % m2), m2), m2);
    r += m * t;
    m *= m2;
  }
  return {r, m};
}

}  // namespace klsum

#include "klsum/kloosterman.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "klsum/verify.hpp"

using namespace klsum;

namespace {

constexpr double kPi = std::numbers::pi_v<double>;

}  // namespace

TEST(Kl2Direct, FrozenExamples) {
  EXPECT_NEAR(kl2_direct(1, 3).value.real(), -1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(kl2_direct(1, 5).value.real(), (2.0 + 2.0 * std::cos(4.0 * kPi / 5.0)) / std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(kl2_direct(1, 5).value.real(), 0.170820, 1e-6);
  EXPECT_NEAR(kl2_direct(0, 3).value.real(), -1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_EQ(kl2_direct(4, 1).value, (std::complex<double>{1.0, 0.0}));
  EXPECT_NEAR(kl2_direct(1, 2).value.real(), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(Kl2Direct, Errors) {
  EXPECT_THROW(kl2_direct(1, 0), std::invalid_argument);
  EXPECT_THROW(kl2_direct(1, 20'000'000), std::length_error);
  EXPECT_NO_THROW(kl2_direct(1, 20'000, 100'000));
}

TEST(Kl2P2Closed, FrozenExamples) {
  EXPECT_NEAR(kl2_p2_closed(1, 3).value.real(), 2.0 * std::cos(4.0 * kPi / 9.0), 1e-12);
  EXPECT_NEAR(kl2_p2_closed(1, 3).value.real(), 0.347296, 1e-6);
  EXPECT_NEAR(std::abs(kl2_p2_closed(1, 3).value - kl2_direct(1, 9).value), 0.0, 1e-12);

  EXPECT_EQ(kl2_p2_closed(2, 5).value, (std::complex<double>{0.0, 0.0}));
  EXPECT_NEAR(std::abs(kl2_direct(2, 25).value), 0.0, 1e-12);

  EXPECT_NEAR(kl2_p2_closed(4, 7).value.real(), 2.0 * std::cos(8.0 * kPi / 49.0), 1e-12);
  EXPECT_NEAR(std::abs(kl2_p2_closed(4, 7).value - kl2_direct(4, 49).value), 0.0, 1e-12);
}

TEST(Kl2P2Closed, Errors) {
  EXPECT_THROW(kl2_p2_closed(1, 2), std::invalid_argument);
  EXPECT_THROW(kl2_p2_closed(3, 3), std::invalid_argument);   // p | a
  EXPECT_THROW(kl2_p2_closed(1, 15), std::invalid_argument);  // composite
}

TEST(Kl2, FactoredMatchesDirect) {
  EXPECT_NEAR(std::abs(kl2(1, 15).value - kl2_direct(1, 15).value), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(kl2(7, 9).value - kl2_direct(7, 9).value), 0.0, 1e-9);
  for (i64 a : {-3, 0, 1, 2, 5, 11}) EXPECT_EQ(kl2(a, 1).value, (std::complex<double>{1.0, 0.0}));
  for (u64 q : {12u, 45u, 98u, 360u, 1024u, 1998u}) {
    for (i64 a = 0; a < 8; ++a)
      EXPECT_NEAR(std::abs(kl2(a, q).value - kl2_direct(a, q).value), 0.0, 1e-9) << a << " " << q;
  }
}

TEST(Kl2, UnsupportedModulusSignalled) {
  // 2^24 is over the direct budget and has no closed form
  EXPECT_THROW(kl2(1, u64{1} << 24), std::length_error);
}

TEST(Kl2, Periodicity) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const u64 q = 2 + rng() % 400;
    const i64 a = static_cast<i64>(rng() % q);
    EXPECT_EQ(kl2(a + static_cast<i64>(q), q).value, kl2(a, q).value);
    EXPECT_EQ(kl2(a - static_cast<i64>(q), q).value, kl2(a, q).value);
  }
  EXPECT_EQ(kl2(-3, 7).value, kl2(4, 7).value);
}

TEST(Kl2Batch, FrozenExamples) {
  const auto b = kl2_batch(1, 3, 3);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_NEAR(b[0].value.real(), -1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(b[1].value.real(), 2.0 / std::sqrt(3.0), 1e-12);  // Kl2(2;3): both unit terms equal 1
  EXPECT_NEAR(b[2].value.real(), -1.0 / std::sqrt(3.0), 1e-12);

  for (const auto& v : kl2_batch(1, 1, 5)) EXPECT_EQ(v.value, (std::complex<double>{1.0, 0.0}));
}

TEST(Kl2Batch, IdenticalToScalar) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 1'000; ++i) {
    const u64 q = 1 + rng() % 300;
    const i64 a = static_cast<i64>(rng() % (2 * q)) - static_cast<i64>(q);
    const u64 N = 1 + rng() % 8;
    const auto batch = kl2_batch(a, q, N);
    for (u64 n = 1; n <= N; ++n) {
      const i64 an = static_cast<i64>((((a % static_cast<i64>(q)) + static_cast<i64>(q)) * static_cast<i64>(n)) % static_cast<i64>(q));
      EXPECT_EQ(batch[n - 1].value, kl2(an, q).value) << "a=" << a << " q=" << q << " n=" << n;
    }
  }
}

TEST(KlTable, IdenticalToScalar) {
  for (u64 q : {1u, 2u, 9u, 12u, 49u, 90u, 97u, 360u}) {
    const auto t = kl_table(q);
    ASSERT_EQ(t.values.size(), q);
    for (u64 a = 0; a < q; ++a) EXPECT_EQ(t.values[a], kl2(static_cast<i64>(a), q).value) << q << " " << a;
  }
}

TEST(Kl2, RealnessExhaustiveSmallModuli) {
  for (u64 q = 1; q <= 200; ++q) {
    const auto t = kl_table(q);
    for (u64 a = 0; a < q; ++a) EXPECT_LT(std::abs(t.values[a].imag()), 1e-9) << q << " " << a;
  }
}

TEST(Kl2, DivisorBoundExhaustiveUpTo2000) {
  const auto r = verify::check_weil_exhaustive(2000);
  EXPECT_TRUE(r.pass) << r.violations << " violations, worst excess " << r.worst;
  EXPECT_EQ(r.checked, (2000u * 2001u) / 2);
}

// The substitution x -> t̄x proves q^{-1/2} Σ_x e_q(atx + t̄x̄) = Kl2(a;q) for
// every unit t (the sum depends only on the product of the two coefficients).
// Checked exhaustively: every q <= 200, every unit t, every a.
TEST(Kl2, TwoCoefficientSubstitutionIdentity) {
  for (u64 q = 2; q <= 200; ++q) {
    const auto klt = kl_table(q);
    const auto inv = detail::inverse_table(q);
    const auto w = detail::root_table(q);
    const double norm = std::sqrt(static_cast<double>(q));
    std::vector<u64> perm(q);
    for (u64 t = 1; t < q; ++t) {
      if (inv[t] == 0 && q > 1) continue;
      for (u64 x = 1; x < q; ++x) perm[x] = inv[x] ? mulmod(inv[t], inv[x], q) : 0;
      for (u64 a = 0; a < q; ++a) {
        const u64 at = mulmod(a, t, q);
        KahanComplex acc;
        u64 u = 0;
        for (u64 x = 1; x < q; ++x) {
          u += at;
          if (u >= q) u -= q;
          if (inv[x] == 0) continue;
          u64 idx = u + perm[x];
          if (idx >= q) idx -= q;
          acc.add(w[idx]);
        }
        const double diff = std::abs(acc.value() / norm - klt.values[a]);
        ASSERT_LT(diff, 1e-9) << "q=" << q << " t=" << t << " a=" << a;
      }
    }
  }
}

// Square-class invariance Kl2(at²;q) = Kl2(a;q) is NOT a real identity; pin a
// counterexample so nobody "simplifies" the substitution test above into it.
// At q=5: Kl2(4;5) - Kl2(1;5) = (2cos(2π/5) - 2cos(4π/5))/√5 = √5/√5 = 1.
TEST(Kl2, SquareClassInvarianceIsFalse) {
  const double k1 = kl2(1, 5).value.real();
  const double k4 = kl2(4, 5).value.real();
  EXPECT_NEAR(k1, 0.170820, 1e-6);
  EXPECT_NEAR(k4, 1.170820, 1e-6);
  EXPECT_NEAR(k4 - k1, 1.0, 1e-9);
}

TEST(Kl2, TwistFactorizationUnitScale) {
  const auto r = verify::check_twist(40, 20, 7);
  EXPECT_TRUE(r.pass) << r.violations << " violations, worst " << r.worst;
}

TEST(Kl2, ClosedFormSweepUnitScale) {
  const auto r = verify::check_p2_closed(50);
  EXPECT_TRUE(r.pass) << r.violations << " violations, worst " << r.worst;
}

TEST(Kl2, DirectAgreementSampleUnitScale) {
  const auto [agree, weil] = verify::check_kl2_direct_and_weil(300, 2'000, 5);
  EXPECT_TRUE(agree.pass) << agree.worst;
  EXPECT_TRUE(weil.pass) << weil.worst;
  EXPECT_EQ(agree.checked, 2'000u);
}

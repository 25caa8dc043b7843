#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "klsum/verify.hpp"

namespace klsum {
namespace {

TEST(Weight, BumpSupportAndPlateau) {
  const Weight w = make_weight({WeightKind::kBump12, 0.25, 0.0});
  EXPECT_EQ(w(1.0), 0.0);
  EXPECT_EQ(w(2.0), 0.0);
  EXPECT_EQ(w(0.3), 0.0);
  EXPECT_GT(w(1.5), 0.0);
  EXPECT_LE(w(1.5), 1.0);
  EXPECT_DOUBLE_EQ(w(1.5), 1.0);  // plateau [1.25, 1.75]
  EXPECT_GT(w(1.1), 0.0);
  EXPECT_LT(w(1.1), 1.0);
}

TEST(Weight, WindowPlateauCenterAndRange) {
  for (const double N : {1.0, 10.0, 250.0}) {
    const Weight w = make_weight({WeightKind::kWindowSym, 0.25, N});
    EXPECT_DOUBLE_EQ(w(0.0), 1.0);
    EXPECT_EQ(w(-N), 0.0);
    EXPECT_EQ(w(N), 0.0);
    for (double t = -N; t <= N; t += N / 37.0) {
      EXPECT_GE(w(t), 0.0);
      EXPECT_LE(w(t), 1.0);
    }
  }
  const Weight h = make_weight({WeightKind::kWindowHalf, 0.25, 100.0});
  EXPECT_EQ(h(0.5), 0.0);
  EXPECT_EQ(h(100.0), 0.0);
  EXPECT_DOUBLE_EQ(h(50.0), 1.0);
}

TEST(Weight, RejectsBadParameters) {
  EXPECT_THROW(make_weight({WeightKind::kBump12, 0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(make_weight({WeightKind::kBump12, 1.5, 0.0}), std::invalid_argument);
  EXPECT_THROW(make_weight({WeightKind::kWindowSym, 0.25, 0.5}), std::invalid_argument);
  EXPECT_THROW(make_weight({WeightKind::kWindowHalf, 0.25, 0.99}), std::invalid_argument);
}

// Derivative envelopes ‖ψ^(j)‖ ≤ c_j·δ^{-j} (bump) and c_j·N^{-j} (windows),
// scanned on a 10⁴-point grid.  The c_j caps are frozen from measured values
// (bump: 2.00, 9.85, 110.6, 2281; sym window: 3.00, 22.2, 373.2, 11544;
// half window, worst at N=1: 12.0, 354.3, 23883, 2.956e6) with ~10% headroom.
TEST(Weight, DerivativeEnvelopes) {
  const double bump_cap[5] = {1.0, 2.2, 11.0, 125.0, 2600.0};
  for (const double d : {0.1, 0.25, 0.5, 1.0}) {
    const Weight w = make_weight({WeightKind::kBump12, d, 0.0});
    for (int j = 0; j <= 4; ++j)
      EXPECT_LE(weight_derivative_sup(w, j) * std::pow(d, j), bump_cap[j]) << "bump j=" << j;
  }
  const double sym_cap[5] = {1.0, 3.2, 25.0, 410.0, 12700.0};
  const double half_cap[5] = {1.0, 13.0, 390.0, 26500.0, 3.3e6};
  for (const double N : {1.0, 10.0, 100.0}) {
    const Weight ws = make_weight({WeightKind::kWindowSym, 0.25, N});
    const Weight wh = make_weight({WeightKind::kWindowHalf, 0.25, N});
    for (int j = 0; j <= 4; ++j) {
      EXPECT_LE(weight_derivative_sup(ws, j) * std::pow(N, j), sym_cap[j]) << "sym j=" << j;
      EXPECT_LE(weight_derivative_sup(wh, j) * std::pow(N, j), half_cap[j]) << "half j=" << j;
    }
  }
  // recorded first-derivative constant for the bump: c₁ = 2.00
  const Weight w = make_weight({WeightKind::kBump12, 0.25, 0.0});
  EXPECT_NEAR(weight_derivative_sup(w, 1) * 0.25, 2.0, 0.05);
}

// Dual quadrature route: panelled Gauss-Legendre vs adaptive Gauss-Kronrod.
TEST(FourierEval, MatchesAdaptiveKronrod) {
  const Weight w = make_weight({WeightKind::kBump12, 0.25, 0.0});
  const FourierEval fe(w, 8.0);
  using boost::math::quadrature::gauss_kronrod;
  for (const double xi : {0.0, 0.3, 1.0, 2.7, 5.5, 8.0}) {
    const double re = gauss_kronrod<double, 61>::integrate(
        [&](double t) { return w(t) * std::cos(kTwoPi * xi * t); }, 1.0, 2.0, 12, 1e-14);
    const double im = gauss_kronrod<double, 61>::integrate(
        [&](double t) { return -w(t) * std::sin(kTwoPi * xi * t); }, 1.0, 2.0, 12, 1e-14);
    EXPECT_NEAR(std::abs(fe(xi) - std::complex<double>(re, im)), 0.0, 1e-11) << "xi=" << xi;
  }
}

TEST(FourierEval, MarchMatchesPointwise) {
  const Weight w = make_weight({WeightKind::kWindowSym, 0.25, 7.0});
  const FourierEval fe(w, 5.0);
  double worst = 0.0;
  fe.march(5.0 / 2000.0, 2000, [&](u64 j, std::complex<double> v) {
    worst = std::max(worst, std::abs(v - fe(static_cast<double>(j) * 5.0 / 2000.0)));
  });
  EXPECT_LT(worst, 1e-12);
}

TEST(FourierEval, ZeroFrequencyIsWeightMass) {
  // ψ̂(0) = ∫ψ; for the symmetric window the smooth edges integrate to half
  // their width, so the mass is (hi-lo) - edge exactly (step symmetry).
  const Weight w = make_weight({WeightKind::kWindowSym, 0.25, 9.0});
  const FourierEval fe(w, 1.0);
  EXPECT_NEAR(fe(0.0).real(), (18.0 - 6.0), 1e-10);
  EXPECT_NEAR(fe(0.0).imag(), 0.0, 1e-14);
}

TEST(Poisson, IdentityOnPrimeModulus) {
  CompletionSpec c;
  c.s = 3;
  c.N = 10.0;
  const auto r = poisson_complete(c);
  EXPECT_NEAR(r.direct.real(), 8.922670026986, 1e-9);  // frozen direct n-sum
  EXPECT_NEAR(r.direct.imag(), 0.0, 1e-9);
  EXPECT_LT(std::abs(r.direct - r.completed) / (1.0 + std::abs(r.direct)), 1e-9);
  EXPECT_TRUE(r.certified);
  EXPECT_LT(r.tail_rel, 1e-8);
  EXPECT_EQ(r.h_cutoff, 24u);  // 2·ceil((3/10)·40)
}

TEST(Poisson, CompositeShiftedExample) {
  CompletionSpec c;
  c.s = 15;
  c.u1 = 7;
  c.u2 = 11;
  c.b1 = 0;
  c.b2 = 1;
  c.N = 50.0;
  const auto r = poisson_complete(c);
  EXPECT_NEAR(r.direct.real(), 0.552561632006, 1e-9);  // frozen direct n-sum
  EXPECT_NEAR(r.direct.imag(), 0.0, 1e-9);
  EXPECT_LT(std::abs(r.direct - r.completed) / (1.0 + std::abs(r.direct)), 1e-6);
  EXPECT_TRUE(r.certified);
  EXPECT_NEAR(r.P_rhs, 42.024212, 1e-4);
  EXPECT_NEAR(r.ratio, 0.013149, 1e-5);
  EXPECT_EQ(r.d_factor, 16.0);  // d(1155)
}

// At N = m the window covers a full period and the h = 0 term ψ̂(0)·mean(F)
// carries the bulk of the completed value.
TEST(Poisson, FullPeriodZeroFrequencyDominates) {
  CompletionSpec c;
  c.s = 15;
  c.u1 = 7;
  c.N = 105.0;
  const auto r = poisson_complete(c);
  EXPECT_LT(std::abs(r.direct - r.completed) / (1.0 + std::abs(r.direct)), 1e-6);

  const auto t1 = kl_table(105), t2 = kl_table(15);
  KahanComplex sum;
  for (u64 x = 0; x < 105; ++x)
    sum.add(t1.values[x] * t1.values[x] * t2.values[x % 15] * t2.values[x % 15]);
  const Weight psi = make_weight({WeightKind::kWindowSym, 0.25, 105.0});
  const FourierEval fe(psi, 1.0);
  const std::complex<double> h0 = fe(0.0) * sum.value() / 105.0;
  EXPECT_NEAR(h0.real(), 22.4, 1e-8);  // ψ̂(0)=140, Σ|Kl·Kl|² = 16.8 (frozen)
  EXPECT_NEAR(r.completed.real(), 24.272305175, 1e-6);
  EXPECT_LT(std::abs(r.completed - h0), 0.5 * std::abs(h0));
}

TEST(Poisson, RejectsBadSpecs) {
  CompletionSpec c;
  c.s = 6;
  c.u1 = 10;  // gcd(s,u1) = 2
  EXPECT_THROW(poisson_complete(c), std::invalid_argument);
  c = {};
  c.s = 8;  // 2³ not cube-free
  EXPECT_THROW(poisson_complete(c), std::invalid_argument);
  c = {};
  c.s = 15;
  c.a = 5;  // shares a factor with the modulus
  EXPECT_THROW(poisson_complete(c), std::invalid_argument);
  c = {};
  c.N = 0.5;
  EXPECT_THROW(poisson_complete(c), std::invalid_argument);
}

TEST(Qvdc, DirectOracleExample) {
  QvdcSpec q;
  q.r = 5;
  q.s = 3;
  q.u1 = 7;
  q.u2 = 11;
  q.c = 1;
  q.N = 100.0;
  const auto r = qvdc_sum(q);
  EXPECT_NEAR(r.lhs.real(), -1.234199507077, 1e-9);  // frozen direct sum
  EXPECT_NEAR(r.lhs.imag(), 0.0, 1e-12);
  EXPECT_NEAR(r.rhs, 73.930770, 1e-4);
  EXPECT_NEAR(r.ratio, 0.016694, 1e-5);

  // independent route: window times two per-argument direct evaluations
  const Weight psi = make_weight({WeightKind::kWindowHalf, 0.25, 100.0});
  KahanComplex acc;
  for (u64 n = 1; n <= 100; ++n)
    if (std::gcd(n, q.r) == 1)
      acc.add(psi(static_cast<double>(n)) * kl2_direct(static_cast<i64>(n), 105).value *
              kl2_direct(static_cast<i64>(n), 165).value);
  EXPECT_LT(std::abs(r.lhs - acc.value()), 1e-12);
}

TEST(Qvdc, AlwaysRealOnRandomSpecs) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 25; ++i) {
    QvdcSpec q;
    const u64 rr[] = {1, 2, 4, 5, 8};
    const u64 ss[] = {1, 3, 9, 7};
    const u64 uu[] = {1, 11, 13};
    q.r = rr[rng() % 5];
    q.s = ss[rng() % 4];
    q.u1 = uu[rng() % 3];
    q.u2 = (q.u1 == 13) ? 1 : 17;
    if (std::gcd(q.s, q.r) != 1) continue;
    const std::vector<u64> divs = [&] {
      std::vector<u64> d;
      for (u64 c = 1; c <= q.r; ++c)
        if (q.r % c == 0) d.push_back(c);
      return d;
    }();
    q.c = divs[rng() % divs.size()];
    q.a = static_cast<i64>(1 + rng() % 3);
    while (std::gcd(static_cast<u64>(q.a), q.r * q.s * q.u1 * q.u2) != 1) ++q.a;
    q.N = 20.0 + static_cast<double>(rng() % 80);
    const auto r = qvdc_sum(q);
    EXPECT_NEAR(r.lhs.imag(), 0.0, 1e-9);
  }
}

TEST(Qvdc, EmptyWindowAndValidation) {
  QvdcSpec q;
  q.N = 0.25;
  const auto r = qvdc_sum(q);
  EXPECT_EQ(r.lhs, std::complex<double>(0.0, 0.0));
  q = {};
  q.r = 6;
  q.c = 4;  // 4 does not divide 6
  EXPECT_THROW(qvdc_sum(q), std::invalid_argument);
  q = {};
  q.r = 3;
  q.s = 3;  // not coprime
  EXPECT_THROW(qvdc_sum(q), std::invalid_argument);
  q = {};
  q.u1 = 27;  // not cube-free
  EXPECT_THROW(qvdc_sum(q), std::invalid_argument);
}

TEST(Bilinear, SquareFreeExampleAgainstNaive) {
  BilinearSpec b;  // r=1, s=1, U=4 → u ∈ {5,6,7}, N=20, λ = d(n)
  const auto r = bilinear_sum(b);
  EXPECT_EQ(r.support_size, 3u);
  EXPECT_NEAR(r.lhs.real(), -2.177882717455, 1e-9);  // frozen double sum
  EXPECT_NEAR(r.lhs.imag(), 0.0, 1e-12);
  EXPECT_NEAR(r.K_rhs, 957.989787, 1e-3);
  EXPECT_NEAR(r.K_rhs_display, 1061.442378, 1e-3);

  const auto dt = divisor_sieve(1, 20);
  KahanComplex acc;
  for (const u64 u : {5, 6, 7})
    for (u64 n = 1; n <= 20; ++n)
      acc.add(static_cast<double>(dt.at(n)) * kl2_direct(static_cast<i64>(n), u).value);
  EXPECT_LT(std::abs(r.lhs - acc.value()), 1e-12);
}

TEST(Bilinear, SquaresFlagEmptyAndNonempty) {
  BilinearSpec b;
  b.U = 10.0;
  b.N = 10;
  b.squares = true;  // u² ∈ (10,20] forces root 4, not square-free → empty
  const auto r0 = bilinear_sum(b);
  EXPECT_EQ(r0.support_size, 0u);
  EXPECT_EQ(r0.lhs, std::complex<double>(0.0, 0.0));
  EXPECT_EQ(r0.K_rhs, 0.0);

  b.U = 20.0;  // u² ∈ (20,40]: roots 5, 6 → moduli 25, 36
  const auto r = bilinear_sum(b);
  EXPECT_EQ(r.support_size, 2u);
  EXPECT_NEAR(r.lhs.real(), 6.419244682691, 1e-9);  // frozen double sum
  EXPECT_NEAR(r.K_rhs, 695.999252, 1e-3);
  EXPECT_NEAR(r.K_rhs_display, 1171.508537, 1e-3);

  const auto dt = divisor_sieve(1, 10);
  KahanComplex acc;
  for (const u64 q : {25, 36})
    for (u64 n = 1; n <= 10; ++n)
      acc.add(static_cast<double>(dt.at(n)) * kl2_direct(static_cast<i64>(n), q).value);
  EXPECT_LT(std::abs(r.lhs - acc.value()), 1e-12);
}

TEST(Bilinear, CoefficientRulesAndValidation) {
  BilinearSpec b;
  b.lambda = LambdaRule::kOne;
  const auto r1 = bilinear_sum(b);
  const auto dt = divisor_sieve(1, 20);
  KahanComplex acc;
  for (const u64 u : {5, 6, 7})
    for (u64 n = 1; n <= 20; ++n) acc.add(kl2_direct(static_cast<i64>(n), u).value);
  EXPECT_LT(std::abs(r1.lhs - acc.value()), 1e-12);

  b.lambda = LambdaRule::kSignedDivisor;
  b.seed = 7;
  const auto r2 = bilinear_sum(b);
  std::mt19937_64 rng(7);
  KahanComplex acc2;
  std::vector<double> lam(21);
  for (u64 n = 1; n <= 20; ++n) {
    lam[n] = static_cast<double>(dt.at(n));
    if (rng() & 1) lam[n] = -lam[n];
  }
  for (const u64 u : {5, 6, 7})
    for (u64 n = 1; n <= 20; ++n)
      acc2.add(lam[n] * kl2_direct(static_cast<i64>(n), u).value);
  EXPECT_LT(std::abs(r2.lhs - acc2.value()), 1e-12);

  BilinearSpec bad;
  bad.r = 3;
  bad.s = 6;  // not coprime
  EXPECT_THROW(bilinear_sum(bad), std::invalid_argument);
  bad = {};
  bad.s = 16;  // not cube-free
  EXPECT_THROW(bilinear_sum(bad), std::invalid_argument);
  bad = {};
  bad.r = 5;
  bad.a = 10;  // shares a factor with rs
  EXPECT_THROW(bilinear_sum(bad), std::invalid_argument);
  bad = {};
  bad.N = 0;
  EXPECT_THROW(bilinear_sum(bad), std::invalid_argument);
}

// Frozen bound-expression values by direct substitution into the displays.
// Note the four-term average-discrepancy display at r=s=U=1, X=16 evaluates
// to 2+2+1+1 = 6 (each term written out), not 7.
TEST(BoundExprs, FrozenSubstitutions) {
  EXPECT_NEAR(bound_L(1, 1, 1, 16), 6.0, 1e-12);
  EXPECT_NEAR(bound_M(1, 1, 16, 16), 10.0, 1e-12);
  EXPECT_NEAR(bound_P(1, 1, 1, 3, 3, 1.0), 2.0, 1e-12);  // b1 = b2, empty products
  EXPECT_NEAR(bound_L(16, 1, 1, 1), 1 + 2 + 4 + 4, 1e-12);
  EXPECT_NEAR(bound_M(1, 16, 1, 1), std::pow(16.0, 0.125) + 1 + 4 + std::pow(16.0, 0.375),
              1e-12);
}

TEST(BoundExprs, AverageEnvelopesMonotoneInEachArgument) {
  std::mt19937_64 rng(5);
  const auto draw = [&] { return 1.0 + static_cast<double>(rng() % 10000) / 100.0; };
  for (int t = 0; t < 4000; ++t) {
    const double v[4] = {draw(), draw(), draw(), draw()};
    double w[4] = {v[0], v[1], v[2], v[3]};
    w[rng() % 4] += static_cast<double>(1 + rng() % 1000) / 10.0;
    EXPECT_GE(bound_L(w[0], w[1], w[2], w[3]), bound_L(v[0], v[1], v[2], v[3]) - 1e-12);
    EXPECT_GE(bound_M(w[0], w[1], w[2], w[3]), bound_M(v[0], v[1], v[2], v[3]) - 1e-12);
  }
}

// The completed-sum envelope is monotone in N but NOT in s: with trivial
// gcds the 1/s decay of N/(su1u2) beats the (√gcd + √gcd) sum.  Pinned:
// P(s=1) = 1+N vs P(s=3) = 1+(N/3)(√3+1) at u1=u2=1, b1-b2=1.
TEST(BoundExprs, CompletionEnvelopeMonotoneInNOnly) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 2000; ++t) {
    const u64 s = 1 + rng() % 30, u1 = 1 + rng() % 12, u2 = 1 + rng() % 12;
    const i64 b1 = static_cast<i64>(rng() % 40), b2 = static_cast<i64>(rng() % 40);
    const double N = 1.0 + static_cast<double>(rng() % 1000);
    EXPECT_GE(bound_P(s, u1, u2, b1, b2, N + 1.0 + static_cast<double>(rng() % 50)),
              bound_P(s, u1, u2, b1, b2, N) - 1e-12);
  }
  EXPECT_NEAR(bound_P(1, 1, 1, 1, 0, 12.0), 13.0, 1e-12);
  EXPECT_NEAR(bound_P(3, 1, 1, 1, 0, 12.0), 1.0 + 4.0 * (std::sqrt(3.0) + 1.0), 1e-12);
  EXPECT_LT(bound_P(3, 1, 1, 1, 0, 12.0), bound_P(1, 1, 1, 1, 0, 12.0) - 1.0);
}

TEST(VerifySweeps, PoissonUnitScale) {
  const auto r = verify::check_poisson(20, 600, 17);
  EXPECT_TRUE(r.pass) << r.note;
  EXPECT_EQ(r.checked, 20u);
  EXPECT_LT(r.worst, 1e-6);
}

TEST(VerifySweeps, BilinearUnitScale) {
  const auto r = verify::check_bilinear(40'000, 40, 23);
  EXPECT_TRUE(r.pass) << r.note;
  EXPECT_EQ(r.violations, 0u);
  EXPECT_LT(r.worst, 1e-9);
}

}  // namespace
}  // namespace klsum

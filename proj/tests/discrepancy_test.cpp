#include "klsum/discrepancy.hpp"

#include <gtest/gtest.h>

#include <random>

#include "klsum/verify.hpp"

namespace klsum {
namespace {

const WeightSpec kHalfBump{WeightKind::kBump12, 0.5, 10};

TEST(Exact, HandEnumeratedValues) {
  const auto r1 = delta(20, 3, 1);
  EXPECT_EQ(r1.ap_sum, 19u);       // d-sum over n ≡ 1 (3), n ≤ 20
  EXPECT_EQ(r1.coprime_sum, 41u);  // d-sum over (n,3) = 1, n ≤ 20
  const auto e1 = r1.exact.reduced();
  EXPECT_EQ(e1.num, -3);
  EXPECT_EQ(e1.den, 2u);
  EXPECT_EQ(r1.delta, -1.5);  // exact in binary
  EXPECT_NEAR(r1.trivial_scale, 20.0 * std::log(20.0) / 3.0, 1e-12);

  const auto e2 = delta(20, 3, 2).exact.reduced();
  EXPECT_EQ(e2.num, 3);
  EXPECT_EQ(e2.den, 2u);

  const auto r0 = delta(50, 1, 0);  // q = 1: both sums coincide
  EXPECT_EQ(r0.exact.num, 0);
  EXPECT_EQ(r0.exact.den, 1u);
  EXPECT_EQ(r0.delta, 0.0);

  EXPECT_THROW(delta(20, 6, 3), std::invalid_argument);
  EXPECT_THROW(delta(10, 4, 2), std::invalid_argument);
  EXPECT_THROW(delta(20, 0, 1), std::invalid_argument);
  EXPECT_THROW(delta(0.5, 3, 1), std::invalid_argument);
}

TEST(Exact, TrialDivisionOracleMatches) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 40; ++i) {
    const double X = 50.0 + static_cast<double>(rng() % 1951);
    const u64 q = 1 + rng() % 100;
    u64 a = rng() % q;
    while (std::gcd(a, q) != 1) a = rng() % q;
    const auto fast = delta(X, q, a);
    const auto slow = delta_trial_division(X, q, a);
    ASSERT_EQ(fast.exact.num, slow.exact.num) << "q=" << q << " a=" << a;
    ASSERT_EQ(fast.exact.den, slow.exact.den);
    ASSERT_EQ(fast.ap_sum, slow.ap_sum);
    ASSERT_EQ(fast.coprime_sum, slow.coprime_sum);
  }
  const auto fast = delta(1e4, 97, 13);
  const auto slow = delta_trial_division(1e4, 97, 13);
  EXPECT_EQ(fast.exact.num, slow.exact.num);
}

TEST(Exact, PartitionIdentityIsLiterallyZero) {
  const auto table = divisor_sieve(1, 10000);
  for (u64 q : {1u, 2u, 3u, 4u, 12u, 30u, 49u, 120u, 210u, 499u, 500u}) {
    for (const double X : {1e3, 1e4}) {
      i64 sum = 0;
      u64 nrec = 0;
      for (const auto& rec : delta_all_residues(X, q, &table)) {
        sum += rec.exact.num;
        ++nrec;
      }
      EXPECT_EQ(sum, 0) << "q=" << q << " X=" << X;
      EXPECT_EQ(nrec, euler_phi(q));
    }
  }
}

TEST(Smooth, DirectLoopOracle) {
  const double v = delta_smooth(100, 7, 1, kHalfBump);
  // independent route: per-n trial-division divisor counts over (100, 200)
  const Weight psi = make_weight(kHalfBump);
  Kahan ap, cop;
  for (u64 n = 101; n < 200; ++n) {
    const double f = psi(n / 100.0) * static_cast<double>(divisor_count(n));
    if (n % 7 == 1) ap.add(f);
    if (std::gcd(n, u64{7}) == 1) cop.add(f);
  }
  EXPECT_NEAR(v, ap.value() - cop.value() / 6.0, 1e-12);
  EXPECT_NEAR(v, -0.912268488855169, 1e-12);
}

TEST(Smooth, TrivialAndValidation) {
  EXPECT_EQ(delta_smooth(100, 1, 0, kHalfBump), 0.0);  // q = 1 collapses exactly

  std::vector<SmoothCell> cells;
  for (u64 a = 1; a <= 6; ++a) cells.push_back({7, a});
  const auto vals = delta_smooth_batch(100, kHalfBump, cells);
  double sum = 0.0;
  for (const double v : vals) sum += v;
  EXPECT_LT(std::abs(sum), 1e-9);  // unit residues telescope

  EXPECT_TRUE(delta_smooth_batch(100, kHalfBump, {}).empty());
  EXPECT_THROW(delta_smooth(100, 6, 3, kHalfBump), std::invalid_argument);
  EXPECT_THROW(delta_smooth(0.5, 7, 1, kHalfBump), std::invalid_argument);
  const WeightSpec window{WeightKind::kWindowSym, 0.25, 10};
  EXPECT_THROW(delta_smooth(100, 7, 1, window), std::invalid_argument);
}

TEST(Smooth, ThreadCountInvariance) {
  const std::vector<SmoothCell> cells{{7, 1}, {11, 2}, {13, 3}};
  const auto one = delta_smooth_batch(5000, kHalfBump, cells, 1);
  const auto four = delta_smooth_batch(5000, kHalfBump, cells, 4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i], four[i]);
}

TEST(Smooth, SharpWindowConsistencyRecorded) {
  // As the edge parameter shrinks, the smooth sum approaches the sharp-cutoff
  // window difference.  The summands are signed, so the gap need not shrink
  // monotonically for every cell; this cell was scanned to decrease.
  const double X = 100.25;
  const u64 q = 5, a = 2;
  const double sharp = delta(2 * X, q, a).delta - delta(X, q, a).delta;
  EXPECT_NEAR(sharp, 5.0, 1e-12);
  const double expected[3] = {6.537929067040, 4.346496785541, 0.311714448865};
  double prev = std::numeric_limits<double>::infinity();
  int k = 0;
  for (const double edge : {0.5, 0.25, 0.125}) {
    const WeightSpec w{WeightKind::kBump12, edge, 10};
    const double gap = std::abs(delta_smooth(X, q, a, w) - sharp);
    EXPECT_NEAR(gap, expected[k++], 1e-9);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
}

TEST(Avg, SquareFreeExample) {
  const auto res = avg_delta_squarefree(2, 3, 5, 1000, 1, kHalfBump);
  // u ∈ (5,10] square-free and coprime to 6: only u = 7, so q = 42
  ASSERT_EQ(res.moduli, (std::vector<u64>{42}));
  EXPECT_NEAR(res.lhs, std::abs(delta_smooth(1000, 42, 1, kHalfBump)) / 5.0, 1e-15);
  EXPECT_NEAR(res.lhs, 0.272043692018664, 1e-12);
  EXPECT_NEAR(res.rhs, bound_L(2, 3, 5, 1000), 0.0);
  EXPECT_NEAR(res.ratio, res.lhs / res.rhs, 1e-15);
}

TEST(Avg, SquaresExample) {
  const auto res = avg_delta_squares(1, 1, 20, 1000, 1, kHalfBump);
  // u² ∈ (20,40] with u square-free: u = 5, 6
  ASSERT_EQ(res.moduli, (std::vector<u64>{25, 36}));
  const double direct = (std::abs(delta_smooth(1000, 25, 1, kHalfBump)) +
                         std::abs(delta_smooth(1000, 36, 1, kHalfBump))) /
                        std::sqrt(20.0);
  EXPECT_NEAR(res.lhs, direct, 1e-15);
  EXPECT_NEAR(res.lhs, 0.389624748284032, 1e-12);
  EXPECT_NEAR(res.rhs, bound_M(1, 1, 20, 1000), 0.0);
}

TEST(Avg, EmptySupportAndValidation) {
  const auto sf = avg_delta_squarefree(1, 1, 0.4, 100, 1, kHalfBump);
  EXPECT_TRUE(sf.moduli.empty());
  EXPECT_EQ(sf.lhs, 0.0);

  // (U, 2U] is half-open at the left: U ∈ [1/2, 1) still admits u = 1
  const auto edge = avg_delta_squarefree(1, 1, 0.6, 100, 1, kHalfBump);
  ASSERT_EQ(edge.moduli, (std::vector<u64>{1}));
  EXPECT_EQ(edge.lhs, 0.0);  // the modulus-1 discrepancy vanishes identically

  // u² ∈ (10,20] contains only 16 = 4², and 4 is not square-free
  const auto sq = avg_delta_squares(1, 1, 10, 100, 1, kHalfBump);
  EXPECT_TRUE(sq.moduli.empty());
  EXPECT_EQ(sq.lhs, 0.0);

  EXPECT_THROW(avg_delta_squarefree(2, 4, 4, 100, 1, kHalfBump), std::invalid_argument);
  EXPECT_THROW(avg_delta_squarefree(1, 8, 4, 100, 1, kHalfBump), std::invalid_argument);
  EXPECT_THROW(avg_delta_squarefree(1, 3, 4, 100, 3, kHalfBump), std::invalid_argument);
}

TEST(Range, WindowExamples) {
  const auto r1 = range_check(1, 1, 1, 1e6, 0.1);
  EXPECT_TRUE(r1.cond[0]);
  EXPECT_TRUE(r1.cond[1]);
  EXPECT_FALSE(r1.cond[2]);  // U > X^ε fails at U = 1
  EXPECT_TRUE(r1.cond[3]);
  EXPECT_FALSE(r1.all);
  EXPECT_FALSE(r1.degenerate);

  const double X = 1e6;
  const auto r2 = range_check(std::pow(X, 0.2), 1, std::pow(X, 0.1), X, 0.05);
  EXPECT_TRUE(r2.all);

  const auto r3 = range_check(1, 1, 1, 16, 0.0);
  EXPECT_TRUE(r3.degenerate);
  EXPECT_FALSE(r3.cond[2]);      // strict inequality at exact equality
  EXPECT_TRUE(r3.boundary[2]);   // ... and the boundary is flagged
  EXPECT_FALSE(r3.boundary[0]);
  EXPECT_FALSE(r3.boundary[1]);
  EXPECT_FALSE(r3.boundary[3]);

  // non-strict comparison holds on its boundary: r = X^{1/3-ε} exactly
  const auto r4 = range_check(std::pow(X, 1.0 / 3.0 - 0.05), 1, 2, X, 0.05);
  EXPECT_TRUE(r4.boundary[1]);
  EXPECT_TRUE(r4.cond[1]);

  EXPECT_THROW(range_check(0, 1, 1, 16, 0.1), std::invalid_argument);
  EXPECT_THROW(range_check(1, 1, 1, 0.5, 0.1), std::invalid_argument);
}

TEST(VerifySweeps, PartitionFullScale) {
  const auto res = verify::check_partition();
  EXPECT_TRUE(res.pass) << res.note;
  EXPECT_EQ(res.checked, 1001u);  // 500 moduli at two cutoffs, plus the pinned value
  EXPECT_EQ(res.worst, 0.0);
}

TEST(VerifySweeps, RatioSweepFullScale) {
  const auto res = verify::check_ratio_sweep(1);
  EXPECT_TRUE(res.pass) << res.note;
  EXPECT_GE(res.checked, 20u);
  EXPECT_LT(res.elapsed_s, 600.0);
}

TEST(VerifySweeps, SharpEnvelopeRecorded) {
  const auto res = verify::check_sharp_envelope();
  EXPECT_TRUE(res.pass) << res.note;
  EXPECT_GT(res.worst, 0.0);
  EXPECT_LT(res.worst, 10.0);  // sanity: the recorded constant stays small
}

}  // namespace
}  // namespace klsum

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "deception/rd_side_info.hpp"
#include "test_util.hpp"

namespace deception {
namespace {

JointPmf independent(const std::vector<double>& px, const std::vector<double>& py) {
  std::vector<double> m;
  for (double a : px)
    for (double b : py) m.push_back(a * b);
  return JointPmf(Alphabet(static_cast<int>(px.size())), Alphabet(static_cast<int>(py.size())), m);
}

// Brute-force oracle for |Y| = 1 and binary reconstruction: scan channel rows
// V(1|x) on a uniform grid, keep the smallest I(X;Xhat) with E d <= delta.
double grid_rate(const std::vector<double>& px, const DistortionSpec& spec, double delta, int steps) {
  const int nx = static_cast<int>(px.size());
  std::vector<int> idx(nx, 0);
  double best = kInfinity;
  for (;;) {
    double out1 = 0.0, dist = 0.0;
    for (int x = 0; x < nx; ++x) {
      const double v1 = static_cast<double>(idx[x]) / steps;
      out1 += px[x] * v1;
      dist += px[x] * ((1 - v1) * spec(x, 0) + v1 * spec(x, 1));
    }
    if (dist <= delta) {
      double info = 0.0;
      for (int x = 0; x < nx; ++x) {
        const double v1 = static_cast<double>(idx[x]) / steps;
        if (v1 > 0) info += px[x] * v1 * std::log(v1 / out1);
        if (v1 < 1) info += px[x] * (1 - v1) * std::log((1 - v1) / (1 - out1));
      }
      best = std::min(best, info);
    }
    int k = 0;
    while (k < nx && ++idx[k] > steps) idx[k++] = 0;
    if (k == nx) break;
  }
  return best;
}

TEST(RdFixedSlope, ZeroSlopeEndpoint) {
  auto q = testing_util::random_pmf(3, 2, 42);
  DistortionSpec spec(Alphabet(3), Alphabet(2),
                      {Rational(0), Rational(1), Rational(1, 2), Rational(1, 3), Rational(1), Rational(0)});
  auto pt = rd_fixed_slope(q, spec, 0.0);
  EXPECT_EQ(pt.rate, 0.0);
  double expected = 0.0;
  for (int y = 0; y < 2; ++y) {
    double best = kInfinity;
    for (int b = 0; b < 2; ++b) {
      double c = 0.0;
      for (int x = 0; x < 3; ++x) c += q(x, y) * spec(x, b);
      best = std::min(best, c);
    }
    expected += best;
  }
  EXPECT_NEAR(pt.distortion, expected, 1e-15);
  for (int y = 0; y < 2; ++y)
    for (int b = 0; b < 2; ++b) EXPECT_EQ(pt.channel(b, 0, y), pt.channel(b, 2, y));
}

TEST(RdFixedSlope, LargeSlopeReachesConditionalEntropy) {
  auto q = testing_util::random_pmf(3, 2, 8);
  auto spec = DistortionSpec::hamming(3);
  auto pt = rd_fixed_slope(q, spec, 1e6);
  EXPECT_LT(pt.distortion, 1e-9);
  EXPECT_NEAR(pt.rate, conditional_entropy(q), 1e-7);
}

TEST(RdFixedSlope, BinaryUniformAtDistortionTenth) {
  auto q = independent({0.5, 0.5}, {0.3, 0.7});
  auto spec = DistortionSpec::hamming(2);
  // For a uniform bit the slope-s point has distortion 1/(1+e^s).
  auto pt = rd_fixed_slope(q, spec, std::log(9.0));
  EXPECT_NEAR(pt.distortion, 0.1, 1e-8);
  EXPECT_NEAR(pt.rate, 0.368064, 1e-6);
}

TEST(RdFixedSlope, ReturnedChannelAttainsReportedPoint) {
  auto q = testing_util::random_pmf(2, 3, 77);
  auto spec = DistortionSpec::hamming(2);
  auto pt = rd_fixed_slope(q, spec, 2.5);
  EXPECT_EQ(pt.rate, conditional_mutual_information(q, pt.channel));
  EXPECT_EQ(pt.distortion, expected_distortion(q, pt.channel, spec));
  EXPECT_LE(pt.objective_gap, 1e-9);
}

TEST(RdFixedSlope, ObjectiveTraceNeverIncreases) {
  for (int m = 0; m < 5; ++m) {
    auto q = testing_util::random_pmf(3, 3, 600 + m);
    auto spec = DistortionSpec::hamming(3);
    RdOptions opts;
    opts.record_trace = true;
    for (double s : {0.01, 0.5, 3.0, 40.0}) {
      auto pt = rd_fixed_slope(q, spec, s, opts);
      ASSERT_FALSE(pt.objective_trace.empty());
      for (std::size_t i = 1; i < pt.objective_trace.size(); ++i)
        EXPECT_LE(pt.objective_trace[i], pt.objective_trace[i - 1] + 1e-12);
    }
  }
}

TEST(RdFixedSlope, IterationCapRaisesDiagnostic) {
  auto q = testing_util::random_pmf(3, 2, 3);
  auto spec = DistortionSpec::hamming(3);
  RdOptions opts;
  opts.max_iterations = 1;
  opts.tol = 1e-15;
  try {
    rd_fixed_slope(q, spec, 1.0, opts);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.gap(), 0.0);
  }
}

TEST(RdFixedSlope, RejectsNegativeSlope) {
  auto q = testing_util::random_pmf(2, 2, 3);
  EXPECT_THROW(rd_fixed_slope(q, DistortionSpec::hamming(2), -1.0), ValidationError);
}

TEST(RdFixedSlope, MassMovesOffDominatedReconstruction) {
  // Column 3 costs no more than column 0 for every source symbol.
  DistortionSpec spec(Alphabet(2), Alphabet(4),
                      {Rational(3, 2), Rational(1, 2), Rational(0), Rational(1), Rational(1), Rational(3, 2),
                       Rational(3, 2), Rational(1)});
  JointPmf q(Alphabet(2), Alphabet(1), {0.976, 0.024});
  auto pt = rd_fixed_slope(q, spec, 10.0);
  EXPECT_LE(pt.objective_gap, 1e-9);
  EXPECT_LT(pt.iterations, 50);
}

TEST(RdFixedSlope, ConvergesOnRandomTables) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int nx = 2 + static_cast<int>(rng() % 3), ny = 1 + static_cast<int>(rng() % 3);
    const int nb = 2 + static_cast<int>(rng() % 3);
    auto q = testing_util::random_pmf(nx, ny, rng());
    std::vector<Rational> d;
    for (int i = 0; i < nx * nb; ++i) d.emplace_back(static_cast<long>(rng() % 4), 2);
    DistortionSpec spec(Alphabet(nx), Alphabet(nb), d);
    const double dmin = detail::minimum_distortion(q, spec);
    const double d0 = rd_fixed_slope(q, spec, 0.0).distortion;
    const double u = static_cast<double>(rng() % 1000) / 1000.0;
    const Rational delta = exact_rational(dmin + u * (d0 - dmin));
    auto pt = rd_side_info(q, spec, delta);
    EXPECT_LE(pt.distortion, to_double(delta) + 1e-9);
    EXPECT_LE(pt.rate, conditional_entropy(q) + 1e-9);
  }
}

TEST(RdSideInfo, ZeroRateRegion) {
  auto q = testing_util::random_pmf(2, 2, 5);
  auto spec = DistortionSpec::hamming(2);
  const double d0 = rd_fixed_slope(q, spec, 0.0).distortion;
  auto pt = rd_side_info(q, spec, exact_rational(d0) + Rational(1, 1000));
  EXPECT_EQ(pt.rate, 0.0);
  EXPECT_EQ(rd_side_info(q, spec, Rational(1, 2)).rate, 0.0);
}

TEST(RdSideInfo, ZeroDistortionOnDoublySymmetricSource) {
  auto q = testing_util::doubly_symmetric(Rational(1, 10));
  auto pt = rd_side_info(q, DistortionSpec::hamming(2), Rational(0));
  EXPECT_NEAR(pt.rate, 0.325083, 1e-6);
  EXPECT_LE(pt.distortion, 1e-12);
}

TEST(RdSideInfo, BernoulliPointTwoAtDistortionTenth) {
  auto q = independent({0.8, 0.2}, {0.5, 0.5});
  auto pt = rd_side_info(q, DistortionSpec::hamming(2), Rational(1, 10));
  EXPECT_NEAR(pt.rate, 0.175319, 1e-6);
  EXPECT_LE(pt.distortion, 0.1 + 1e-9);
}

TEST(RdSideInfo, DegenerateSideInformationMatchesClassical) {
  auto spec = DistortionSpec::hamming(2);
  for (double p : {0.15, 0.35}) {
    auto with_y = independent({1 - p, p}, {0.2, 0.3, 0.5});
    auto without = independent({1 - p, p}, {1.0});
    for (auto delta : {Rational(1, 20), Rational(1, 10)}) {
      const double a = rd_side_info(with_y, spec, delta).rate;
      const double b = rd_side_info(without, spec, delta).rate;
      EXPECT_NEAR(a, b, 1e-7);
      EXPECT_NEAR(b, binary_entropy(p) - binary_entropy(to_double(delta)), 1e-6);
    }
  }
}

TEST(RdSideInfo, MatchesGridOracleOnTernarySource) {
  std::vector<double> px{0.5, 0.3, 0.2};
  DistortionSpec spec(Alphabet(3), Alphabet(2),
                      {Rational(0), Rational(1), Rational(1), Rational(0), Rational(1, 2), Rational(1, 2)});
  auto q = independent(px, {1.0});
  for (auto delta : {Rational(2, 10), Rational(3, 10)}) {
    const double solver = rd_side_info(q, spec, delta).rate;
    const double oracle = grid_rate(px, spec, to_double(delta), 100);
    // The grid only overestimates; resolution 0.01 keeps it within a few 1e-3.
    EXPECT_LE(solver, oracle + 1e-9);
    EXPECT_NEAR(solver, oracle, 5e-3);
  }
}

TEST(RdSideInfo, MatchesGridOracleOnBinarySource) {
  std::vector<double> px{0.7, 0.3};
  DistortionSpec spec(Alphabet(2), Alphabet(2), {Rational(0), Rational(2), Rational(1), Rational(0)});
  auto q = independent(px, {1.0});
  const double solver = rd_side_info(q, spec, Rational(1, 5)).rate;
  const double oracle = grid_rate(px, spec, 0.2, 2000);
  EXPECT_LE(solver, oracle + 1e-9);
  EXPECT_NEAR(solver, oracle, 1e-4);
}

TEST(RdSideInfo, MonotoneAndBounded) {
  auto spec = DistortionSpec::hamming(3);
  for (int m = 0; m < 5; ++m) {
    auto q = testing_util::random_pmf(3, 2, 70 + m);
    const double h = conditional_entropy(q);
    double prev = kInfinity;
    for (int k = 0; k <= 12; ++k) {
      const double rate = rd_side_info(q, spec, Rational(k, 20)).rate;
      EXPECT_GE(rate, 0.0);
      EXPECT_LE(rate, h + 1e-9);
      EXPECT_LE(rate, prev + 1e-9);
      prev = rate;
    }
    EXPECT_NEAR(rd_side_info(q, spec, Rational(0)).rate, h, 1e-7);
  }
}

TEST(RdSideInfo, TimeSharedChannelHitsTarget) {
  auto q = testing_util::random_pmf(2, 2, 12);
  auto spec = DistortionSpec::hamming(2);
  auto pt = rd_side_info(q, spec, Rational(7, 100));
  EXPECT_NEAR(pt.distortion, 0.07, 1e-9);
  EXPECT_EQ(pt.rate, conditional_mutual_information(q, pt.channel));
}

TEST(RdSideInfo, NullSideInformationSymbolsArePruned) {
  JointPmf q(Alphabet(2), Alphabet(3), {0.4, 0.0, 0.1, 0.1, 0.0, 0.4});
  auto pt = rd_side_info(q, DistortionSpec::hamming(2), Rational(0));
  EXPECT_NEAR(pt.rate, conditional_entropy(q), 1e-9);
}

TEST(RdSideInfo, Errors) {
  auto q = testing_util::random_pmf(2, 2, 1);
  auto spec = DistortionSpec::hamming(2);
  EXPECT_THROW(rd_side_info(q, spec, Rational(-1, 10)), ValidationError);
  DistortionSpec floor(Alphabet(2), Alphabet(1), {Rational(1, 2), Rational(1)});
  EXPECT_THROW(rd_side_info(q, floor, Rational(1, 4)), InfeasibleDistortion);
  EXPECT_THROW(rd_side_info(q, DistortionSpec::hamming(3), Rational(0)), ValidationError);
}

TEST(RdCurve, ConvexAndNonIncreasing) {
  for (int m = 0; m < 5; ++m) {
    auto q = testing_util::random_pmf(3, 2, 200 + m);
    DistortionSpec spec(Alphabet(3), Alphabet(3),
                        {Rational(0), Rational(1), Rational(2), Rational(1), Rational(0), Rational(1),
                         Rational(2), Rational(1), Rational(0)});
    auto curve = rd_curve(q, spec);
    ASSERT_EQ(curve.points.size(), 67u);
    for (std::size_t i = 1; i < curve.points.size(); ++i)
      EXPECT_GE(curve.points[i].distortion, curve.points[i - 1].distortion);
    auto check = check_curve(curve);
    EXPECT_TRUE(check.non_increasing) << check.worst_violation;
    EXPECT_TRUE(check.convex) << check.worst_violation;
  }
}

}  // namespace
}  // namespace deception

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "deception/prob_core.hpp"
#include "test_util.hpp"

namespace deception {
namespace {

TEST(Entropy, UniformAndPointMass) {
  std::vector<double> u(4, 0.25);
  EXPECT_NEAR(entropy(u), std::log(4.0), 1e-12);
  std::vector<double> point{0.0, 1.0, 0.0};
  EXPECT_EQ(entropy(point), 0.0);
}

TEST(Entropy, TwoPoint) {
  std::vector<double> p{0.25, 0.75};
  EXPECT_NEAR(entropy(p), 0.562335, 1e-6);
}

TEST(Entropy, RejectsInvalidVectors) {
  std::vector<double> neg{-0.1, 1.1};
  EXPECT_THROW(entropy(neg), ValidationError);
  std::vector<double> short_sum{0.5, 0.4};
  EXPECT_THROW(entropy(short_sum), ValidationError);
}

TEST(KlDivergence, IdentityIsZero) {
  auto p = testing_util::random_pmf(3, 2, 7);
  EXPECT_EQ(kl_divergence(p, p), 0.0);
}

TEST(KlDivergence, BernoulliPair) {
  JointPmf q(Alphabet(2), Alphabet(1), {0.5, 0.5});
  JointPmf p(Alphabet(2), Alphabet(1), {0.25, 0.75});
  EXPECT_NEAR(kl_divergence(q, p), 0.143841, 1e-6);
}

TEST(KlDivergence, SupportViolationIsInfinite) {
  JointPmf q(Alphabet(2), Alphabet(1), {0.5, 0.5});
  JointPmf p(Alphabet(2), Alphabet(1), {1.0, 0.0});
  EXPECT_TRUE(std::isinf(kl_divergence(q, p)));
}

TEST(KlDivergence, ShapeMismatchThrows) {
  JointPmf q(Alphabet(2), Alphabet(1), {0.5, 0.5});
  JointPmf p(Alphabet(1), Alphabet(2), {0.5, 0.5});
  EXPECT_THROW(kl_divergence(q, p), ValidationError);
}

TEST(KlDivergence, NonNegativeAndZeroOnlyAtEquality) {
  for (int trial = 0; trial < 200; ++trial) {
    auto q = testing_util::random_pmf(3, 2, 100 + trial);
    auto p = testing_util::random_pmf(3, 2, 1000 + trial);
    const double d = kl_divergence(q, p);
    EXPECT_GE(d, 0.0);
    double l1 = 0.0;
    for (std::size_t i = 0; i < q.cells(); ++i) l1 += std::abs(q.mass()[i] - p.mass()[i]);
    if (l1 > 1e-6) {
      EXPECT_GT(d, 0.0);
    }
    EXPECT_LE(kl_divergence(q, q), 1e-12);
  }
}

TEST(KlDivergence, EntropyPlusDivergenceFromUniformIsLogSize) {
  for (int trial = 0; trial < 50; ++trial) {
    auto p = testing_util::random_pmf(5, 1, 300 + trial);
    std::vector<double> u(5, 0.2);
    EXPECT_NEAR(entropy(p.mass()) + kl_divergence(p.mass(), u), std::log(5.0), 1e-12);
  }
}

TEST(ConditionalMutualInformation, ZeroWhenChannelIgnoresX) {
  auto q = testing_util::random_pmf(3, 2, 11);
  std::vector<std::vector<double>> w{{0.2, 0.8}, {0.6, 0.4}};
  auto v = TestChannel::from_output_law(3, w);
  EXPECT_NEAR(conditional_mutual_information(q, v), 0.0, 1e-15);
}

TEST(ConditionalMutualInformation, IdentityChannelOnUniformBit) {
  JointPmf q(Alphabet(2), Alphabet(2), {0.25, 0.25, 0.25, 0.25});
  TestChannel v(2, 2, 2, {1, 0, 1, 0, 0, 1, 0, 1});
  EXPECT_NEAR(conditional_mutual_information(q, v), std::log(2.0), 1e-12);
}

TEST(ConditionalMutualInformation, BoundedByLogOutputSize) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto q = testing_util::random_pmf(3, 2, 500 + trial);
    auto v = testing_util::random_channel(3, 2, 4, rng);
    const double i = conditional_mutual_information(q, v);
    EXPECT_GE(i, 0.0);
    EXPECT_LE(i, std::log(4.0) + 1e-12);
  }
}

TEST(ConditionalMutualInformation, InvariantUnderRelabeling) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const int nx = 3, ny = 2, nb = 3;
    auto q = testing_util::random_pmf(nx, ny, 900 + trial);
    auto v = testing_util::random_channel(nx, ny, nb, rng);
    std::vector<int> px{2, 0, 1}, py{1, 0}, pb{1, 2, 0};
    std::shuffle(px.begin(), px.end(), rng);
    std::shuffle(pb.begin(), pb.end(), rng);
    std::vector<double> qm(nx * ny), vm(nx * ny * nb);
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) {
        qm[px[x] * ny + py[y]] = q(x, y);
        for (int b = 0; b < nb; ++b) vm[(px[x] * ny + py[y]) * nb + pb[b]] = v(b, x, y);
      }
    JointPmf q2(Alphabet(nx), Alphabet(ny), qm);
    TestChannel v2(nx, ny, nb, vm);
    EXPECT_NEAR(conditional_mutual_information(q, v), conditional_mutual_information(q2, v2), 1e-12);
  }
}

TEST(ConditionalMutualInformation, ShapeMismatchThrows) {
  auto q = testing_util::random_pmf(3, 2, 1);
  TestChannel v(2, 2, 2, {1, 0, 1, 0, 0, 1, 0, 1});
  EXPECT_THROW(conditional_mutual_information(q, v), ValidationError);
}

TEST(SequenceDistortion, HammingExamples) {
  auto spec = DistortionSpec::hamming(2);
  Sequence a{0, 1, 1}, b{0, 1, 0};
  EXPECT_EQ(sequence_distortion(a, b, spec), Rational(1, 3));
  EXPECT_EQ(sequence_distortion(a, a, spec), Rational(0));
}

TEST(SequenceDistortion, AsymmetricTable) {
  DistortionSpec spec(Alphabet(2), Alphabet(2), {Rational(0), Rational(2), Rational(1), Rational(0)});
  Sequence x{0, 1}, xh{1, 1};
  EXPECT_EQ(sequence_distortion(x, xh, spec), Rational(1));
  EXPECT_EQ(spec.d_max(), Rational(2));
}

TEST(SequenceDistortion, Errors) {
  auto spec = DistortionSpec::hamming(2);
  Sequence a{0, 1}, b{0};
  EXPECT_THROW(sequence_distortion(a, b, spec), ValidationError);
  Sequence c{0, 2};
  EXPECT_THROW(sequence_distortion(a, c, spec), ValidationError);
}

TEST(SequenceDistortion, InvariantUnderJointPermutation) {
  std::mt19937_64 rng(21);
  DistortionSpec spec(Alphabet(3), Alphabet(2),
                      {Rational(0), Rational(1, 3), Rational(5, 7), Rational(2), Rational(1), Rational(0)});
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 9);
    Sequence x(n), xh(n);
    for (int i = 0; i < n; ++i) {
      x[i] = static_cast<int>(rng() % 3);
      xh[i] = static_cast<int>(rng() % 2);
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Sequence px(n), pxh(n);
    for (int i = 0; i < n; ++i) {
      px[perm[i]] = x[i];
      pxh[perm[i]] = xh[i];
    }
    EXPECT_EQ(sequence_distortion(x, xh, spec), sequence_distortion(px, pxh, spec));
  }
}

TEST(JointPmf, ValidationAndRenormalization) {
  EXPECT_THROW(JointPmf(Alphabet(2), Alphabet(1), {0.5, 0.4}), ValidationError);
  EXPECT_THROW(JointPmf(Alphabet(2), Alphabet(1), {-0.5, 1.5}), ValidationError);
  EXPECT_THROW(JointPmf(Alphabet(2), Alphabet(2), {0.5, 0.5}), ValidationError);
  JointPmf p(Alphabet(2), Alphabet(1), {0.5 + 4e-13, 0.5});
  EXPECT_NEAR(p.mass()[0] + p.mass()[1], 1.0, 1e-15);

  auto e = JointPmf::exact(Alphabet(2), Alphabet(2),
                           {Rational(9, 20), Rational(1, 20), Rational(1, 20), Rational(9, 20)});
  ASSERT_TRUE(e.has_exact());
  EXPECT_EQ(e.exact_mass()[0], Rational(9, 20));
  EXPECT_DOUBLE_EQ(e.y_marginal()[0], 0.5);
}

TEST(JointPmf, ExactMassOfFloatTableIsExact) {
  JointPmf p(Alphabet(2), Alphabet(1), {0.25, 0.75});
  EXPECT_EQ(p.exact_mass()[1], Rational(3, 4));
}

TEST(Alphabet, Invariants) {
  EXPECT_THROW(Alphabet(0), ValidationError);
  EXPECT_THROW(Alphabet(std::vector<std::string>{"a", "a"}), ValidationError);
  Alphabet a(std::vector<std::string>{"A", "C", "G", "T"});
  EXPECT_EQ(a.size(), 4);
  EXPECT_EQ(a.label(2), "G");
}

TEST(TestChannel, RowsMustSumToOne) {
  EXPECT_THROW(TestChannel(1, 1, 2, {0.5, 0.4}), ValidationError);
  EXPECT_THROW(TestChannel(1, 1, 2, {1.5, -0.5}), ValidationError);
}

TEST(DistortionBudget, ThresholdAddsSlack) {
  DistortionBudget b(Rational(1, 4), Rational(1, 8));
  EXPECT_EQ(b.threshold(), Rational(3, 8));
  EXPECT_THROW(DistortionBudget(Rational(-1)), ValidationError);
}

TEST(IntegerCosts, ExactThreshold) {
  DistortionSpec spec(Alphabet(2), Alphabet(2), {Rational(0), Rational(1, 3), Rational(1, 2), Rational(0)});
  auto c = IntegerCosts::from(spec, 4);
  EXPECT_EQ(c.denominator, 6);
  EXPECT_EQ(c(0, 1), 2);
  EXPECT_EQ(c(1, 0), 3);
  // 4 * (1/4) * 6 = 6
  EXPECT_EQ(c.threshold(Rational(1, 4), 4), 6);
  // 3 * (1/5) * 6 = 3.6 -> 3
  EXPECT_EQ(c.threshold(Rational(1, 5), 3), 3);
}

TEST(ParseRational, Forms) {
  EXPECT_EQ(parse_rational("1/3"), Rational(1, 3));
  EXPECT_EQ(parse_rational("2/4"), Rational(1, 2));
  EXPECT_EQ(parse_rational("7"), Rational(7));
  EXPECT_EQ(parse_rational("0.45"), Rational(9, 20));
  EXPECT_THROW(parse_rational("1/0"), ValidationError);
  EXPECT_THROW(parse_rational("abc"), ValidationError);
  EXPECT_THROW(parse_rational("1/"), ValidationError);
  EXPECT_THROW(parse_rational(""), ValidationError);
}

}  // namespace
}  // namespace deception

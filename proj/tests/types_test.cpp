#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "deception/types.hpp"
#include "test_util.hpp"

namespace deception {
namespace {

TEST(EnumerateTypes, SmallCases) {
  auto t = enumerate_types(2, 2);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t[0].counts(), (std::vector<int>{2, 0}));
  EXPECT_EQ(t[1].counts(), (std::vector<int>{1, 1}));
  EXPECT_EQ(t[2].counts(), (std::vector<int>{0, 2}));
  EXPECT_EQ(enumerate_types(1, 5).size(), 5u);
  EXPECT_EQ(enumerate_types(4, 3).size(), 15u);
}

TEST(EnumerateTypes, MatchesBruteForceAndIsDistinct) {
  for (int size = 1; size <= 4; ++size)
    for (int n = 1; n <= 6; ++n) {
      std::set<std::vector<int>> seen;
      for (const auto& s : all_sequences(size, n)) seen.insert(TypeClass::of(s, size).counts());
      auto types = enumerate_types(n, size);
      std::set<std::vector<int>> listed;
      for (const auto& t : types) listed.insert(t.counts());
      EXPECT_EQ(listed.size(), types.size());
      EXPECT_EQ(listed, seen);
    }
}

TEST(EnumerateTypes, Guards) {
  EXPECT_THROW(enumerate_types(0, 2), ValidationError);
  EXPECT_THROW(enumerate_types(200, 12), BudgetError);
}

TEST(TypeClassSize, Examples) {
  EXPECT_EQ(type_class_size(TypeClass({5, 0, 0})), 1);
  EXPECT_EQ(type_class_size(TypeClass({2, 2})), 6);
  EXPECT_EQ(type_class_size(TypeClass({3, 2, 1})), 60);
}

TEST(TypeClassSize, MatchesMemberCountAndEntropyBounds) {
  for (int size = 2; size <= 3; ++size)
    for (int n = 1; n <= 7; ++n)
      for (const auto& t : enumerate_types(n, size)) {
        std::size_t members = 0;
        for (const auto& s : all_sequences(size, n)) members += t.contains(s);
        EXPECT_EQ(type_class_size(t), Integer(static_cast<unsigned long>(members)));
        EXPECT_EQ(type_class_members(t).size(), members);
        std::vector<double> emp;
        for (int c : t.counts()) emp.push_back(static_cast<double>(c) / n);
        const double log_size = log_integer(type_class_size(t));
        const double nh = n * entropy(emp);
        EXPECT_LE(log_size, nh + 1e-9);
        EXPECT_GE(log_size, nh - size * std::log(n + 1.0) - 1e-9);
      }
}

TEST(TypeSpace, PartitionsTheSequenceSpace) {
  for (int size = 2; size <= 4; ++size)
    for (int n = 1; n <= 10; ++n) {
      Integer total = 0;
      for (const auto& t : enumerate_types(n, size)) total += type_class_size(t);
      Integer expected;
      mpz_ui_pow_ui(expected.get_mpz_t(), size, n);
      EXPECT_EQ(total, expected) << "n=" << n << " size=" << size;
    }
}

TEST(TypeSpace, TotalProbabilityIsExactlyOne) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = testing_util::random_rational_pmf(2, 2, rng);
    const auto pmf = p.exact_mass();
    for (int n = 1; n <= 6; ++n) {
      Rational total(0);
      for (const auto& t : enumerate_types(n, 4)) total += Rational(type_class_size(t)) * type_probability_exact(t, pmf);
      EXPECT_EQ(total, Rational(1));
    }
  }
}

TEST(SequenceLogProbInType, Examples) {
  JointPmf ber(Alphabet(2), Alphabet(1), {0.25, 0.75});
  EXPECT_NEAR(sequence_log_prob_in_type(TypeClass({1, 1}), ber), 0.836988, 1e-6);
  EXPECT_NEAR(sequence_log_prob_in_type(TypeClass({1, 1}), ber), 0.143841 + std::log(2.0), 1e-6);
  EXPECT_NEAR(sequence_log_prob_in_type(TypeClass({1, 3}), ber), entropy(ber.mass()), 1e-12);
  EXPECT_NEAR(sequence_log_prob_in_type(TypeClass({0, 4}), ber), -std::log(0.75), 1e-12);
  JointPmf point(Alphabet(2), Alphabet(1), {1.0, 0.0});
  EXPECT_TRUE(std::isinf(sequence_log_prob_in_type(TypeClass({1, 1}), point)));
  EXPECT_THROW(sequence_log_prob_in_type(TypeClass({1, 1, 1}), ber), ValidationError);
}

TEST(SequenceLogProbInType, AgreesWithExactProbability) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    auto p = testing_util::random_rational_pmf(3, 2, rng);
    for (const auto& t : enumerate_types(4, 6)) {
      const double value = sequence_log_prob_in_type(t, p);
      const double exact = -log_rational(type_probability_exact(t, p.exact_mass())) / 4.0;
      EXPECT_NEAR(value, exact, 1e-12);
    }
  }
}

TEST(HammingBall, Examples) {
  EXPECT_EQ(hamming_ball_size(4, 0, 3), 1);
  EXPECT_EQ(hamming_ball_size(3, 1, 2), 4);
  EXPECT_EQ(hamming_ball_size(5, 2, 3), 51);
  EXPECT_EQ(hamming_ball_size(4, 4, 3), 81);
  EXPECT_THROW(hamming_ball_size(3, 4, 2), ValidationError);
}

TEST(HammingBall, MatchesNeighborhoodAndBound) {
  for (int size = 2; size <= 3; ++size)
    for (int n = 1; n <= 6; ++n)
      for (int l = 0; l <= n; ++l) {
        std::set<Sequence> center{Sequence(n, 0)};
        EXPECT_EQ(Integer(static_cast<unsigned long>(hamming_neighborhood(center, l, size).size())),
                  hamming_ball_size(n, l, size));
        if (2 * l <= n) {
          EXPECT_TRUE(hamming_ball_bound(n, l, size).holds);
        }
      }
  for (int n = 10; n <= 60; n += 10)
    for (int l = 0; 2 * l <= n; ++l) EXPECT_TRUE(hamming_ball_bound(n, l, 4).holds);
}

TEST(HammingNeighborhood, Examples) {
  std::set<Sequence> s{{0, 1, 1}};
  EXPECT_EQ(hamming_neighborhood(s, 0, 2), s);
  EXPECT_EQ(hamming_neighborhood(s, 3, 2).size(), 8u);
  std::set<Sequence> pair{{0, 0}, {1, 1}};
  EXPECT_EQ(hamming_neighborhood(pair, 1, 2).size(), 4u);
}

TEST(HammingNeighborhood, MonotoneAndCommutesWithPermutations) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4), size = 2 + static_cast<int>(rng() % 2);
    std::set<Sequence> s;
    const int members = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < members; ++k) s.insert(sequence_unrank(rng() % sequence_count(size, n), size, n));
    std::vector<int> im(n);
    std::iota(im.begin(), im.end(), 0);
    std::shuffle(im.begin(), im.end(), rng);
    Permutation pi(im);
    for (int l = 0; l <= n; ++l) {
      auto ball = hamming_neighborhood(s, l, size);
      EXPECT_EQ(pi.apply(ball), hamming_neighborhood(pi.apply(s), l, size));
      if (l > 0) {
        auto smaller = hamming_neighborhood(s, l - 1, size);
        EXPECT_TRUE(std::includes(ball.begin(), ball.end(), smaller.begin(), smaller.end()));
      }
    }
  }
}

TEST(HammingNeighborhood, BlowUpMassGrowsWithRadius) {
  // A type class of small probability gains mass under a growing neighborhood.
  const std::vector<Rational> pmf{Rational(1, 5), Rational(4, 5)};
  auto members = type_class_members(TypeClass({4, 2}));
  std::set<Sequence> s(members.begin(), members.end());
  Rational prev = set_probability(s, pmf);
  for (int l = 1; l <= 6; ++l) {
    const Rational mass = set_probability(hamming_neighborhood(s, l, 2), pmf);
    EXPECT_GE(mass, prev);
    prev = mass;
  }
  EXPECT_EQ(prev, Rational(1));
}

TEST(Permutation, DistortionIsInvariant) {
  std::mt19937_64 rng(2);
  auto spec = DistortionSpec(Alphabet(3), Alphabet(3),
                             {Rational(0), Rational(1, 2), Rational(2), Rational(1), Rational(0), Rational(3, 4),
                              Rational(1, 3), Rational(5), Rational(0)});
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    Sequence x(n), xh(n);
    for (int i = 0; i < n; ++i) {
      x[i] = static_cast<int>(rng() % 3);
      xh[i] = static_cast<int>(rng() % 3);
    }
    std::vector<int> im(n);
    std::iota(im.begin(), im.end(), 0);
    std::shuffle(im.begin(), im.end(), rng);
    Permutation pi(im);
    EXPECT_EQ(sequence_distortion(x, xh, spec), sequence_distortion(pi.apply(x), pi.apply(xh), spec));
  }
  EXPECT_THROW(Permutation({0, 0}), ValidationError);
}

TEST(GreedyPermutationCover, Examples) {
  TypeClass t({1, 1});
  auto whole = type_class_members(t);
  EXPECT_EQ(greedy_permutation_cover(whole, t).permutations.size(), 1u);
  auto single = greedy_permutation_cover({{0, 1}}, t);
  ASSERT_EQ(single.permutations.size(), 2u);
  EXPECT_EQ(single.permutations[0], Permutation::identity(2));
}

TEST(GreedyPermutationCover, Guards) {
  TypeClass t({2, 1});
  EXPECT_THROW(greedy_permutation_cover({}, t), ValidationError);
  EXPECT_THROW(greedy_permutation_cover({{1, 1, 0, 0}}, t), ValidationError);
  EXPECT_THROW(greedy_permutation_cover({Sequence(9, 0)}, TypeClass({9, 0})), BudgetError);
}

TEST(GreedyPermutationCover, CoversAndMeetsBound) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5), size = 2 + static_cast<int>(rng() % 2);
    const auto t = TypeClass::of(sequence_unrank(rng() % sequence_count(size, n), size, n), size);
    auto members = type_class_members(t);
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t k = 1 + rng() % members.size();
    std::vector<Sequence> s(members.begin(), members.begin() + static_cast<long>(k));
    auto cover = greedy_permutation_cover(s, t);
    std::set<Sequence> covered;
    for (const auto& pi : cover.permutations)
      for (const auto& v : s) covered.insert(pi.apply(v));
    EXPECT_EQ(covered.size(), members.size());
    EXPECT_LE(static_cast<std::int64_t>(cover.permutations.size()), cover.bound);
  }
}

TEST(GreedyPermutationCover, JointTypeMovesPairsTogether) {
  // Joint sequence over X x Y with |Y| = 2; pairs are symbols x * 2 + y.
  Sequence x{0, 1, 1, 0}, y{1, 1, 0, 0};
  const auto joint = encode_pairs(x, y, 2);
  const auto t = TypeClass::of(joint, 4);
  auto cover = greedy_permutation_cover({joint}, t);
  EXPECT_EQ(cover.class_size, 24);
  for (const auto& pi : cover.permutations) {
    auto [px, py] = decode_pairs(pi.apply(joint), 2);
    EXPECT_EQ(px, pi.apply(x));
    EXPECT_EQ(py, pi.apply(y));
  }
}

}  // namespace
}  // namespace deception

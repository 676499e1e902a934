#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "deception/prob_core.hpp"

namespace deception::testing_util {

// Strictly positive random joint pmf (Dirichlet(1) via normalized exponentials).
inline JointPmf random_pmf(int nx, int ny, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> e(1.0);
  std::vector<double> m(static_cast<std::size_t>(nx) * ny);
  double s = 0.0;
  for (double& v : m) {
    v = e(rng) + 1e-3;
    s += v;
  }
  for (double& v : m) v /= s;
  return JointPmf(Alphabet(nx), Alphabet(ny), m);
}

// Random pmf with rational entries k_i / sum(k), k_i in [1, max_weight].
inline JointPmf random_rational_pmf(int nx, int ny, std::mt19937_64& rng, int max_weight = 9) {
  std::vector<Rational> m(static_cast<std::size_t>(nx) * ny);
  long total = 0;
  std::vector<long> k(m.size());
  for (auto& v : k) {
    v = 1 + static_cast<long>(rng() % static_cast<std::uint64_t>(max_weight));
    total += v;
  }
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = Rational(k[i], total);
  return JointPmf::exact(Alphabet(nx), Alphabet(ny), m);
}

inline TestChannel random_channel(int nx, int ny, int nb, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> t(static_cast<std::size_t>(nx) * ny * nb);
  for (int r = 0; r < nx * ny; ++r) {
    double s = 0.0;
    for (int b = 0; b < nb; ++b) s += (t[r * nb + b] = e(rng));
    for (int b = 0; b < nb; ++b) t[r * nb + b] /= s;
  }
  return TestChannel(nx, ny, nb, t);
}

// Binary X uniform, Y = X through a binary symmetric observation with the given crossover.
inline JointPmf doubly_symmetric(const Rational& crossover) {
  const Rational half(1, 2);
  return JointPmf::exact(Alphabet(2), Alphabet(2),
                         {half * (1 - crossover), half * crossover, half * crossover, half * (1 - crossover)});
}

}  // namespace deception::testing_util

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <vector>

#include "deception/oracle.hpp"
#include "deception/prob_core.hpp"
#include "deception/rd_side_info.hpp"
#include "deception/sequences.hpp"
#include "deception/types.hpp"

namespace deception {

inline constexpr std::uint64_t kCodebookBudget = 1u << 20;

// A blocklength-n code with side information at both ends. Indices run 1..index_count.
class EncoderDecoder {
 public:
  using Encoder = std::function<std::size_t(const Sequence& x, const Sequence& y)>;
  using Decoder = std::function<Sequence(std::size_t index, const Sequence& y)>;

  // type_invariant: the acceptance probability of decode(i, y) depends on y only
  // through its type, so bin masses may be summed over side-information types.
  EncoderDecoder(int n, std::size_t index_count, Encoder encode, Decoder decode, bool type_invariant = false)
      : n_(n), count_(index_count), encode_(std::move(encode)), decode_(std::move(decode)), type_invariant_(type_invariant) {
    if (n_ < 1) throw ValidationError("code needs n >= 1");
    if (count_ < 1) throw ValidationError("code needs at least one index");
    if (!encode_ || !decode_) throw ValidationError("code needs an encoder and a decoder");
  }

  int n() const { return n_; }
  std::size_t index_count() const { return count_; }
  bool type_invariant() const { return type_invariant_; }

  std::size_t encode(const Sequence& x, const Sequence& y) const {
    check_length(x);
    check_length(y);
    const std::size_t i = encode_(x, y);
    if (i < 1 || i > count_) throw ValidationError("encoder returned index " + std::to_string(i) + " outside 1.." +
                                                   std::to_string(count_));
    return i;
  }

  Sequence decode(std::size_t index, const Sequence& y) const {
    check_index(index);
    check_length(y);
    Sequence out = decode_(index, y);
    check_length(out);
    return out;
  }

  void check_index(std::size_t index) const {
    if (index < 1 || index > count_)
      throw ValidationError("bin index " + std::to_string(index) + " outside 1.." + std::to_string(count_));
  }

 private:
  void check_length(const Sequence& s) const {
    if (static_cast<int>(s.size()) != n_) throw ValidationError("sequence length differs from the code's n");
  }

  int n_;
  std::size_t count_;
  Encoder encode_;
  Decoder decode_;
  bool type_invariant_;
};

namespace detail {

// Sum of weight(y) * value(y) over side-information sequences with positive
// probability, grouped by type when the summand depends on y only through it.
inline Rational sum_over_side_information(const ExactModel& m, bool by_type,
                                          const std::function<Rational(const Sequence&)>& value) {
  Rational total(0);
  if (by_type) {
    for (const auto& t : enumerate_types(m.n, m.ny)) {
      const Sequence rep = t.representative();
      const Rational py = m.sequence_prob(rep);
      if (sgn(py) == 0) continue;
      total += Rational(type_class_size(t)) * py * value(rep);
    }
    return total;
  }
  if (sequence_count(m.ny, m.n) > kEnumerationBudget) throw BudgetError("side-information space exceeds the budget");
  Sequence y(m.n, 0);
  do {
    const Rational py = m.sequence_prob(y);
    if (sgn(py) == 0) continue;
    total += py * value(y);
  } while (next_sequence(y, m.ny));
  return total;
}

}  // namespace detail

// P^n{ (x^n, y^n) : d(x^n, decode(i, y^n)) <= delta }.
inline Rational bin_acceptance_mass(const EncoderDecoder& code, std::size_t index, const JointPmf& p,
                                    const DistortionSpec& spec, const Rational& delta) {
  code.check_index(index);
  const detail::ExactModel m(p, spec, delta, code.n());
  return detail::sum_over_side_information(m, code.type_invariant(),
                                           [&](const Sequence& y) { return m.accept(code.decode(index, y), y); });
}

inline std::vector<Rational> bin_acceptance_masses(const EncoderDecoder& code, const JointPmf& p,
                                                   const DistortionSpec& spec, const Rational& delta) {
  std::vector<Rational> out;
  for (std::size_t i = 1; i <= code.index_count(); ++i) out.push_back(bin_acceptance_mass(code, i, p, spec, delta));
  return out;
}

// P^n{ (x^n, y^n) : d(x^n, decode(encode(x^n, y^n), y^n)) <= delta }, the mass the
// code reproduces within the distortion level.
inline Rational covered_mass(const EncoderDecoder& code, const JointPmf& p, const DistortionSpec& spec,
                             const Rational& delta) {
  const detail::ExactModel m(p, spec, delta, code.n());
  const std::uint64_t xs = sequence_count(m.nx, m.n), ys = sequence_count(m.ny, m.n);
  if (xs > kEnumerationBudget || ys > kEnumerationBudget / xs)
    throw BudgetError("covered_mass enumerates all sequence pairs");
  const auto mass = p.exact_mass();
  Rational total(0);
  Sequence y(m.n, 0);
  do {
    Sequence x(m.n, 0);
    do {
      Rational pr(1);
      for (int k = 0; k < m.n && sgn(pr) != 0; ++k) pr *= mass[p.index(x[k], y[k])];
      if (sgn(pr) == 0) continue;
      bool ok = m.always_accept;
      if (!ok) {
        const Sequence xhat = code.decode(code.encode(x, y), y);
        std::int64_t sum = 0;
        for (int k = 0; k < m.n; ++k) sum += m.costs(x[k], xhat[k]);
        ok = sum <= m.threshold;
      }
      if (ok) total += pr;
    } while (next_sequence(x, m.nx));
  } while (next_sequence(y, m.ny));
  return total;
}

struct AttackResult {
  DeceptionFunction f;
  std::size_t chosen_index = 1;
  Rational success;                 // equals the chosen bin's acceptance mass
  std::vector<Rational> bin_masses;  // indexed from bin 1
};

// Keeps the decoder row whose acceptance region carries the most mass; ties go to
// the smallest index.
inline AttackResult construct_attack(const EncoderDecoder& code, const JointPmf& p, const DistortionSpec& spec,
                                     const Rational& delta) {
  auto masses = bin_acceptance_masses(code, p, spec, delta);
  std::size_t best = 0;
  for (std::size_t i = 1; i < masses.size(); ++i)
    if (masses[i] > masses[best]) best = i;
  const std::size_t chosen = best + 1;
  DeceptionFunction f(code.n(), [code, chosen](const Sequence& y) { return code.decode(chosen, y); });
  Rational success = masses[best];
  return {std::move(f), chosen, std::move(success), std::move(masses)};
}

namespace detail {

// Positions of y in order of increasing symbol, ties by position. The k-th of them
// carries symbol k of the type's sorted representative.
inline std::vector<int> type_order(const Sequence& y) {
  std::vector<int> order(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return y[a] < y[b]; });
  return order;
}

struct Codebooks {
  int n = 0, ny = 0, nb = 0;
  std::size_t count = 0;
  bool exhaustive = false;  // every reconstruction sequence is a codeword
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> output_cdf;  // [y][b]
  std::mutex lock;
  std::map<std::vector<int>, std::vector<Sequence>> by_type;  // codewords in sorted-type coordinates

  const std::vector<Sequence>& codewords(const Sequence& y) {
    std::vector<int> counts(ny, 0);
    for (Symbol v : y) ++counts[v];
    std::lock_guard<std::mutex> guard(lock);
    auto it = by_type.find(counts);
    if (it != by_type.end()) return it->second;
    std::vector<Sequence> book;
    book.reserve(count);
    if (exhaustive) {
      const std::uint64_t total = sequence_count(nb, n);
      for (std::size_t i = 0; i < count; ++i) book.push_back(sequence_unrank(i % total, nb, n));
    } else {
      std::vector<std::uint32_t> material{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
      for (int c : counts) material.push_back(static_cast<std::uint32_t>(c));
      std::seed_seq seq(material.begin(), material.end());
      std::mt19937_64 rng(seq);
      Sequence rep;
      for (int v = 0; v < ny; ++v) rep.insert(rep.end(), counts[v], v);
      for (std::size_t i = 0; i < count; ++i) {
        Sequence c(n);
        for (int k = 0; k < n; ++k) {
          const auto& cdf = output_cdf[rep[k]];
          const auto at = std::upper_bound(cdf.begin(), cdf.end(), uniform01(rng)) - cdf.begin();
          c[k] = static_cast<Symbol>(std::min<std::ptrdiff_t>(at, nb - 1));
        }
        book.push_back(std::move(c));
      }
    }
    return by_type.emplace(counts, std::move(book)).first->second;
  }

  Sequence place(const Sequence& codeword, const Sequence& y) const {
    const auto order = type_order(y);
    Sequence out(n);
    for (int k = 0; k < n; ++k) out[order[k]] = codeword[k];
    return out;
  }
};

}  // namespace detail

// Random codebook of ceil(exp(n * rate)) reconstruction sequences per side-information
// type, drawn symbol-wise from the output law of the channel achieving R_SI(q, delta),
// with nearest-codeword encoding (ties to the smallest index). When the count reaches
// |Xhat|^n the codebook lists every reconstruction sequence instead.
inline EncoderDecoder random_rd_code(const JointPmf& q, const DistortionSpec& spec, const Rational& delta, int n,
                                     double rate_nats, std::uint64_t seed, const RdOptions& rd = {}) {
  if (q.x_size() != spec.x_size()) throw ValidationError("joint pmf and distortion table disagree on |X|");
  if (n < 1) throw ValidationError("blocklength must be >= 1");
  if (!(rate_nats >= 0.0) || !std::isfinite(rate_nats)) throw ValidationError("rate must be finite and >= 0");
  const double raw = std::exp(static_cast<double>(n) * rate_nats);
  if (!(raw <= static_cast<double>(kCodebookBudget))) throw BudgetError("codebook larger than 2^20 codewords");
  const auto count = static_cast<std::size_t>(std::max(1.0, std::ceil(raw * (1.0 - 1e-12))));

  auto books = std::make_shared<detail::Codebooks>();
  books->n = n;
  books->ny = q.y_size();
  books->nb = spec.xhat_size();
  books->count = count;
  books->seed = seed;
  const std::uint64_t total = sequence_count(spec.xhat_size(), n);
  books->exhaustive = static_cast<std::uint64_t>(count) >= total;
  if (!books->exhaustive) {
    const auto point = rd_side_info(q, spec, delta, rd);
    const auto qy = q.y_marginal();
    for (int y = 0; y < q.y_size(); ++y) {
      std::vector<double> w(spec.xhat_size(), 0.0);
      for (int x = 0; x < q.x_size(); ++x)
        for (int b = 0; b < spec.xhat_size(); ++b)
          w[b] += (qy[y] > 0.0 ? q(x, y) / qy[y] : 1.0 / q.x_size()) * point.channel.row(x, y)[b];
      std::vector<double> cdf;
      double acc = 0.0;
      for (double v : w) cdf.push_back(acc += v);
      for (double& v : cdf) v /= acc;
      cdf.back() = 1.0;
      books->output_cdf.push_back(std::move(cdf));
    }
  }

  const auto costs = std::make_shared<IntegerCosts>(IntegerCosts::from(spec, n));
  auto encode = [books, costs](const Sequence& x, const Sequence& y) {
    const auto& book = books->codewords(y);
    const auto order = detail::type_order(y);
    std::size_t best = 0;
    std::int64_t best_cost = std::numeric_limits<std::int64_t>::max();
    for (std::size_t i = 0; i < book.size(); ++i) {
      std::int64_t c = 0;
      for (int k = 0; k < books->n && c < best_cost; ++k) c += (*costs)(x[order[k]], book[i][k]);
      if (c < best_cost) best_cost = c, best = i;
    }
    return best + 1;
  };
  auto decode = [books](std::size_t index, const Sequence& y) {
    for (Symbol v : y)
      if (v < 0 || v >= books->ny) throw ValidationError("side information symbol outside alphabet");
    return books->place(books->codewords(y)[index - 1], y);
  };
  return EncoderDecoder(n, count, std::move(encode), std::move(decode), true);
}

// Frequency with which the code's reconstruction misses the distortion level on
// pairs drawn i.i.d. from q; `successes` counts the misses.
inline MonteCarloEstimate code_violation_rate(const EncoderDecoder& code, const JointPmf& q,
                                              const DistortionSpec& spec, const Rational& delta,
                                              std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  const detail::ExactModel m(q, spec, delta, code.n());
  const detail::JointSampler sampler(q);
  std::mt19937_64 rng(seed);
  MonteCarloEstimate out;
  out.trials = trials;
  Sequence x(code.n()), y(code.n());
  for (std::uint64_t t = 0; t < trials; ++t) {
    sampler.draw(rng, x, y);
    if (m.always_accept) continue;
    const Sequence xhat = code.decode(code.encode(x, y), y);
    std::int64_t sum = 0;
    for (int k = 0; k < code.n(); ++k) sum += m.costs(x[k], xhat[k]);
    out.successes += sum > m.threshold;
  }
  out.estimate = static_cast<double>(out.successes) / static_cast<double>(trials);
  out.standard_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(trials));
  return out;
}

}  // namespace deception

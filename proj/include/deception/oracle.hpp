#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "deception/prob_core.hpp"
#include "deception/sequences.hpp"
#include "deception/types.hpp"

namespace deception {

// Adversary map y^n -> xhat^n.
class DeceptionFunction {
 public:
  using Map = std::function<Sequence(const Sequence&)>;

  DeceptionFunction(int n, Map f) : n_(n), f_(std::move(f)) {
    if (n_ < 1) throw ValidationError("deception function needs n >= 1");
    if (!f_) throw ValidationError("deception function needs a mapping");
  }

  static DeceptionFunction constant(Sequence xhat) {
    const int n = static_cast<int>(xhat.size());
    return DeceptionFunction(n, [xhat = std::move(xhat)](const Sequence&) { return xhat; });
  }

  static DeceptionFunction from_table(int n, std::map<Sequence, Sequence> table) {
    return DeceptionFunction(n, [table = std::move(table)](const Sequence& y) {
      auto it = table.find(y);
      if (it == table.end()) throw ValidationError("deception table has no entry for this side information");
      return it->second;
    });
  }

  int n() const { return n_; }

  Sequence operator()(const Sequence& y) const {
    if (static_cast<int>(y.size()) != n_) throw ValidationError("side information length differs from n");
    Sequence out = f_(y);
    if (static_cast<int>(out.size()) != n_) throw ValidationError("deception function returned wrong length");
    return out;
  }

 private:
  int n_;
  Map f_;
};

namespace detail {

// Exact P_Y and P(x | y), plus the integer distortion image for blocklength n.
struct ExactModel {
  int nx = 0, ny = 0, nb = 0, n = 0;
  std::vector<Rational> py;
  std::vector<std::vector<Rational>> px_given_y;  // [y][x]
  IntegerCosts costs;
  std::int64_t threshold = 0;
  bool always_accept = false;

  ExactModel(const JointPmf& p, const DistortionSpec& spec, const Rational& level, int blocklength)
      : nx(p.x_size()), ny(p.y_size()), nb(spec.xhat_size()), n(blocklength) {
    const Rational delta = canonical(level);
    if (p.x_size() != spec.x_size()) throw ValidationError("joint pmf and distortion table disagree on |X|");
    if (n < 1) throw ValidationError("blocklength must be >= 1");
    if (sgn(delta) < 0) throw ValidationError("distortion level must be >= 0");
    const auto mass = p.exact_mass();
    py.assign(ny, Rational(0));
    for (int x = 0; x < nx; ++x)
      for (int y = 0; y < ny; ++y) py[y] += mass[p.index(x, y)];
    px_given_y.assign(ny, std::vector<Rational>(nx, Rational(0)));
    for (int y = 0; y < ny; ++y)
      if (sgn(py[y]) > 0)
        for (int x = 0; x < nx; ++x) px_given_y[y][x] = mass[p.index(x, y)] / py[y];
    always_accept = delta >= spec.d_max();
    if (!always_accept) {
      costs = IntegerCosts::from(spec, n);
      threshold = costs.threshold(delta, n);
      if (threshold > 10'000'000) throw BudgetError("distortion threshold needs more than 1e7 partial-sum states");
    }
  }

  // Fold `count` positions with side information y and reconstruction b into the
  // distribution of the running integer distortion sum, dropping sums over threshold.
  void convolve(std::vector<Rational>& dist, Symbol y, Symbol b, int count) const {
    for (int k = 0; k < count; ++k) {
      std::vector<Rational> next(dist.size(), Rational(0));
      for (std::size_t s = 0; s < dist.size(); ++s) {
        if (sgn(dist[s]) == 0) continue;
        for (int x = 0; x < nx; ++x) {
          if (sgn(px_given_y[y][x]) == 0) continue;
          const std::size_t t = s + static_cast<std::size_t>(costs(x, b));
          if (t < next.size()) next[t] += dist[s] * px_given_y[y][x];
        }
      }
      dist.swap(next);
    }
  }

  std::vector<Rational> start() const {
    std::vector<Rational> d(static_cast<std::size_t>(threshold) + 1, Rational(0));
    d[0] = 1;
    return d;
  }

  static Rational total(const std::vector<Rational>& dist) {
    Rational s(0);
    for (const auto& v : dist) s += v;
    return s;
  }

  Rational sequence_prob(const Sequence& y) const {
    Rational out(1);
    for (Symbol v : y) out *= py[v];
    return out;
  }

  void check_side_information(const Sequence& y) const {
    if (static_cast<int>(y.size()) != n) throw ValidationError("side information length differs from n");
    for (Symbol v : y) {
      if (v < 0 || v >= ny) throw ValidationError("side information symbol outside alphabet");
      if (sgn(py[v]) == 0) throw ValidationError("side information symbol has zero probability");
    }
  }

  Rational accept(const Sequence& xhat, const Sequence& y) const {
    check_side_information(y);
    if (static_cast<int>(xhat.size()) != n) throw ValidationError("reconstruction length differs from n");
    for (Symbol b : xhat)
      if (b < 0 || b >= nb) throw ValidationError("reconstruction symbol outside alphabet");
    if (always_accept) return Rational(1);
    auto dist = start();
    for (int i = 0; i < n; ++i) convolve(dist, y[i], xhat[i], 1);
    return total(dist);
  }
};

}  // namespace detail

// Pr( sum_i d(X_i, xhat_i) <= n delta | Y^n = y ), X_i ~ P(. | y_i) independently.
inline Rational acceptance_probability(const Sequence& xhat, const Sequence& y, const JointPmf& p,
                                       const DistortionSpec& spec, const Rational& delta) {
  if (y.empty()) throw ValidationError("sequences must have length >= 1");
  detail::ExactModel model(p, spec, delta, static_cast<int>(y.size()));
  return model.accept(xhat, y);
}

enum class OracleMode { naive, fast };

struct OracleOptions {
  OracleMode mode = OracleMode::fast;
  bool force = false;
  std::uint64_t budget = 100'000'000;  // inner evaluations
};

struct YTypeEntry {
  std::vector<int> y_counts;
  Integer count;              // sequences in the y-type class
  Rational sequence_prob;     // P_Y^n of each member
  Rational best;              // best conditional success probability
  std::vector<std::vector<int>> xhat_counts;  // [y symbol][xhat]: reconstruction composition per class
};

struct OracleResult {
  int n = 0;
  Rational p_star;
  double exponent_n = 0.0;  // nats
  std::vector<YTypeEntry> breakdown;
  OracleMode mode = OracleMode::fast;
  Integer evaluations;  // inner acceptance evaluations performed
};

namespace detail {

inline double exponent_of(const Rational& p_star, int n) {
  if (sgn(p_star) == 0) return kInfinity;
  const double v = -log_rational(p_star) / n;
  return v <= 0.0 ? 0.0 : v;
}

// Compositions of k into m parts, first coordinate descending (lexicographically
// smallest ascending arrangement first).
inline std::vector<std::vector<int>> compositions(int k, int m) {
  if (k == 0) return {std::vector<int>(m, 0)};
  std::vector<std::vector<int>> out;
  for (const auto& t : enumerate_types(k, m)) out.push_back(t.counts());
  return out;
}

inline Integer fast_cost(int n, int ny_live, int nb) {
  Integer total = 0;
  for (const auto& t : enumerate_types(n, ny_live)) {
    Integer prod = 1;
    for (int k : t.counts()) prod *= binomial(static_cast<unsigned long>(k + nb - 1), static_cast<unsigned long>(nb - 1));
    total += prod;
  }
  return total;
}

inline Integer naive_cost(int n, int ny_live, int nb) {
  Integer a, b;
  mpz_ui_pow_ui(a.get_mpz_t(), static_cast<unsigned long>(ny_live), static_cast<unsigned long>(n));
  mpz_ui_pow_ui(b.get_mpz_t(), static_cast<unsigned long>(nb), static_cast<unsigned long>(n));
  return a * b;
}

inline void check_budget(const Integer& cost, const OracleOptions& opts, const char* what) {
  if (!opts.force && cost > Integer(static_cast<unsigned long>(opts.budget)))
    throw BudgetError(std::string(what) + " evaluator needs about " + to_string(cost) +
                      " inner evaluations, over the budget of " + std::to_string(opts.budget) +
                      " (use force to override)");
}

inline OracleResult oracle_fast(const ExactModel& m, const OracleOptions& opts) {
  std::vector<int> live;
  for (int y = 0; y < m.ny; ++y)
    if (sgn(m.py[y]) > 0) live.push_back(y);
  check_budget(fast_cost(m.n, static_cast<int>(live.size()), m.nb), opts, "fast");

  OracleResult out;
  out.n = m.n;
  out.mode = OracleMode::fast;
  out.p_star = 0;
  out.evaluations = 0;
  for (const auto& t : enumerate_types(m.n, static_cast<int>(live.size()))) {
    YTypeEntry e;
    e.y_counts.assign(m.ny, 0);
    for (std::size_t i = 0; i < live.size(); ++i) e.y_counts[live[i]] = t[static_cast<int>(i)];
    e.count = type_class_size(t);
    e.sequence_prob = 1;
    for (int y = 0; y < m.ny; ++y) e.sequence_prob *= pow(m.py[y], static_cast<unsigned long>(e.y_counts[y]));

    if (m.always_accept) {
      e.best = 1;
      e.xhat_counts.assign(m.ny, std::vector<int>(m.nb, 0));
      for (int y = 0; y < m.ny; ++y) e.xhat_counts[y][0] = e.y_counts[y];
      out.evaluations += 1;
    } else {
      // Depth-first over y classes, carrying the partial-sum law of the classes so far.
      // Enumeration order is lexicographic in the reconstruction of the sorted
      // representative, so keeping strict improvements breaks ties toward the smallest.
      std::vector<std::vector<int>> choice(m.ny, std::vector<int>(m.nb, 0));
      std::optional<Rational> best;
      std::vector<std::vector<int>> best_choice;
      auto walk = [&](auto&& self, int yi, const std::vector<Rational>& dist) -> void {
        if (yi == m.ny) {
          Rational v = ExactModel::total(dist);
          out.evaluations += 1;
          if (!best || v > *best) {
            best = v;
            best_choice = choice;
          }
          return;
        }
        for (const auto& comp : compositions(e.y_counts[yi], m.nb)) {
          std::vector<Rational> next = dist;
          for (int b = 0; b < m.nb; ++b) m.convolve(next, yi, b, comp[b]);
          choice[yi] = comp;
          self(self, yi + 1, next);
        }
      };
      walk(walk, 0, m.start());
      e.best = *best;
      e.xhat_counts = best_choice;
    }
    out.p_star += Rational(e.count) * e.sequence_prob * e.best;
    out.breakdown.push_back(std::move(e));
  }
  out.exponent_n = exponent_of(out.p_star, m.n);
  return out;
}

inline OracleResult oracle_naive(const ExactModel& m, const OracleOptions& opts) {
  int ny_live = 0;
  for (int y = 0; y < m.ny; ++y) ny_live += sgn(m.py[y]) > 0;
  check_budget(naive_cost(m.n, ny_live, m.nb), opts, "naive");

  OracleResult out;
  out.n = m.n;
  out.mode = OracleMode::naive;
  out.p_star = 0;
  out.evaluations = 0;
  std::map<std::vector<int>, std::size_t> slot;
  Sequence y(m.n, 0);
  do {
    const Rational py = m.sequence_prob(y);
    if (sgn(py) == 0) continue;
    Rational best(-1);
    Sequence best_xhat;
    Sequence xhat(m.n, 0);
    do {
      Rational v = m.accept(xhat, y);
      out.evaluations += 1;
      if (v > best) {
        best = v;
        best_xhat = xhat;
      }
    } while (next_sequence(xhat, m.nb));
    out.p_star += py * best;

    std::vector<int> counts(m.ny, 0);
    for (Symbol v : y) ++counts[v];
    auto [it, fresh] = slot.emplace(counts, out.breakdown.size());
    if (fresh) {
      YTypeEntry e;
      e.y_counts = counts;
      e.count = 0;
      e.sequence_prob = py;
      e.best = best;
      e.xhat_counts.assign(m.ny, std::vector<int>(m.nb, 0));
      for (int i = 0; i < m.n; ++i) ++e.xhat_counts[y[i]][best_xhat[i]];
      out.breakdown.push_back(std::move(e));
    }
    auto& e = out.breakdown[it->second];
    e.count += 1;
    if (e.best != best) throw std::logic_error("optimal success differs within a side-information type");
  } while (next_sequence(y, m.ny));

  std::sort(out.breakdown.begin(), out.breakdown.end(),
            [](const YTypeEntry& a, const YTypeEntry& b) { return a.y_counts > b.y_counts; });
  Rational check(0);
  for (const auto& e : out.breakdown) check += Rational(e.count) * e.sequence_prob * e.best;
  if (check != out.p_star) throw std::logic_error("type breakdown does not reproduce the optimum");
  out.exponent_n = exponent_of(out.p_star, m.n);
  return out;
}

}  // namespace detail

// P*_n = sum_{y^n} P(y^n) max_{xhat^n} acceptance_probability(xhat^n, y^n), exactly.
inline OracleResult optimal_deception_prob(const JointPmf& p, const DistortionSpec& spec, const Rational& delta,
                                           int n, const OracleOptions& opts = {}) {
  detail::ExactModel model(p, spec, delta, n);
  return opts.mode == OracleMode::naive ? detail::oracle_naive(model, opts) : detail::oracle_fast(model, opts);
}

// The optimal adversary read off an oracle result: each y-class receives its chosen
// reconstruction composition, symbols ascending in position order.
inline DeceptionFunction oracle_strategy(const OracleResult& r) {
  std::map<std::vector<int>, std::vector<std::vector<int>>> table;
  for (const auto& e : r.breakdown) table.emplace(e.y_counts, e.xhat_counts);
  const int n = r.n;
  return DeceptionFunction(n, [table = std::move(table), n](const Sequence& y) {
    if (table.empty()) throw ValidationError("empty oracle result");
    const int ny = static_cast<int>(table.begin()->first.size());
    std::vector<int> counts(ny, 0);
    for (Symbol v : y) {
      if (v < 0 || v >= ny) throw ValidationError("side information symbol outside alphabet");
      ++counts[v];
    }
    auto it = table.find(counts);
    if (it == table.end()) throw ValidationError("side information type has zero probability");
    std::vector<std::vector<int>> left = it->second;
    std::vector<int> cursor(ny, 0);
    Sequence out(n);
    for (int i = 0; i < n; ++i) {
      auto& row = left[y[i]];
      int& b = cursor[y[i]];
      while (row[b] == 0) ++b;
      out[i] = b;
      --row[b];
    }
    return out;
  });
}

// Exact success probability of a given adversary.
inline Rational success_probability(const DeceptionFunction& f, const JointPmf& p, const DistortionSpec& spec,
                                    const Rational& delta) {
  detail::ExactModel model(p, spec, delta, f.n());
  if (sequence_count(model.ny, f.n()) > kEnumerationBudget)
    throw BudgetError("success_probability enumerates all side-information sequences");
  Rational total(0);
  Sequence y(f.n(), 0);
  do {
    const Rational py = model.sequence_prob(y);
    if (sgn(py) == 0) continue;
    total += py * model.accept(f(y), y);
  } while (next_sequence(y, model.ny));
  return total;
}

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
};

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

namespace detail {

// Inverse-CDF sampler over the cells of a joint pmf.
class JointSampler {
 public:
  explicit JointSampler(const JointPmf& p) : ny_(p.y_size()) {
    double acc = 0.0;
    for (double v : p.mass()) cdf_.push_back(acc += v);
    cdf_.back() = 1.0;
  }

  void draw(std::mt19937_64& rng, Sequence& x, Sequence& y) const {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double u = uniform01(rng);
      const auto cell = static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
      const std::size_t idx = std::min(cell, cdf_.size() - 1);
      x[i] = static_cast<Symbol>(idx / static_cast<std::size_t>(ny_));
      y[i] = static_cast<Symbol>(idx % static_cast<std::size_t>(ny_));
    }
  }

 private:
  int ny_;
  std::vector<double> cdf_;
};

}  // namespace detail

// Draws (X^n, Y^n) i.i.d. from P and reports the acceptance frequency of f.
inline MonteCarloEstimate monte_carlo_success_rate(const DeceptionFunction& f, const JointPmf& p,
                                                   const DistortionSpec& spec, const Rational& delta,
                                                   std::uint64_t trials, std::uint64_t seed) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
  detail::ExactModel model(p, spec, delta, f.n());
  const int n = f.n();
  const detail::JointSampler sampler(p);

  // Memoize f by side-information rank when the space is small.
  const std::uint64_t space = sequence_count(model.ny, n);
  const bool cache = space <= (1u << 20);
  std::vector<Sequence> memo(cache ? space : 0);

  std::mt19937_64 rng(seed);
  MonteCarloEstimate out;
  out.trials = trials;
  Sequence x(n), y(n);
  for (std::uint64_t t = 0; t < trials; ++t) {
    sampler.draw(rng, x, y);
    bool ok = model.always_accept;
    if (!ok) {
      const Sequence* xhat;
      Sequence local;
      if (cache) {
        auto& slot = memo[sequence_rank(y, model.ny)];
        if (slot.empty()) slot = f(y);
        xhat = &slot;
      } else {
        local = f(y);
        xhat = &local;
      }
      std::int64_t sum = 0;
      for (int i = 0; i < n; ++i) sum += model.costs(x[i], (*xhat)[i]);
      ok = sum <= model.threshold;
    }
    out.successes += ok;
  }
  const double mean = static_cast<double>(out.successes) / static_cast<double>(trials);
  out.estimate = mean;
  out.standard_error = std::sqrt(mean * (1.0 - mean) / static_cast<double>(trials));
  return out;
}

struct TrendRow {
  int n = 0;
  Rational p_star;
  double exponent_n = 0.0;
};

inline std::vector<TrendRow> exponent_trend(const JointPmf& p, const DistortionSpec& spec, const Rational& delta,
                                            const std::vector<int>& n_list, const OracleOptions& opts = {}) {
  std::vector<TrendRow> out;
  for (int n : n_list) {
    auto r = optimal_deception_prob(p, spec, delta, n, opts);
    out.push_back({n, r.p_star, r.exponent_n});
  }
  return out;
}

}  // namespace deception

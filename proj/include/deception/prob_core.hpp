#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deception/rational.hpp"

namespace deception {

using Symbol = int;
using Sequence = std::vector<Symbol>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();
inline constexpr double kTableTolerance = 1e-12;
inline constexpr double kVectorTolerance = 1e-9;

// Finite symbol set; symbols are the indices 0..size-1.
class Alphabet {
 public:
  explicit Alphabet(int size = 1) : size_(size) {
    if (size < 1) throw ValidationError("alphabet size must be >= 1");
  }

  explicit Alphabet(std::vector<std::string> labels) : size_(static_cast<int>(labels.size())) {
    if (labels.empty()) throw ValidationError("alphabet size must be >= 1");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size()) throw ValidationError("alphabet labels must be distinct");
    labels_ = std::move(labels);
  }

  int size() const { return size_; }
  bool has_labels() const { return !labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::string label(Symbol s) const {
    check(s);
    return labels_.empty() ? std::to_string(s) : labels_[s];
  }

  bool contains(Symbol s) const { return s >= 0 && s < size_; }

  void check(Symbol s) const {
    if (!contains(s))
      throw ValidationError("symbol " + std::to_string(s) + " outside alphabet of size " +
                            std::to_string(size_));
  }

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.size_ == b.size_; }

 private:
  int size_;
  std::vector<std::string> labels_;
};

// Entropy in nats, 0 ln 0 = 0.
inline double entropy(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("entropy: negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kVectorTolerance) throw ValidationError("entropy: entries do not sum to 1");
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return std::max(h, 0.0);
}

// Probability table over X x Y, stored row-major as mass[x * |Y| + y].
// Keeps the exact rational table when built from one.
class JointPmf {
 public:
  JointPmf(Alphabet x, Alphabet y, std::vector<double> mass)
      : x_(std::move(x)), y_(std::move(y)), mass_(std::move(mass)) {
    check_shape(mass_.size());
    double sum = 0.0;
    for (double v : mass_) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("joint pmf entries must be finite and >= 0");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kTableTolerance)
      throw ValidationError("joint pmf entries sum to " + std::to_string(sum) + ", not 1");
    for (double& v : mass_) v /= sum;
  }

  static JointPmf exact(Alphabet x, Alphabet y, std::vector<Rational> mass) {
    JointPmf out(std::move(x), std::move(y));
    out.check_shape(mass.size());
    Rational sum = 0;
    for (auto& v : mass) {
      v = canonical(v);
      if (sgn(v) < 0) throw ValidationError("joint pmf entries must be >= 0");
      sum += v;
    }
    if (std::abs(to_double(sum) - 1.0) > kTableTolerance)
      throw ValidationError("joint pmf entries sum to " + to_string(sum) + ", not 1");
    for (auto& v : mass) v /= sum;
    out.mass_.reserve(mass.size());
    for (const auto& v : mass) out.mass_.push_back(to_double(v));
    out.exact_ = std::move(mass);
    return out;
  }

  const Alphabet& x_alphabet() const { return x_; }
  const Alphabet& y_alphabet() const { return y_; }
  int x_size() const { return x_.size(); }
  int y_size() const { return y_.size(); }
  std::size_t cells() const { return mass_.size(); }

  std::size_t index(Symbol x, Symbol y) const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(y_.size()) + static_cast<std::size_t>(y);
  }

  double operator()(Symbol x, Symbol y) const { return mass_[index(x, y)]; }
  std::span<const double> mass() const { return mass_; }

  bool has_exact() const { return exact_.has_value(); }

  // Exact table: the stored rationals, or the exact value of each double.
  std::vector<Rational> exact_mass() const {
    if (exact_) return *exact_;
    std::vector<Rational> out;
    out.reserve(mass_.size());
    for (double v : mass_) out.push_back(exact_rational(v));
    return out;
  }

  std::vector<double> x_marginal() const {
    std::vector<double> out(x_.size(), 0.0);
    for (int x = 0; x < x_.size(); ++x)
      for (int y = 0; y < y_.size(); ++y) out[x] += (*this)(x, y);
    return out;
  }

  std::vector<double> y_marginal() const {
    std::vector<double> out(y_.size(), 0.0);
    for (int x = 0; x < x_.size(); ++x)
      for (int y = 0; y < y_.size(); ++y) out[y] += (*this)(x, y);
    return out;
  }

  // Q(x|y); empty when y is a null symbol.
  std::vector<double> conditional_given_y(Symbol y) const {
    y_.check(y);
    double py = 0.0;
    for (int x = 0; x < x_.size(); ++x) py += (*this)(x, y);
    if (py <= 0.0) return {};
    std::vector<double> out(x_.size());
    for (int x = 0; x < x_.size(); ++x) out[x] = (*this)(x, y) / py;
    return out;
  }

  bool in_support(Symbol x, Symbol y) const { return (*this)(x, y) > 0.0; }

  bool support_within(const JointPmf& other) const {
    for (std::size_t i = 0; i < mass_.size(); ++i)
      if (mass_[i] > 0.0 && other.mass_[i] <= 0.0) return false;
    return true;
  }

  bool same_shape(const JointPmf& other) const { return x_ == other.x_ && y_ == other.y_; }

  static JointPmf uniform(Alphabet x, Alphabet y) {
    const std::size_t n = static_cast<std::size_t>(x.size()) * static_cast<std::size_t>(y.size());
    std::vector<Rational> mass(n, Rational(1, static_cast<unsigned long>(n)));
    return exact(std::move(x), std::move(y), std::move(mass));
  }

 private:
  JointPmf(Alphabet x, Alphabet y) : x_(std::move(x)), y_(std::move(y)) {}

  void check_shape(std::size_t n) const {
    if (n != static_cast<std::size_t>(x_.size()) * static_cast<std::size_t>(y_.size()))
      throw ValidationError("joint pmf table has " + std::to_string(n) + " entries, expected " +
                            std::to_string(x_.size() * y_.size()));
  }

  Alphabet x_;
  Alphabet y_;
  std::vector<double> mass_;
  std::optional<std::vector<Rational>> exact_;
};

// Per-letter distortion d(x, xhat) with exact rational entries, row-major [x * |Xhat| + xhat].
class DistortionSpec {
 public:
  DistortionSpec(Alphabet x, Alphabet xhat, std::vector<Rational> table)
      : x_(std::move(x)), xhat_(std::move(xhat)), d_(std::move(table)) {
    const std::size_t n = static_cast<std::size_t>(x_.size()) * static_cast<std::size_t>(xhat_.size());
    if (d_.size() != n)
      throw ValidationError("distortion table has " + std::to_string(d_.size()) + " entries, expected " +
                            std::to_string(n));
    d_max_ = 0;
    values_.reserve(n);
    for (auto& v : d_) {
      v = canonical(v);
      if (sgn(v) < 0) throw ValidationError("distortion entries must be >= 0");
      if (v > d_max_) d_max_ = v;
      values_.push_back(to_double(v));
    }
  }

  static DistortionSpec hamming(int size) {
    std::vector<Rational> d;
    for (int a = 0; a < size; ++a)
      for (int b = 0; b < size; ++b) d.emplace_back(a == b ? 0 : 1);
    return DistortionSpec(Alphabet(size), Alphabet(size), std::move(d));
  }

  const Alphabet& x_alphabet() const { return x_; }
  const Alphabet& xhat_alphabet() const { return xhat_; }
  int x_size() const { return x_.size(); }
  int xhat_size() const { return xhat_.size(); }

  const Rational& exact(Symbol x, Symbol xhat) const { return d_[index(x, xhat)]; }
  double operator()(Symbol x, Symbol xhat) const { return values_[index(x, xhat)]; }
  const Rational& d_max() const { return d_max_; }
  double d_max_value() const { return to_double(d_max_); }
  const std::vector<Rational>& table() const { return d_; }

  // min over xhat of d(x, xhat)
  double row_min(Symbol x) const {
    double m = kInfinity;
    for (int b = 0; b < xhat_.size(); ++b) m = std::min(m, (*this)(x, b));
    return m;
  }

 private:
  std::size_t index(Symbol x, Symbol xhat) const {
    return static_cast<std::size_t>(x) * static_cast<std::size_t>(xhat_.size()) + static_cast<std::size_t>(xhat);
  }

  Alphabet x_;
  Alphabet xhat_;
  std::vector<Rational> d_;
  std::vector<double> values_;
  Rational d_max_;
};

// Integer image of a distortion table over a common denominator; per-letter
// sums compare exactly against a rational threshold.
struct IntegerCosts {
  std::int64_t denominator = 1;
  std::vector<std::int64_t> cost;  // row-major [x * |Xhat| + xhat]
  int xhat_size = 1;

  std::int64_t operator()(Symbol x, Symbol xhat) const {
    return cost[static_cast<std::size_t>(x) * static_cast<std::size_t>(xhat_size) + static_cast<std::size_t>(xhat)];
  }

  static IntegerCosts from(const DistortionSpec& spec, int n) {
    Integer lcm = 1;
    for (const auto& v : spec.table()) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), v.get_den_mpz_t());
    Integer limit = Integer(std::numeric_limits<std::int64_t>::max() / 4);
    Rational scaled_max = spec.d_max() * Rational(lcm);
    Integer max_cost = Integer(scaled_max.get_num()) * std::max(n, 1);
    if (lcm > limit || max_cost > limit) throw BudgetError("distortion table denominators too large for exact sums");
    IntegerCosts out;
    out.denominator = lcm.get_si();
    out.xhat_size = spec.xhat_size();
    for (const auto& v : spec.table()) {
      Rational scaled = v * Rational(lcm);
      out.cost.push_back(Integer(scaled.get_num()).get_si());
    }
    return out;
  }

  // Largest integer sum S with S / (n * denominator) <= delta.
  std::int64_t threshold(const Rational& delta, int n) const {
    Rational bound = delta * Rational(n) * Rational(denominator);
    Integer fl;
    mpz_fdiv_q(fl.get_mpz_t(), bound.get_num_mpz_t(), bound.get_den_mpz_t());
    Integer cap = Integer(std::numeric_limits<std::int64_t>::max() / 4);
    if (fl > cap) fl = cap;
    return fl.get_si();
  }
};

// Conditional law V(xhat | x, y), one probability vector per (x, y).
class TestChannel {
 public:
  TestChannel(int x_size, int y_size, int xhat_size, std::vector<double> table)
      : x_size_(x_size), y_size_(y_size), xhat_size_(xhat_size), v_(std::move(table)) {
    if (x_size < 1 || y_size < 1 || xhat_size < 1) throw ValidationError("channel dimensions must be >= 1");
    const std::size_t rows = static_cast<std::size_t>(x_size) * static_cast<std::size_t>(y_size);
    if (v_.size() != rows * static_cast<std::size_t>(xhat_size))
      throw ValidationError("channel table has wrong size");
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (int b = 0; b < xhat_size; ++b) {
        double v = v_[r * xhat_size + b];
        if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("channel entries must be finite and >= 0");
        sum += v;
      }
      if (std::abs(sum - 1.0) > kTableTolerance) throw ValidationError("channel row does not sum to 1");
      for (int b = 0; b < xhat_size; ++b) v_[r * xhat_size + b] /= sum;
    }
  }

  // x-independent channel w(xhat | y)
  static TestChannel from_output_law(int x_size, const std::vector<std::vector<double>>& w) {
    const int y_size = static_cast<int>(w.size());
    const int xhat_size = static_cast<int>(w.front().size());
    std::vector<double> table;
    for (int x = 0; x < x_size; ++x)
      for (int y = 0; y < y_size; ++y) table.insert(table.end(), w[y].begin(), w[y].end());
    return TestChannel(x_size, y_size, xhat_size, std::move(table));
  }

  int x_size() const { return x_size_; }
  int y_size() const { return y_size_; }
  int xhat_size() const { return xhat_size_; }

  double operator()(Symbol xhat, Symbol x, Symbol y) const { return v_[offset(x, y) + xhat]; }

  std::span<const double> row(Symbol x, Symbol y) const {
    return std::span<const double>(v_).subspan(offset(x, y), xhat_size_);
  }

  std::span<const double> table() const { return v_; }

  TestChannel mix(const TestChannel& other, double weight) const {
    std::vector<double> out(v_.size());
    for (std::size_t i = 0; i < v_.size(); ++i) out[i] = weight * v_[i] + (1.0 - weight) * other.v_[i];
    return TestChannel(x_size_, y_size_, xhat_size_, std::move(out));
  }

 private:
  std::size_t offset(Symbol x, Symbol y) const {
    return (static_cast<std::size_t>(x) * static_cast<std::size_t>(y_size_) + static_cast<std::size_t>(y)) *
           static_cast<std::size_t>(xhat_size_);
  }

  int x_size_;
  int y_size_;
  int xhat_size_;
  std::vector<double> v_;
};

// Acceptance threshold Delta plus slack delta; acceptance is "distortion <= cap + slack".
struct DistortionBudget {
  Rational delta_cap = 0;
  Rational slack = 0;

  DistortionBudget() = default;
  explicit DistortionBudget(Rational cap, Rational s = 0) : delta_cap(canonical(std::move(cap))), slack(canonical(std::move(s))) {
    if (sgn(delta_cap) < 0 || sgn(slack) < 0) throw ValidationError("distortion budget must be >= 0");
  }

  Rational threshold() const { return delta_cap + slack; }
};

// D(q || p) in nats; +infinity when q puts mass outside the support of p.
inline double kl_divergence(std::span<const double> q, std::span<const double> p) {
  if (q.size() != p.size()) throw ValidationError("kl_divergence: size mismatch");
  double out = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) return kInfinity;
    out += q[i] * std::log(q[i] / p[i]);
  }
  return std::max(out, 0.0);
}

inline double kl_divergence(const JointPmf& q, const JointPmf& p) {
  if (!q.same_shape(p)) throw ValidationError("kl_divergence: alphabets differ");
  return kl_divergence(q.mass(), p.mass());
}

// I(X; Xhat | Y) under q(x,y) v(xhat|x,y).
inline double conditional_mutual_information(const JointPmf& q, const TestChannel& v) {
  if (q.x_size() != v.x_size() || q.y_size() != v.y_size())
    throw ValidationError("conditional_mutual_information: shape mismatch");
  const int nxh = v.xhat_size();
  double total = 0.0;
  std::vector<double> w(nxh);
  for (int y = 0; y < q.y_size(); ++y) {
    std::fill(w.begin(), w.end(), 0.0);
    double qy = 0.0;
    for (int x = 0; x < q.x_size(); ++x) {
      const double qxy = q(x, y);
      qy += qxy;
      for (int b = 0; b < nxh; ++b) w[b] += qxy * v(b, x, y);
    }
    if (qy <= 0.0) continue;
    for (int x = 0; x < q.x_size(); ++x) {
      const double qxy = q(x, y);
      if (qxy <= 0.0) continue;
      for (int b = 0; b < nxh; ++b) {
        const double vv = v(b, x, y);
        if (vv <= 0.0) continue;
        total += qxy * vv * std::log(vv * qy / w[b]);
      }
    }
  }
  return std::max(total, 0.0);
}

// E d(X, Xhat) under q(x,y) v(xhat|x,y).
inline double expected_distortion(const JointPmf& q, const TestChannel& v, const DistortionSpec& spec) {
  double total = 0.0;
  for (int x = 0; x < q.x_size(); ++x)
    for (int y = 0; y < q.y_size(); ++y) {
      const double qxy = q(x, y);
      if (qxy <= 0.0) continue;
      for (int b = 0; b < v.xhat_size(); ++b) total += qxy * v(b, x, y) * spec(x, b);
    }
  return total;
}

// H_q(X | Y)
inline double conditional_entropy(const JointPmf& q) {
  double h = 0.0;
  const auto qy = q.y_marginal();
  for (int x = 0; x < q.x_size(); ++x)
    for (int y = 0; y < q.y_size(); ++y) {
      const double v = q(x, y);
      if (v > 0.0) h -= v * std::log(v / qy[y]);
    }
  return std::max(h, 0.0);
}

// (1/n) sum_i d(x_i, xhat_i), exact.
inline Rational sequence_distortion(std::span<const Symbol> x_seq, std::span<const Symbol> xhat_seq,
                                    const DistortionSpec& spec) {
  if (x_seq.size() != xhat_seq.size()) throw ValidationError("sequence_distortion: length mismatch");
  if (x_seq.empty()) throw ValidationError("sequence_distortion: empty sequences");
  Rational sum = 0;
  for (std::size_t i = 0; i < x_seq.size(); ++i) {
    spec.x_alphabet().check(x_seq[i]);
    spec.xhat_alphabet().check(xhat_seq[i]);
    sum += spec.exact(x_seq[i], xhat_seq[i]);
  }
  return sum / Rational(static_cast<long>(x_seq.size()));
}

inline double nats_to_bits(double nats) { return nats / std::log(2.0); }

// Binary entropy in nats.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

}  // namespace deception

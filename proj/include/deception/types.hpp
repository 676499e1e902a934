#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "deception/prob_core.hpp"
#include "deception/sequences.hpp"

namespace deception {

// Enumerations larger than this are refused.
inline constexpr std::uint64_t kEnumerationBudget = 10'000'000;

// Empirical composition of length-n sequences over an alphabet of counts.size() symbols.
class TypeClass {
 public:
  explicit TypeClass(std::vector<int> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) throw ValidationError("type needs a non-empty alphabet");
    for (int c : counts_) {
      if (c < 0) throw ValidationError("type counts must be non-negative");
      n_ += c;
    }
    if (n_ < 1) throw ValidationError("type counts must sum to n >= 1");
  }

  static TypeClass of(const Sequence& s, int alphabet_size) {
    std::vector<int> counts(alphabet_size, 0);
    for (Symbol v : s) {
      if (v < 0 || v >= alphabet_size) throw ValidationError("symbol outside alphabet");
      ++counts[v];
    }
    return TypeClass(std::move(counts));
  }

  int n() const { return n_; }
  int alphabet_size() const { return static_cast<int>(counts_.size()); }
  const std::vector<int>& counts() const { return counts_; }
  int operator[](Symbol a) const { return counts_[a]; }

  std::vector<Rational> empirical() const {
    std::vector<Rational> out;
    for (int c : counts_) out.emplace_back(c, n_);
    for (auto& v : out) v.canonicalize();
    return out;
  }

  bool contains(const Sequence& s) const {
    if (static_cast<int>(s.size()) != n_) return false;
    std::vector<int> seen(counts_.size(), 0);
    for (Symbol v : s) {
      if (v < 0 || v >= alphabet_size()) return false;
      ++seen[v];
    }
    return seen == counts_;
  }

  // Lexicographically smallest member: symbols in ascending order.
  Sequence representative() const {
    Sequence s;
    for (int a = 0; a < alphabet_size(); ++a) s.insert(s.end(), counts_[a], a);
    return s;
  }

  bool operator==(const TypeClass& o) const { return counts_ == o.counts_; }
  bool operator<(const TypeClass& o) const { return counts_ < o.counts_; }

 private:
  std::vector<int> counts_;
  int n_ = 0;
};

// Number of types: C(n + size - 1, size - 1).
inline Integer type_count(int n, int alphabet_size) {
  if (n < 1 || alphabet_size < 1) throw ValidationError("type_count needs n >= 1 and alphabet size >= 1");
  return binomial(static_cast<unsigned long>(n + alphabet_size - 1), static_cast<unsigned long>(alphabet_size - 1));
}

// All compositions of n into alphabet_size parts, first coordinate descending.
inline std::vector<TypeClass> enumerate_types(int n, int alphabet_size) {
  const Integer count = type_count(n, alphabet_size);
  if (count > Integer(static_cast<unsigned long>(kEnumerationBudget)))
    throw BudgetError("enumerate_types: " + to_string(count) + " types exceed the enumeration budget");
  Integer cap;
  mpz_ui_pow_ui(cap.get_mpz_t(), static_cast<unsigned long>(n + 1), static_cast<unsigned long>(alphabet_size));
  if (count > cap) throw std::logic_error("type count exceeds (n+1)^size");

  std::vector<TypeClass> out;
  out.reserve(count.get_ui());
  std::vector<int> c(alphabet_size, 0);
  // Recursive fill: position k takes values from the remaining budget down to 0.
  auto fill = [&](auto&& self, int k, int left) -> void {
    if (k == alphabet_size - 1) {
      c[k] = left;
      out.emplace_back(c);
      return;
    }
    for (int v = left; v >= 0; --v) {
      c[k] = v;
      self(self, k + 1, left - v);
    }
  };
  fill(fill, 0, n);
  return out;
}

// Multinomial coefficient n! / prod counts!.
inline Integer type_class_size(const TypeClass& t) {
  Integer out = factorial(static_cast<unsigned long>(t.n()));
  for (int c : t.counts()) out /= factorial(static_cast<unsigned long>(c));
  return out;
}

// Members of the class in lexicographic order.
inline std::vector<Sequence> type_class_members(const TypeClass& t) {
  if (type_class_size(t) > Integer(static_cast<unsigned long>(kEnumerationBudget)))
    throw BudgetError("type class too large to enumerate");
  std::vector<Sequence> out;
  Sequence s = t.representative();
  do {
    out.push_back(s);
  } while (std::next_permutation(s.begin(), s.end()));
  return out;
}

// Probability P^n of any single sequence in the class, exactly. The pmf is indexed
// like the type's alphabet (for joint types, the product alphabet x * |Y| + y).
inline Rational type_probability_exact(const TypeClass& t, const std::vector<Rational>& pmf) {
  if (static_cast<int>(pmf.size()) != t.alphabet_size()) throw ValidationError("pmf size differs from type alphabet");
  Rational out(1);
  for (int a = 0; a < t.alphabet_size(); ++a)
    if (t[a] > 0) out *= pow(pmf[a], static_cast<unsigned long>(t[a]));
  return out;
}

// D(empirical || p) + H(empirical), the per-symbol negative log-probability of each
// member. The value is cross-checked against a direct evaluation on one member.
inline double sequence_log_prob_in_type(const TypeClass& t, const JointPmf& p) {
  if (static_cast<std::size_t>(t.alphabet_size()) != p.cells())
    throw ValidationError("type alphabet must match the joint pmf's product alphabet");
  std::vector<double> emp(t.alphabet_size());
  for (int a = 0; a < t.alphabet_size(); ++a) emp[a] = static_cast<double>(t[a]) / t.n();
  const double value = kl_divergence(emp, p.mass()) + entropy(emp);
  if (std::isinf(value)) return value;

  double direct = 0.0;
  for (Symbol a : t.representative()) direct -= std::log(p.mass()[a]);
  direct /= t.n();
  if (std::abs(direct - value) > 1e-12 * std::max(1.0, std::abs(value)))
    throw std::logic_error("type log-probability identity failed");
  return value;
}

// |{s : d_H(s, center) <= l}| = sum_{j<=l} C(n, j) (size - 1)^j.
inline Integer hamming_ball_size(int n, int l, int alphabet_size) {
  if (n < 1 || l < 0 || l > n || alphabet_size < 1) throw ValidationError("hamming_ball_size needs 0 <= l <= n");
  Integer out = 0;
  for (int j = 0; j <= l; ++j) {
    Integer term;
    mpz_ui_pow_ui(term.get_mpz_t(), static_cast<unsigned long>(alphabet_size - 1), static_cast<unsigned long>(j));
    out += binomial(static_cast<unsigned long>(n), static_cast<unsigned long>(j)) * term;
  }
  return out;
}

// (1/n) ln|ball| against h(l/n) + (l/n) ln size; meaningful for l <= n/2.
struct BallBound {
  double log_size_per_symbol = 0.0;
  double bound = 0.0;
  bool holds = true;
};

inline BallBound hamming_ball_bound(int n, int l, int alphabet_size) {
  BallBound out;
  out.log_size_per_symbol = log_integer(hamming_ball_size(n, l, alphabet_size)) / n;
  const double frac = static_cast<double>(l) / n;
  out.bound = binary_entropy(frac) + frac * std::log(static_cast<double>(alphabet_size));
  out.holds = out.log_size_per_symbol <= out.bound + 1e-12;
  return out;
}

// All sequences within Hamming distance l of some member of s.
inline std::set<Sequence> hamming_neighborhood(const std::set<Sequence>& s, int l, int alphabet_size) {
  if (l < 0) throw ValidationError("neighborhood radius must be >= 0");
  if (s.empty()) return {};
  const int n = static_cast<int>(s.begin()->size());
  for (const auto& v : s) {
    if (static_cast<int>(v.size()) != n) throw ValidationError("neighborhood members must share a length");
    for (Symbol a : v)
      if (a < 0 || a >= alphabet_size) throw ValidationError("symbol outside alphabet");
  }
  if (sequence_count(alphabet_size, n) > kEnumerationBudget)
    throw BudgetError("sequence space too large for neighborhood enumeration");
  std::set<Sequence> out = s;
  std::vector<Sequence> frontier(s.begin(), s.end());
  for (int r = 0; r < std::min(l, n) && !frontier.empty(); ++r) {
    std::vector<Sequence> next;
    for (const auto& v : frontier)
      for (int i = 0; i < n; ++i)
        for (Symbol a = 0; a < alphabet_size; ++a) {
          if (a == v[i]) continue;
          Sequence w = v;
          w[i] = a;
          if (out.insert(w).second) next.push_back(std::move(w));
        }
    frontier = std::move(next);
  }
  return out;
}

// P^n(set) for an i.i.d. law, exactly.
inline Rational set_probability(const std::set<Sequence>& s, const std::vector<Rational>& pmf) {
  Rational out(0);
  for (const auto& v : s) {
    Rational p(1);
    for (Symbol a : v) p *= pmf.at(static_cast<std::size_t>(a));
    out += p;
  }
  return out;
}

// Bijection on positions; applied to a sequence, position i moves to image[i].
class Permutation {
 public:
  explicit Permutation(std::vector<int> image) : image_(std::move(image)) {
    std::vector<bool> seen(image_.size(), false);
    for (int v : image_) {
      if (v < 0 || v >= static_cast<int>(image_.size()) || seen[v]) throw ValidationError("not a permutation");
      seen[v] = true;
    }
  }

  static Permutation identity(int n) {
    std::vector<int> im(n);
    std::iota(im.begin(), im.end(), 0);
    return Permutation(std::move(im));
  }

  int n() const { return static_cast<int>(image_.size()); }
  const std::vector<int>& image() const { return image_; }

  Sequence apply(const Sequence& s) const {
    if (s.size() != image_.size()) throw ValidationError("permutation length differs from sequence length");
    Sequence out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[image_[i]] = s[i];
    return out;
  }

  std::set<Sequence> apply(const std::set<Sequence>& s) const {
    std::set<Sequence> out;
    for (const auto& v : s) out.insert(apply(v));
    return out;
  }

  bool operator==(const Permutation& o) const { return image_ == o.image_; }

 private:
  std::vector<int> image_;
};

struct PermutationCover {
  std::vector<Permutation> permutations;
  Integer class_size;
  std::size_t subset_size = 0;
  std::int64_t bound = 0;  // ceil((|T| / |S|) ln |T|) + 1
};

inline std::int64_t covering_bound(const Integer& class_size, std::size_t subset_size) {
  const double t = class_size.get_d();
  return static_cast<std::int64_t>(std::ceil(t / static_cast<double>(subset_size) * std::log(t))) + 1;
}

// Greedy cover of the type class by images of s under the symmetric group: each pick
// maximizes newly covered members, ties going to the lexicographically first
// permutation. Joint types are handled through the product alphabet, so a
// permutation moves (x_i, y_i) pairs together.
inline PermutationCover greedy_permutation_cover(const std::vector<Sequence>& s, const TypeClass& t) {
  if (s.empty()) throw ValidationError("cover needs a non-empty subset");
  const int n = t.n();
  if (n > 8) throw BudgetError("greedy_permutation_cover enumerates the symmetric group; n must be <= 8");
  for (const auto& v : s)
    if (!t.contains(v)) throw ValidationError("subset member outside the type class");

  const auto members = type_class_members(t);
  std::unordered_map<std::uint64_t, std::uint32_t> slot;
  for (std::size_t i = 0; i < members.size(); ++i)
    slot.emplace(sequence_rank(members[i], t.alphabet_size()), static_cast<std::uint32_t>(i));
  std::vector<Sequence> subset(s);
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());

  std::vector<std::vector<int>> perms;
  std::vector<int> im(n);
  std::iota(im.begin(), im.end(), 0);
  do {
    perms.push_back(im);
  } while (std::next_permutation(im.begin(), im.end()));

  std::vector<bool> covered(members.size(), false);
  std::size_t remaining = members.size();
  auto images = [&](const std::vector<int>& p) {
    std::vector<std::uint32_t> out;
    out.reserve(subset.size());
    Sequence w(n);
    for (const auto& v : subset) {
      for (int i = 0; i < n; ++i) w[p[i]] = v[i];
      out.push_back(slot.at(sequence_rank(w, t.alphabet_size())));
    }
    return out;
  };
  auto gain = [&](std::size_t k) {
    std::size_t g = 0;
    auto img = images(perms[k]);
    std::sort(img.begin(), img.end());
    img.erase(std::unique(img.begin(), img.end()), img.end());
    for (auto m : img) g += !covered[m];
    return g;
  };

  // Lazy greedy: gains only shrink as coverage grows, so a stale upper bound that
  // still tops the heap after refresh is the true maximum.
  using Entry = std::pair<std::size_t, std::size_t>;  // (gain, -index via comparator)
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t k = 0; k < perms.size(); ++k) heap.emplace(subset.size(), k);

  PermutationCover out;
  out.class_size = Integer(static_cast<unsigned long>(members.size()));
  out.subset_size = subset.size();
  out.bound = covering_bound(out.class_size, subset.size());
  while (remaining > 0) {
    if (heap.empty()) throw std::logic_error("symmetric group failed to cover the type class");
    auto [stale, k] = heap.top();
    heap.pop();
    const std::size_t g = gain(k);
    if (g == 0) continue;
    if (!heap.empty() && worse(Entry{g, k}, heap.top())) {
      heap.emplace(g, k);
      continue;
    }
    for (auto m : images(perms[k]))
      if (!covered[m]) {
        covered[m] = true;
        --remaining;
      }
    out.permutations.emplace_back(perms[k]);
  }
  if (static_cast<std::int64_t>(out.permutations.size()) > out.bound)
    throw std::logic_error("greedy cover exceeded the covering bound");
  return out;
}

}  // namespace deception

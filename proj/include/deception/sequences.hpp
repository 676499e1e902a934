#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "deception/prob_core.hpp"

namespace deception {

// size^n, saturating at UINT64_MAX.
inline std::uint64_t sequence_count(int alphabet_size, int n) {
  std::uint64_t out = 1;
  for (int i = 0; i < n; ++i) {
    if (out > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(alphabet_size))
      return std::numeric_limits<std::uint64_t>::max();
    out *= static_cast<std::uint64_t>(alphabet_size);
  }
  return out;
}

// Odometer step in lexicographic order; false after the last sequence.
inline bool next_sequence(Sequence& s, int alphabet_size) {
  for (int i = static_cast<int>(s.size()) - 1; i >= 0; --i) {
    if (++s[i] < alphabet_size) return true;
    s[i] = 0;
  }
  return false;
}

// Lexicographic rank of s among all sequences of its length.
inline std::uint64_t sequence_rank(const Sequence& s, int alphabet_size) {
  std::uint64_t r = 0;
  for (Symbol v : s) r = r * static_cast<std::uint64_t>(alphabet_size) + static_cast<std::uint64_t>(v);
  return r;
}

inline Sequence sequence_unrank(std::uint64_t rank, int alphabet_size, int n) {
  Sequence s(n, 0);
  for (int i = n - 1; i >= 0; --i) {
    s[i] = static_cast<Symbol>(rank % static_cast<std::uint64_t>(alphabet_size));
    rank /= static_cast<std::uint64_t>(alphabet_size);
  }
  return s;
}

inline std::vector<Sequence> all_sequences(int alphabet_size, int n) {
  std::vector<Sequence> out;
  Sequence s(n, 0);
  do {
    out.push_back(s);
  } while (next_sequence(s, alphabet_size));
  return out;
}

inline int hamming_distance(const Sequence& a, const Sequence& b) {
  if (a.size() != b.size()) throw ValidationError("hamming_distance: length mismatch");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

// Pairs (x_i, y_i) as symbols x * |Y| + y of the product alphabet.
inline Sequence encode_pairs(const Sequence& x, const Sequence& y, int y_size) {
  if (x.size() != y.size()) throw ValidationError("encode_pairs: length mismatch");
  Sequence out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y_size + y[i];
  return out;
}

inline std::pair<Sequence, Sequence> decode_pairs(const Sequence& joint, int y_size) {
  Sequence x(joint.size()), y(joint.size());
  for (std::size_t i = 0; i < joint.size(); ++i) {
    x[i] = joint[i] / y_size;
    y[i] = joint[i] % y_size;
  }
  return {std::move(x), std::move(y)};
}

}  // namespace deception

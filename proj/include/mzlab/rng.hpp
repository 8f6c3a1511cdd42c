#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace mzlab {

using Rng = std::mt19937_64;

// Derives an independent stream from a tuple of integers (seed, iteration, purpose, ...).
// Streams depend only on the tuple, so work split across threads stays reproducible.
inline Rng derive_rng(std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  words.reserve(key.size() * 2);
  for (std::uint64_t k : key) {
    words.push_back(static_cast<std::uint32_t>(k & 0xffffffffULL));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Purpose tags for derive_rng.
enum class Stream : std::uint64_t {
  init = 1,
  self_play = 2,
  train = 3,
  visualize = 4,
  evaluate = 5,
};

}  // namespace mzlab

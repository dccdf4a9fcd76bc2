#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace lvgg {

/**
 * Seedable generator with reproducible output across platforms.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the
 * standard; distributions come from Boost.Random, whose algorithms do not
 * vary by standard library. Independent streams are derived from a base
 * seed by hashing (seed, stream id) with SplitMix64, so each consumer gets
 * its own stream without advancing anyone else's.
 */
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0) : engine_(mix(seed, stream)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
  }

  // Fisher-Yates, so the permutation does not depend on std::shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::uniform_01<double> uniform_;
};

// Stream ids used by the generators.
namespace streams {
inline constexpr std::uint64_t kSparseFactor = 1;
inline constexpr std::uint64_t kCrossBlock = 2;
inline constexpr std::uint64_t kSamples = 3;
inline constexpr std::uint64_t kOuterSplit = 4;
inline constexpr std::uint64_t kFolds = 5;
}  // namespace streams

}  // namespace lvgg

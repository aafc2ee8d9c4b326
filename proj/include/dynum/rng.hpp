#pragma once

#include <cstdint>
#include <initializer_list>

namespace dynum {

// Counter-based pseudo-random streams. Every stream is identified by a 64-bit
// key; draws are a pure function of (key, counter). Child keys are derived by
// hashing (key, tag, index...) so that replicas, nodes and epochs all get
// statistically independent streams that can be regenerated from the root seed
// alone, in any order and from any thread.

/// SplitMix64 finalizer (Stafford mix13); bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

/// Derives a child stream key from a parent key and one selector word.
constexpr std::uint64_t fold(std::uint64_t key, std::uint64_t v) {
  return mix64((key + 0x9e3779b97f4a7c15ull) ^ mix64(v + 0x632be59bd9b4e019ull));
}

/// fold over several selector words, left to right.
constexpr std::uint64_t fold_seq(std::uint64_t key, std::initializer_list<std::uint64_t> vs) {
  for (std::uint64_t v : vs) key = fold(key, v);
  return key;
}

/// Selector tags used when deriving child streams. Values are arbitrary but fixed:
/// changing them changes every sampled trajectory.
enum class StreamTag : std::uint64_t {
  GraphGen = 0x01,
  InitialState = 0x02,
  NodeStep = 0x03,
  PolicyDecision = 0x04,
  Rollout = 0x05,
  Replica = 0x06,
  Ground = 0x07,
  Site = 0x08,
  Evaluate = 0x09,
  Calibration = 0x0a,
};

constexpr std::uint64_t fold(std::uint64_t key, StreamTag tag) {
  return fold(key, static_cast<std::uint64_t>(tag));
}

/// One keyed stream: SplitMix64 over a Weyl counter. Cheap to construct and
/// copy; deterministic across platforms (pure 64-bit integer arithmetic).
class Rng {
 public:
  Rng() = default;
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ull;
    return mix64(key_ ^ counter_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection; exact.
  std::uint64_t uniform_int(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// In-place Fisher-Yates shuffle.
  template <typename Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace dynum

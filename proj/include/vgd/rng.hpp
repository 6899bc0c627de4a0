#pragma once

#include "vgd/common.hpp"

#include <cstdint>
#include <random>
#include <string>

namespace vgd {

/// Reproducible random stream named by (seed, label). Two streams built from
/// the same pair produce the same draws. Independent workers derive their own
/// streams with derive(); a stream is never shared between consumers.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string label)
      : seed_(seed), label_(std::move(label)), engine_(splitmix64(seed_ ^ fnv1a(label_))) {}

  std::uint64_t seed() const { return seed_; }
  const std::string& label() const { return label_; }

  RngStream derive(const std::string& suffix) const { return RngStream(seed_, label_ + "/" + suffix); }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi], rejection-sampled so it does not depend on
  /// the standard library's distribution implementation.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  template <class Container>
  void shuffle(Container& c) {
    for (std::size_t i = c.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(c[i - 1], c[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::string label_;
  std::mt19937_64 engine_;
};

}  // namespace vgd

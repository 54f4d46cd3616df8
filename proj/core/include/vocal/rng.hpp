#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace vocal {

std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Derives an independent stream seed from a base seed and a salt.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept;

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Seeded generator with fixed, library-independent value mappings.
///
/// std::mt19937_64 output is pinned by the standard, but the standard
/// distributions are not, so the conversions to doubles, bounded integers and
/// normals are done here to keep replays identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool coin() { return (next() >> 63) != 0; }
  /// Standard normal (Box-Muller).
  double gaussian();

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace vocal

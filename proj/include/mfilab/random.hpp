#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace mfilab {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The output is a pure function of (key, domain, counter), so any draw can be
/// addressed directly. Satisfies UniformRandomBitGenerator with 64-bit output.
class Philox {
 public:
  using result_type = std::uint64_t;

  explicit Philox(std::uint64_t key = 0, std::uint64_t domain = 0) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
        domain_(domain) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (cursor_ == 2) {
      refill();
    }
    return buffer_[cursor_++];
  }

  /// Skip to an absolute block index; each block yields two 64-bit outputs.
  void seek(std::uint64_t block) noexcept {
    block_ = block;
    cursor_ = 2;
  }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t domain_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int cursor_ = 2;
};

/// Uniform double on [0, 1) with 53 random bits.
template <class Engine>
double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Uniform double on (0, 1], safe for logarithms.
template <class Engine>
double uniform01_open(Engine& engine) {
  return (static_cast<double>(engine() >> 11) + 1.0) * 0x1.0p-53;
}

/// Standard normal by Box-Muller; consumes exactly two outputs.
template <class Engine>
double standard_normal(Engine& engine) {
  const double u = uniform01_open(engine);
  const double v = uniform01(engine);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

/// Poisson variate; inversion for small means, PTRS-free normal-free fallback
/// via std::poisson_distribution for large means.
std::int64_t poisson_variate(Philox& engine, double mean);

std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_label(std::string_view label) noexcept;

class RngStream;
/// Key of the index-th independent unit drawn from a stream.
std::uint64_t unit_key(const RngStream& stream, std::uint64_t index) noexcept;

/// A reproducible random stream addressed by (seed, path).
///
/// Streams are values: deriving a substream never mutates the parent, and the
/// same (seed, path) yields the same draws regardless of which thread asks.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t key() const noexcept { return key_; }
  const std::vector<std::string>& path() const noexcept { return path_; }
  std::string path_string() const;

  RngStream substream(std::string_view label) const;
  RngStream substream(std::uint64_t index) const;

  Philox engine(std::uint64_t domain = 0) const noexcept { return Philox(key_, domain); }

  friend bool operator==(const RngStream& a, const RngStream& b) {
    return a.seed_ == b.seed_ && a.path_ == b.path_;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::vector<std::string> path_;
};

}  // namespace mfilab

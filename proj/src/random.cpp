#include "mfilab/random.hpp"

#include <random>

namespace mfilab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

void Philox::refill() noexcept {
  std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(block_),
                                 static_cast<std::uint32_t>(block_ >> 32),
                                 static_cast<std::uint32_t>(domain_),
                                 static_cast<std::uint32_t>(domain_ >> 32)};
  std::uint32_t k0 = key_[0];
  std::uint32_t k1 = key_[1];
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  buffer_[0] = (static_cast<std::uint64_t>(c[1]) << 32) | c[0];
  buffer_[1] = (static_cast<std::uint64_t>(c[3]) << 32) | c[2];
  ++block_;
  cursor_ = 0;
}

std::int64_t poisson_variate(Philox& engine, double mean) {
  if (!(mean > 0.0)) {
    return 0;
  }
  if (mean < 30.0) {
    // Inversion by sequential search.
    const double u = uniform01(engine);
    double p = std::exp(-mean);
    double cdf = p;
    std::int64_t k = 0;
    while (u >= cdf && k < 1000) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(engine);
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t hash_label(std::string_view label) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return mix64(h);
}

std::uint64_t unit_key(const RngStream& stream, std::uint64_t index) noexcept {
  return mix64(stream.key() ^ mix64(index * 0xD1B54A32D192ED03ull + 0x8BB84B93962EACC9ull));
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed), key_(mix64(mix64(seed) ^ 0x5EEDull)) {}

std::string RngStream::path_string() const {
  std::string out;
  for (const auto& p : path_) {
    out += '/';
    out += p;
  }
  return out.empty() ? "/" : out;
}

RngStream RngStream::substream(std::string_view label) const {
  RngStream child = *this;
  child.key_ = mix64(key_ ^ mix64(hash_label(label) + 0x632BE59BD9B4E019ull));
  child.path_.emplace_back(label);
  return child;
}

RngStream RngStream::substream(std::uint64_t index) const {
  return substream("#" + std::to_string(index));
}

}  // namespace mfilab

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace realign {

// Counter-based random stream. Every stream is addressed by
// (root seed, name); draws are a pure function of (key, counter), so the
// full generator state serializes as two integers and independent streams
// never interact regardless of evaluation order.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t root_seed, std::string_view name)
      : key_(mix(root_seed ^ fnv1a(name))) {}
  RngStream(std::uint64_t key, std::uint64_t counter, int)
      : key_(key), counter_(counter) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform in [0, 1).
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in the open interval (0, 1); safe under log().
  double next_open_uniform() {
    double u = next_uniform();
    return u > 0.0 ? u : 0x1.0p-53;
  }

  // Standard normal via Box-Muller.
  double next_normal() {
    double u1 = next_open_uniform();
    double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  bool next_bernoulli(double p) { return next_uniform() < p; }

  // Fisher-Yates over [0, n).
  template <typename Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_u64() % i);
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t next_below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  // Derive a child stream; used to fan one root seed out across epochs,
  // batches, and molecules without coupling their draw counts.
  RngStream fork(std::string_view name) const {
    return RngStream(key_ ^ mix(fnv1a(name)), name);
  }
  RngStream fork(std::string_view name, std::uint64_t index) const {
    return RngStream(key_ ^ mix(fnv1a(name) + 0x9e3779b97f4a7c15ULL * (index + 1)), name);
  }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace realign

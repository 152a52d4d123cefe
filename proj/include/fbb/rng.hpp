#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fbb {

/// SplitMix64 finalizer. Used to derive independent stream keys.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A random stream keyed by a seed and a path of stream ids.
///
/// `RngStream(seed).child(r).child(b)` is a pure function of (seed, r, b), so
/// any replicate can be regenerated on any thread in any order. Streams are
/// consumed by value-semantics engines; copying a stream copies its state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(mix64(seed)), engine_(seed_seq(key_)) {}

  /// Independent sub-stream for the given id; does not advance this stream.
  [[nodiscard]] RngStream child(std::uint64_t id) const {
    return RngStream(Key{mix64(key_ ^ mix64(id + 0x632be59bd9b4e019ULL))});
  }

  [[nodiscard]] RngStream child(std::initializer_list<std::uint64_t> path) const {
    RngStream s = *this;
    for (auto id : path) s = s.child(id);
    return s;
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(engine_);
  }

  double normal() { return normal_(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  struct Key {
    std::uint64_t value;
  };
  explicit RngStream(Key k) : key_(k.value), engine_(seed_seq(key_)) {}

  static std::mt19937_64 seed_seq(std::uint64_t key) {
    std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                      static_cast<std::uint32_t>(mix64(key)),
                      static_cast<std::uint32_t>(mix64(key) >> 32)};
    return std::mt19937_64(seq);
  }

  std::uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fbb

#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace qkm {

/// Philox4x32-10 counter-based block function (Salmon, Moraes, Dror, Shaw 2011).
///
/// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits. Being a pure
/// function of (counter, key), any draw can be reproduced independently of how many
/// other draws happened before it, on any platform.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key) noexcept;
};

/// Sequential stream of uniform draws backed by Philox4x32-10.
///
/// The key is the 64-bit seed; counter words 2..3 hold the stream id and words 0..1
/// the draw index, so (seed, stream) pairs give non-overlapping sequences.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, bound) without modulo bias. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  void refill() noexcept;

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  int available_ = 0;
};

/// Deterministically mixes a seed with tags (SplitMix64 finalizer chain). Used to give
/// every Gram entry / sample / stage its own schedule-independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) noexcept;

}  // namespace qkm

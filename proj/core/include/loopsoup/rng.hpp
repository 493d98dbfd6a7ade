#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace loopsoup {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
//
// The draw sequence is a pure function of (seed, stream_id), so replicas of a
// Monte Carlo experiment can be assigned disjoint streams up front and produce
// identical output no matter how they are scheduled across threads.  Verified
// against the three canonical test vectors from the reference implementation.
class PhiloxEngine {
 public:
  using result_type = std::uint32_t;

  PhiloxEngine() : PhiloxEngine(0, 0) {}

  PhiloxEngine(std::uint64_t seed, std::uint64_t stream_id) {
    key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    ctr_ = {0, 0, static_cast<std::uint32_t>(stream_id),
            static_cast<std::uint32_t>(stream_id >> 32)};
    idx_ = 4;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<std::uint32_t>::max(); }

  result_type operator()() {
    if (idx_ == 4) {
      block_ = bijection(ctr_, key_);
      // 64-bit draw counter in words 0..1; words 2..3 hold the stream id.
      if (++ctr_[0] == 0) ++ctr_[1];
      idx_ = 0;
    }
    return block_[idx_++];
  }

  // Uniform double in [0,1) with 53 random bits.
  double next_double() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return static_cast<double>(((hi << 32) | lo) >> 11) * 0x1.0p-53;
  }

  // Uniform double in (0,1]; safe as an argument to log().
  double next_double_pos() { return 1.0 - next_double(); }

  // The keyed bijection applied to one counter block.
  static std::array<std::uint32_t, 4> bijection(std::array<std::uint32_t, 4> ctr,
                                                std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      if (round != 9) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
    }
    return ctr;
  }

 private:
  static std::array<std::uint32_t, 4> single_round(const std::array<std::uint32_t, 4>& ctr,
                                                   const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }

  std::array<std::uint32_t, 4> ctr_;
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> block_;
  int idx_;
};

// Addressable position in the family of generator streams.  Samplers take an
// RngStream rather than an engine so that a run can be reproduced bit for bit
// from (seed, stream_id) alone.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  PhiloxEngine engine() const { return PhiloxEngine(seed, stream_id); }

  // Stream for the r-th replica of the job rooted at this stream.
  RngStream replica(std::uint64_t r) const { return {seed, stream_id + r}; }
};

}  // namespace loopsoup

#pragma once

#include <cstdint>

// Counter-based RNG (Philox4x32-10). A generator is keyed by (seed, stream)
// and produces a fixed sequence indexed by a 64-bit block counter, so any
// draw is addressable: replicate results do not depend on scheduling, and a
// stream can be repositioned for tests. One block is 4x32 bits.

namespace efc {

class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream)
      : stream_(stream), key0_(std::uint32_t(seed)),
        key1_(std::uint32_t(seed >> 32)) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) {
      fill_block();
      block_ += 1;
      pos_ = 0;
    }
    return out_[pos_++];
  }

  std::uint64_t next_u64() {
    std::uint64_t lo = next_u32();
    return lo | (std::uint64_t(next_u32()) << 32);
  }

  // strictly inside (0, 1); safe under log() and log1p(-u)
  double uniform01() {
    return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // reposition to the start of a 4x32 block; draws before/after line up
  // with a fresh generator advanced block_index blocks
  void seek(std::uint64_t block_index) {
    block_ = block_index;
    pos_ = 4;
  }

  std::uint64_t block_index() const { return block_; }
  std::uint64_t stream() const { return stream_; }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return std::uint32_t((std::uint64_t(a) * b) >> 32);
  }

  void fill_block() {
    std::uint32_t x0 = std::uint32_t(block_);
    std::uint32_t x1 = std::uint32_t(block_ >> 32);
    std::uint32_t x2 = std::uint32_t(stream_);
    std::uint32_t x3 = std::uint32_t(stream_ >> 32);
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int r = 0; r < 10; ++r) {
      const std::uint32_t hi0 = mulhi(0xD2511F53u, x0);
      const std::uint32_t lo0 = 0xD2511F53u * x0;
      const std::uint32_t hi1 = mulhi(0xCD9E8D57u, x2);
      const std::uint32_t lo1 = 0xCD9E8D57u * x2;
      x0 = hi1 ^ x1 ^ k0;
      x1 = lo1;
      x2 = hi0 ^ x3 ^ k1;
      x3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = x0;
    out_[1] = x1;
    out_[2] = x2;
    out_[3] = x3;
  }

  std::uint64_t stream_ = 0;
  std::uint64_t block_ = 0;
  std::uint32_t key0_ = 0, key1_ = 0;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  int pos_ = 4;
};

}  // namespace efc

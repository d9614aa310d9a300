#pragma once

#include <array>
#include <cstdint>

namespace clelab {

// Philox4x32-10 counter-based generator. Streams are keyed by
// (master seed, chain index), so parallel chains are independent and any
// state is restorable bit-exactly from four integers.
class PhiloxRng {
 public:
  PhiloxRng(std::uint64_t seed, std::uint64_t chain_index);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  double uniform();                    // [0, 1), 53-bit
  std::uint32_t uniform_below(std::uint32_t n);  // unbiased in [0, n)

  std::uint64_t seed() const { return seed_; }
  std::uint64_t chain_index() const { return chain_; }
  std::uint64_t block() const { return block_; }
  int buffer_pos() const { return pos_; }

  static PhiloxRng restore(std::uint64_t seed, std::uint64_t chain_index,
                           std::uint64_t block, int buffer_pos);

  friend bool operator==(const PhiloxRng& a, const PhiloxRng& b) {
    return a.seed_ == b.seed_ && a.chain_ == b.chain_ &&
           a.block_ == b.block_ && a.pos_ == b.pos_;
  }

 private:
  std::uint64_t seed_, chain_;
  std::uint64_t block_ = 0;  // counter of the next block to generate
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;  // consumed position in buf_

  void generate_block();
};

}  // namespace clelab

#include "clelab/rng.hpp"

#include <stdexcept>

namespace clelab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t* hi,
                    std::uint32_t* lo) {
  const std::uint64_t p = std::uint64_t(a) * std::uint64_t(b);
  *hi = std::uint32_t(p >> 32);
  *lo = std::uint32_t(p);
}

}  // namespace

PhiloxRng::PhiloxRng(std::uint64_t seed, std::uint64_t chain_index)
    : seed_(seed), chain_(chain_index) {}

void PhiloxRng::generate_block() {
  std::uint32_t c0 = std::uint32_t(block_);
  std::uint32_t c1 = std::uint32_t(block_ >> 32);
  std::uint32_t c2 = std::uint32_t(chain_);
  std::uint32_t c3 = std::uint32_t(chain_ >> 32);
  std::uint32_t k0 = std::uint32_t(seed_);
  std::uint32_t k1 = std::uint32_t(seed_ >> 32);
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c0, &hi0, &lo0);
    mulhilo(kPhiloxM1, c2, &hi1, &lo1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n1 = lo1;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    const std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  buf_ = {c0, c1, c2, c3};
  ++block_;
  pos_ = 0;
}

std::uint32_t PhiloxRng::next_u32() {
  if (pos_ >= 4) generate_block();
  return buf_[std::size_t(pos_++)];
}

std::uint64_t PhiloxRng::next_u64() {
  const std::uint64_t lo = next_u32();
  const std::uint64_t hi = next_u32();
  return (hi << 32) | lo;
}

double PhiloxRng::uniform() {
  return double(next_u64() >> 11) * (1.0 / 9007199254740992.0);
}

std::uint32_t PhiloxRng::uniform_below(std::uint32_t n) {
  if (n <= 1) return 0;
  const std::uint64_t span = std::uint64_t(1) << 32;
  const std::uint64_t bound = span - span % n;
  for (;;) {
    const std::uint64_t v = next_u32();
    if (v < bound) return std::uint32_t(v % n);
  }
}

PhiloxRng PhiloxRng::restore(std::uint64_t seed, std::uint64_t chain_index,
                             std::uint64_t block, int buffer_pos) {
  PhiloxRng r(seed, chain_index);
  if (buffer_pos < 0 || buffer_pos > 4)
    throw std::out_of_range("PhiloxRng: bad buffer position");
  if (block == 0) {
    if (buffer_pos != 4)
      throw std::out_of_range("PhiloxRng: block 0 has no generated buffer");
    return r;
  }
  r.block_ = block - 1;
  r.generate_block();
  r.pos_ = buffer_pos;
  return r;
}

}  // namespace clelab

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace nvsens {

// Philox4x32-10 (Salmon et al., SC'11). A counter-based generator: every
// (key, counter) pair maps to an independent block of four 32-bit words, so
// any shot can be regenerated without replaying earlier ones.
class Philox4x32 {
public:
  using result_type = std::uint32_t;
  using counter_type = std::array<std::uint32_t, 4>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{0u, 0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (idx_ == 4) {
      buf_ = block(ctr_, key_);
      if (++ctr_[0] == 0) ++ctr_[1];
      idx_ = 0;
    }
    return buf_[idx_++];
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = (*this)() >> 5;
    const std::uint64_t lo = (*this)() >> 6;
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
  }

  static counter_type block(counter_type c, std::array<std::uint32_t, 2> k) {
    for (int r = 0; r < 10; ++r) {
      c = round(c, k);
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    return c;
  }

private:
  static counter_type round(const counter_type& c, const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }

  std::array<std::uint32_t, 2> key_;
  counter_type ctr_;
  counter_type buf_{};
  int idx_ = 4;
};

}  // namespace nvsens

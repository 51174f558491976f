#pragma once

// Counter-based random streams. Every value is a pure function of
// (seed, counter), so perturbations can be regenerated from (seed, index)
// instead of being stored.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace kerzoo {

/// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
class philox4x32 {
 public:
  using counter_type = std::array<std::uint32_t, 4>;
  using key_type = std::array<std::uint32_t, 2>;

  explicit constexpr philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr counter_type operator()(counter_type ctr) const noexcept {
    key_type key = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, key);
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr std::pair<std::uint32_t, std::uint32_t> mulhilo(std::uint32_t a,
                                                                    std::uint32_t b) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    return {static_cast<std::uint32_t>(p >> 32), static_cast<std::uint32_t>(p)};
  }

  static constexpr counter_type single_round(const counter_type& c, const key_type& k) noexcept {
    const auto [hi0, lo0] = mulhilo(kMul0, c[0]);
    const auto [hi1, lo1] = mulhilo(kMul1, c[2]);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }

  key_type key_;
};

/// Named sub-streams so that independent quantities drawn for the same
/// index never share counters.
enum class stream : std::uint32_t {
  direction = 0,
  scalar = 1,
  rotation = 2,
  dataset = 3,
  init = 4,
};

/// A deterministic stream of 64-bit words addressed by (seed, index, stream).
/// Block b of the stream yields two words.
class counter_stream {
 public:
  constexpr counter_stream(std::uint64_t seed, std::uint64_t index, stream s) noexcept
      : gen_(seed), index_(index), stream_(static_cast<std::uint32_t>(s)) {}

  constexpr std::array<std::uint64_t, 2> block(std::uint32_t b) const noexcept {
    const auto out = gen_({static_cast<std::uint32_t>(index_),
                           static_cast<std::uint32_t>(index_ >> 32), b, stream_});
    return {(static_cast<std::uint64_t>(out[0]) << 32) | out[1],
            (static_cast<std::uint64_t>(out[2]) << 32) | out[3]};
  }

 private:
  philox4x32 gen_;
  std::uint64_t index_;
  std::uint32_t stream_;
};

/// Uniform on [0, 1) with 53 random bits.
constexpr double to_unit_interval(std::uint64_t word) noexcept {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

/// Uniform on (0, 1].
constexpr double to_open_unit_interval(std::uint64_t word) noexcept {
  return static_cast<double>((word >> 11) + 1) * 0x1.0p-53;
}

/// Box-Muller pair from one stream block.
inline std::pair<double, double> gaussian_pair(const counter_stream& s, std::uint32_t b) {
  const auto words = s.block(b);
  const double radius = std::sqrt(-2.0 * std::log(to_open_unit_interval(words[0])));
  const double angle = 2.0 * std::numbers::pi * to_unit_interval(words[1]);
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Fills `out` with standard normal deviates; element k comes from block k/2.
template <class Range>
void fill_gaussian(const counter_stream& s, Range& out) {
  const std::size_t n = std::size(out);
  for (std::size_t k = 0; k < n; k += 2) {
    const auto [z0, z1] = gaussian_pair(s, static_cast<std::uint32_t>(k / 2));
    out[k] = z0;
    if (k + 1 < n) out[k + 1] = z1;
  }
}

/// Derives the seed of repeat `i` from a master seed.
constexpr std::uint64_t repeat_seed(std::uint64_t master, std::uint64_t i) noexcept {
  return master ^ (i * 0x9E3779B97F4A7C15ull);
}

}  // namespace kerzoo

#include "sectorial/util/rng.hpp"

#include <cmath>
#include <numbers>

namespace sectorial::util {

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

inline double to_open_unit(std::uint64_t bits) {
  // 53 random bits mapped to the open interval (0, 1).
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> c,
                                        std::array<std::uint32_t, 2> k) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      k[0] += kWeyl0;
      k[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
  return c;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream),
      substream_(substream) {}

std::array<std::uint32_t, 4> RandomStream::block(std::uint64_t index, std::uint32_t lane) const {
  // Counter layout: [block index low, substream and lane, stream low, stream high].
  // The top bit of word 1 separates the sequential and random-access lanes.
  const std::uint32_t word1 = (substream_ & 0x7FFFFFFFu) | (lane << 31);
  return philox4x32({static_cast<std::uint32_t>(index), word1, static_cast<std::uint32_t>(stream_),
                     static_cast<std::uint32_t>(stream_ >> 32)},
                    {key_[0] ^ static_cast<std::uint32_t>(index >> 32), key_[1]});
}

std::uint64_t RandomStream::next_u64() {
  if (buffered_ < 2) {
    buffer_ = block(next_block_++, 0);
    buffered_ = 4;
  }
  const int at = 4 - buffered_;
  buffered_ -= 2;
  return (static_cast<std::uint64_t>(buffer_[at]) << 32) | buffer_[at + 1];
}

double RandomStream::uniform() { return to_open_unit(next_u64()); }

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  // Multiply-shift; the bias is below 2^-64 * n and irrelevant here.
  const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
  return static_cast<std::uint64_t>(wide >> 64);
}

double RandomStream::normal_at(std::uint64_t i) const {
  const auto b = block(i >> 1, 1);
  const double u1 = to_open_unit((static_cast<std::uint64_t>(b[0]) << 32) | b[1]);
  const double u2 = to_open_unit((static_cast<std::uint64_t>(b[2]) << 32) | b[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (i & 1) ? radius * std::sin(angle) : radius * std::cos(angle);
}

void RandomStream::normals_at(std::uint64_t first, std::span<double> out) const {
  std::size_t k = 0;
  const std::size_t n = out.size();
  if (n == 0) return;
  if (first & 1) out[k++] = normal_at(first);
  for (; k + 1 < n; k += 2) {
    const auto b = block((first + k) >> 1, 1);
    const double u1 = to_open_unit((static_cast<std::uint64_t>(b[0]) << 32) | b[1]);
    const double u2 = to_open_unit((static_cast<std::uint64_t>(b[2]) << 32) | b[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    out[k] = radius * std::cos(angle);
    out[k + 1] = radius * std::sin(angle);
  }
  if (k < n) out[k] = normal_at(first + k);
}

}  // namespace sectorial::util

#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace sectorial::util {

// Philox4x32-10 block function (Salmon et al. 2011).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// A reproducible stream of uniforms and normals. The key is the master seed;
// the counter carries (stream, substream, block) so any stream can be
// generated independently of any other. Normals use Box-Muller so values do
// not depend on the standard library implementation.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream = 0);

  std::uint64_t next_u64();
  double uniform();              // in (0, 1)
  double uniform(double lo, double hi);
  double normal();
  std::uint64_t below(std::uint64_t n);  // uniform integer in [0, n)

  // Random access: the i-th standard normal of this stream's random-access
  // sequence. Independent of the sequential state.
  double normal_at(std::uint64_t i) const;
  // out[k] = normal_at(first + k), sharing one counter block per pair
  void normals_at(std::uint64_t first, std::span<double> out) const;

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t index, std::uint32_t lane) const;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint32_t substream_;
  std::uint64_t next_block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sectorial::util

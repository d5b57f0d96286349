#pragma once

#include <cstdint>

namespace corsched {

// Counter-based noise source. Every draw is addressed by
// (stream, step, component) and hashed independently of any other draw, so
// two rollouts sharing a seed see identical randomness no matter how many
// projections either one performs. That property is what makes paired
// schedule comparisons valid, and it is asserted by tests rather than
// assumed.
class NoiseStream {
 public:
  enum Stream : std::uint64_t {
    kInit = 1,      // initial state construction
    kDynamics = 2,  // per-step process noise
  };

  explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform(Stream stream, std::uint64_t step, std::uint64_t component) const;

  // Standard normal via Box-Muller on two derived uniforms.
  double gaussian(Stream stream, std::uint64_t step, std::uint64_t component) const;

  // Copy of this stream whose draws at step >= from_step come from a
  // different counter family. Draws before from_step are unchanged. Used to
  // check that a correction decision at step t never depends on noise the
  // dynamics has not consumed yet.
  NoiseStream resalted_from(std::uint64_t from_step, std::uint64_t salt) const;

 private:
  std::uint64_t word(Stream stream, std::uint64_t step, std::uint64_t component) const;

  std::uint64_t seed_ = 0;
  std::uint64_t salt_ = 0;
  std::uint64_t salt_from_ = ~0ull;
};

}  // namespace corsched

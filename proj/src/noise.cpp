#include "corsched/noise.hpp"

#include <cmath>

namespace corsched {
namespace {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline double to_unit(std::uint64_t w) {
  // Top 53 bits -> [0, 1).
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

}  // namespace

std::uint64_t NoiseStream::word(Stream stream, std::uint64_t step,
                                std::uint64_t component) const {
  std::uint64_t h = splitmix64(seed_ ^ 0x431bd1c86a4dd1b5ull);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ull));
  if (step >= salt_from_) h = splitmix64(h ^ salt_ ^ 0xd6e8feb86659fd93ull);
  h = splitmix64(h ^ (step * 0xff51afd7ed558ccdull));
  h = splitmix64(h ^ (component * 0xc4ceb9fe1a85ec53ull));
  return h;
}

double NoiseStream::uniform(Stream stream, std::uint64_t step,
                            std::uint64_t component) const {
  return to_unit(word(stream, step, component));
}

double NoiseStream::gaussian(Stream stream, std::uint64_t step,
                             std::uint64_t component) const {
  std::uint64_t w = word(stream, step, component);
  // Box-Muller. u1 is shifted into (0, 1] so the log is finite.
  double u1 = (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
  double u2 = to_unit(splitmix64(w ^ 0xa0761d6478bd642full));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

NoiseStream NoiseStream::resalted_from(std::uint64_t from_step,
                                       std::uint64_t salt) const {
  NoiseStream out(*this);
  out.salt_from_ = from_step;
  out.salt_ = salt;
  return out;
}

}  // namespace corsched

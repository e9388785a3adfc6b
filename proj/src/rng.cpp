#include "ktt/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ktt {

namespace {

// splitmix64 finalizer
std::uint64_t scramble(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return scramble(scramble(a) ^ (0x9e3779b97f4a7c15ULL + b));
}

namespace streams {

std::uint64_t derive(std::uint64_t tag, std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(tag, a), b);
}

}  // namespace streams

Rng::Rng(RngSpec spec) : eng_(mix64(spec.seed, spec.stream)) {}

double Rng::uniform01() {
  // 53-bit mantissa, shifted into (0, 1]
  return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::int64_t Rng::below(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("Rng::below: n must be positive");
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t draw;
  do {
    draw = eng_();
  } while (draw >= limit);
  return static_cast<std::int64_t>(draw % un);
}

}  // namespace ktt

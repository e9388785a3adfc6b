#pragma once

#include <cstdint>
#include <random>

namespace ktt {

/// Seed plus logical stream id. Distinct streams drawn from one seed are
/// independent for practical purposes and reproducible bit-for-bit, which is
/// what lets serial and simulated-parallel runs draw identical matrices.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

namespace streams {

inline constexpr std::uint64_t kDenseSketch = 0x64656e7365ULL;
inline constexpr std::uint64_t kKronSketch = 0x6b726f6eULL;
inline constexpr std::uint64_t kReuseSketch = 0x7265757365ULL;
inline constexpr std::uint64_t kSynthFactor = 0x73796e2d66ULL;
inline constexpr std::uint64_t kSynthCore = 0x73796e2d63ULL;
inline constexpr std::uint64_t kSynthNoise = 0x73796e2d6eULL;
inline constexpr std::uint64_t kHaarSubspace = 0x68616172ULL;
inline constexpr std::uint64_t kGeneric = 0x67656eULL;

/// Stream id for (tag, a, b), e.g. (kKronSketch, mode, factor).
std::uint64_t derive(std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace streams

/// Deterministic scalar generator. Gaussians come from Box-Muller on top of
/// mt19937_64 rather than std::normal_distribution, whose output sequence is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(RngSpec spec);

  std::uint64_t next_u64() { return eng_(); }
  double uniform01();  // in (0, 1]
  double gaussian();
  std::int64_t below(std::int64_t n);  // uniform in [0, n), unbiased

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace ktt

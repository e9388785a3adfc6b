#pragma once

#include "ktt/tensor.hpp"

#include <cstdint>
#include <vector>

namespace ktt {

/// Superdiagonal tensor with entries decay^(i-1), rotated by independent
/// random orthogonal factors in every mode. Each mode-j unfolding then has
/// singular values exactly decay^(i-1), so truncation errors have a closed
/// form and are independent of the mode sizes.
DenseTensor synth_geometric(const std::vector<index_t>& dims, double decay, std::uint64_t seed);

/// Unit-norm random Tucker tensor (Gaussian core, orthonormal factors) plus
/// Gaussian noise scaled to noise_rel.
DenseTensor synth_lowrank_noise(const std::vector<index_t>& dims, const std::vector<index_t>& true_rank,
                                double noise_rel, std::uint64_t seed);

/// Gaussian core times unnormalized Gaussian factors: exactly rank_j nonzero
/// singular values per mode.
DenseTensor synth_exact_lowrank(const std::vector<index_t>& dims, const std::vector<index_t>& rank,
                                std::uint64_t seed);

}  // namespace ktt

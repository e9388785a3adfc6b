#pragma once

#include "ktt/flops.hpp"
#include "ktt/linalg.hpp"
#include "ktt/sketch.hpp"
#include "ktt/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ktt {

struct Provenance {
  std::string algorithm;
  std::vector<index_t> rank;
  index_t oversample = 0;
  std::uint64_t seed = 0;
  Distribution requested_distribution = Distribution::Auto;
  SketchPlan plan;
  std::vector<std::string> fallbacks;  // human-readable notes, one per fallback draw
  std::vector<int> mode_order;
  bool rank_ell_only = false;
  std::optional<double> relative_error;
};

struct TuckerDecomposition {
  DenseTensor core;
  std::vector<FactorMatrix> factors;
  Provenance provenance;

  // Populated when TuckerOptions::keep_intermediate is set: the oversampled
  // factors and core before recompression, for error-splitting diagnostics.
  std::optional<DenseTensor> sketch_core;
  std::vector<FactorMatrix> sketch_factors;
};

struct TuckerOptions {
  index_t oversample = 5;
  Distribution distribution = Distribution::Auto;
  std::uint64_t seed = 0;
  std::vector<int> mode_order;  // empty = 0..d-1 (sequential algorithms only)
  bool use_dimtree = true;      // factor-reuse algorithm only
  bool rank_ell_only = false;   // skip recompression, return the rank-ell result
  bool keep_intermediate = false;
  FlopCounter* counter = nullptr;
};

/// Classical truncated higher-order SVD: factor j from the top-r_j left
/// singular vectors of the mode-j unfolding of x, core by multi-TTM.
TuckerDecomposition hosvd(const DenseTensor& x, const std::vector<index_t>& rank,
                          FlopCounter* counter = nullptr);

/// Sequentially truncated HOSVD: the tensor shrinks after each mode, so later
/// unfoldings are cheaper. mode_order empty means 0..d-1.
TuckerDecomposition sthosvd(const DenseTensor& x, const std::vector<index_t>& rank,
                            std::vector<int> mode_order = {}, FlopCounter* counter = nullptr);

/// Randomized range finder: orthonormal basis for range(m * omega).
FactorMatrix rand_range_finder(const Matrix& m, const Matrix& omega, FlopCounter* counter = nullptr);

/// Randomized truncated SVD of m with the given test matrix, keeping `rank`
/// components.
SvdResult rand_svd(const Matrix& m, index_t rank, const Matrix& omega, FlopCounter* counter = nullptr);

// Randomized Tucker family. All of them sketch each mode to ell_j = r_j + p
// (or a slightly adjusted ell'_j for the Kronecker planners), orthonormalize
// the sketch, then recompress the small core down to the requested rank.
TuckerDecomposition rhosvd(const DenseTensor& x, const std::vector<index_t>& rank,
                           const TuckerOptions& opt = {});
TuckerDecomposition rsthosvd(const DenseTensor& x, const std::vector<index_t>& rank,
                             const TuckerOptions& opt = {});
TuckerDecomposition rhosvd_kron(const DenseTensor& x, const std::vector<index_t>& rank,
                                const TuckerOptions& opt = {});
TuckerDecomposition rsthosvd_kron(const DenseTensor& x, const std::vector<index_t>& rank,
                                  const TuckerOptions& opt = {});
TuckerDecomposition rhosvd_kron_reuse(const DenseTensor& x, const std::vector<index_t>& rank,
                                      const TuckerOptions& opt = {});

struct CoreTruncation {
  DenseTensor core;
  std::vector<FactorMatrix> rotations;  // ell'_j x r_j, orthonormal
};

/// Deterministic recompression of an oversampled core down to `rank`,
/// using direct SVDs (the cores are small, accuracy wins over speed here).
CoreTruncation truncate_core(const DenseTensor& g_hat, const std::vector<index_t>& rank,
                             FlopCounter* counter = nullptr);

DenseTensor reconstruct(const TuckerDecomposition& t, FlopCounter* counter = nullptr);

double relative_error(const DenseTensor& x, const TuckerDecomposition& t);

enum class Algorithm {
  Hosvd,
  Sthosvd,
  Rhosvd,
  Rsthosvd,
  RhosvdKron,
  RsthosvdKron,
  RhosvdKronReuse,
};

TuckerDecomposition decompose(Algorithm alg, const DenseTensor& x, const std::vector<index_t>& rank,
                              const TuckerOptions& opt = {});
std::optional<Algorithm> algorithm_from_name(std::string_view name);
std::string algorithm_name(Algorithm alg);
const std::vector<Algorithm>& all_algorithms();
const std::vector<Algorithm>& randomized_algorithms();

}  // namespace ktt

#pragma once

#include "ktt/rng.hpp"
#include "ktt/tensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ktt {

enum class Distribution { Auto, Gaussian, Srht };

std::string to_string(Distribution d);
std::optional<Distribution> distribution_from_name(const std::string& name);

/// Auto resolves to SRHT when every mode size is a power of two, else Gaussian.
Distribution resolve_distribution(Distribution requested, const std::vector<index_t>& dims);

bool is_power_of_two(index_t n);

/// rows x cols of iid N(0,1), filled column by column.
Matrix gen_gaussian(index_t rows, index_t cols, RngSpec rng);

/// Subsampled randomized Hadamard transform: rows must be a power of two.
/// Phi = D * H where D is a random Rademacher diagonal and H holds `cols`
/// distinct columns (sampled without replacement) of the rows x rows
/// Walsh-Hadamard matrix scaled by 1/sqrt(rows). Every entry is exactly
/// +-1/sqrt(rows) and the columns are orthonormal.
Matrix gen_srht(index_t rows, index_t cols, RngSpec rng);

struct DrawResult {
  Matrix phi;
  Distribution used = Distribution::Gaussian;
  bool fallback = false;  // SRHT was requested but rows is not a power of two
};

DrawResult draw_sketch_matrix(Distribution requested, index_t rows, index_t cols, RngSpec rng);

/// Integer sketch-size table for the per-mode Kronecker sketches: row j holds
/// d-1 factors (diagonal fixed at 1) whose product is the smallest value
/// ell'_j in [rank_j + oversample, rank_j + oversample + max_adjust] that
///   - factors into d-1 integers, each >= 2 whenever ell'_j >= 2^(d-1)
///     (ones allowed below that),
///   - admits an assignment with s(j,k) <= dims[k] for every k != j,
///   - satisfies ell'_j <= dims[j] so the downstream QR stays thin.
/// Among the factorizations of ell'_j the most balanced one wins (smallest
/// max/min ratio, ties broken lexicographically on the sorted factor tuple);
/// ascending factors land on ascending column indices unless a capacity
/// violation forces the next permutation.
struct SubrankMatrix {
  std::vector<std::vector<index_t>> s;  // d x d, diagonal 1
  std::vector<index_t> adjusted_ell;    // row products
};

SubrankMatrix plan_subrank_matrix(const std::vector<index_t>& dims, const std::vector<index_t>& ranks,
                                  index_t oversample, index_t max_adjust = 16);

/// One row of the table above, planned against `dims` as the capacities. The
/// sequential variant replans each mode against the partially shrunk core, so
/// it needs rows one at a time.
struct SubrankRow {
  std::vector<index_t> s;  // length d, 1 at `mode`
  index_t adjusted_ell = 0;
};

SubrankRow plan_subrank_row(const std::vector<index_t>& dims, int mode, index_t ell_base,
                            index_t max_adjust = 16);

/// Single shared sketch-size vector: s_i = ceil((prod_j ell_j)^(1/(d-1)) / ell_i)
/// with ell_j = rank_j + oversample, computed in exact integer arithmetic.
struct SubrankVector {
  std::vector<index_t> s;
};

SubrankVector plan_subrank_vector(const std::vector<index_t>& ranks, index_t oversample,
                                  const std::vector<index_t>& dims);

/// Record of one random-matrix draw, kept for provenance.
struct PhiDraw {
  int mode = -1;    // mode whose basis this draw serves (-1: shared across modes)
  int factor = -1;  // mode the matrix contracts (-1: dense, contracts all others)
  index_t rows = 0;
  index_t cols = 0;
  Distribution used = Distribution::Gaussian;
  bool fallback = false;
};

struct SketchPlan {
  std::optional<SubrankMatrix> subrank_matrix;
  std::optional<SubrankVector> subrank_vector;
  std::vector<PhiDraw> draws;
};

}  // namespace ktt

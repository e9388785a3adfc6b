#pragma once

#include "ktt/flops.hpp"
#include "ktt/tensor.hpp"

#include <cstdint>
#include <vector>

namespace ktt {

/// Output of the shared-intermediate sketch pass: sketches[j] is the input
/// contracted with every projection except the one for mode j.
struct SketchSet {
  std::vector<DenseTensor> sketches;
  std::int64_t ttm_applications = 0;   // single-mode products performed
  std::int64_t node_evaluations = 0;   // partial results formed (tree edges)
  std::int64_t flops = 0;
};

/// Computes all d per-mode sketches X x_{k != j} Phi_k^T. The projections are
/// passed tall (n_k x s_k) and applied transposed.
///
/// With use_tree the modes are recursively split into consecutive halves
/// (extra mode on the left); each tree node materializes the input contracted
/// with its sibling's mode set, and both children reuse it. A tree over d
/// modes evaluates 2(d-1) edges instead of the d independent multi-TTM passes
/// of the naive route, which for cubic inputs approaches a d/2 flop ratio.
/// Node results are freed once both children are done, so the walk holds at
/// most ceil(log2 d) partial tensors beyond the input and finished sketches.
SketchSet all_mode_sketches(const DenseTensor& x, const std::vector<Matrix>& phis,
                            bool use_tree = true, FlopCounter* counter = nullptr);

/// Exact flop count the sketch pass above performs on a cubic tensor
/// (all mode sizes n, all sketch widths r), obtained by replaying the shape
/// recursion without touching data. Works for any d >= 2.
std::int64_t predicted_sketch_flops(index_t n, index_t r, int d, bool with_tree);

/// Edge evaluations the tree performs: 2(d-1). The naive route spends d
/// multi-TTM passes of d-1 products each, i.e. d(d-1) single-mode products.
std::int64_t predicted_node_evaluations(int d, bool with_tree);
std::int64_t predicted_ttm_applications(int d, bool with_tree);

}  // namespace ktt

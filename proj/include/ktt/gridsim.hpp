#pragma once

#include "ktt/tensor.hpp"
#include "ktt/tucker.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ktt::grid {

using ktt::index_t;
using ktt::Matrix;

/// Logical d-way processor grid. Ranks linearize coordinates with mode 0
/// fastest, matching the tensor layout.
struct GridContext {
  std::vector<index_t> shape;

  int order() const { return static_cast<int>(shape.size()); }
  index_t nprocs() const;
  index_t rank_of(const std::vector<index_t>& coords) const;
  std::vector<index_t> coords_of(index_t rank) const;

  /// Ranks sharing every coordinate except `mode`, ascending in that
  /// coordinate (a grid "fiber").
  std::vector<index_t> fiber_ranks(const std::vector<index_t>& coords, int mode) const;
  /// Ranks sharing coordinate `mode` (a grid "slice"), ascending by rank.
  std::vector<index_t> slice_ranks(index_t mode_coord, int mode) const;
};

struct PhaseCounters {
  std::int64_t flops = 0;
  std::int64_t words_sent = 0;
  std::int64_t words_recv = 0;
  std::int64_t messages = 0;
};

/// One collective, as charged. payload is the element count each member
/// contributed (they are always equal-sized here); chunk sizes may differ.
struct CollectiveEvent {
  std::string phase;
  std::string kind;  // reduce_scatter | all_gather | all_reduce
  index_t group_size = 0;
  std::int64_t payload = 0;
  std::int64_t total_sent = 0;
  std::int64_t total_recv = 0;
};

/// Per-processor, per-phase computation and communication counters. Words and
/// messages follow the usual collective cost model: a reduce-scatter or
/// all-gather over g members moves (g-1)/g of the data per member and takes
/// ceil(log2 g) message rounds; an all-reduce is the two back to back.
class CommStats {
 public:
  CommStats() = default;
  explicit CommStats(index_t nprocs) : nprocs_(nprocs) {}

  index_t nprocs() const { return nprocs_; }
  void set_phase(std::string phase) { phase_ = std::move(phase); }
  const std::string& phase() const { return phase_; }

  void charge_flops(index_t rank, std::int64_t flops);
  void charge_comm(index_t rank, std::int64_t sent, std::int64_t recv, std::int64_t messages);
  void log_event(CollectiveEvent event) { events_.push_back(std::move(event)); }

  const std::vector<CollectiveEvent>& events() const { return events_; }
  PhaseCounters totals(index_t rank) const;
  PhaseCounters phase_totals(const std::string& phase, index_t rank) const;
  std::vector<std::string> phases() const;

  std::int64_t grid_words_sent() const;
  std::int64_t grid_words_recv() const;
  std::int64_t grid_flops() const;

  /// CSV: proc,phase,flops,words_sent,words_recv,messages
  void write_csv(std::ostream& out) const;

 private:
  index_t nprocs_ = 0;
  std::string phase_ = "default";
  // phase -> per-rank counters, in first-use order
  std::vector<std::pair<std::string, std::vector<PhaseCounters>>> table_;
  std::vector<CollectiveEvent> events_;
  std::vector<PhaseCounters>& row(const std::string& phase);
};

/// Block-distributed tensor: processor (p_0..p_{d-1}) owns the box
/// [offsets[k][p_k], offsets[k][p_k + 1]) in every mode. distribute() demands
/// exact divisibility; intermediate results of the parallel kernels may carry
/// near-even blocks (sizes differing by one, possibly zero).
struct DistTensor {
  std::vector<index_t> global_dims;
  GridContext grid;
  std::vector<std::vector<index_t>> offsets;  // per mode, length q_k + 1
  std::vector<DenseTensor> blocks;            // per rank

  std::vector<index_t> local_dims(index_t rank) const;
};

/// Requires grid.shape[k] | x.dim(k) for every mode.
DistTensor distribute(const DenseTensor& x, const GridContext& grid);
DenseTensor gather(const DistTensor& t);

/// Near-even split of n into g parts (first n%g parts get the extra element).
std::vector<index_t> near_even_offsets(index_t n, index_t g);

// ---- collectives ----------------------------------------------------------
// Explicit-payload collectives over a sorted member group. Summation runs in
// ascending member order, so results are bitwise reproducible. members[i]
// contributed contributions[i] and is charged accordingly.

/// Elementwise sum, then split into g equal contiguous chunks by member
/// position. The common payload length must be divisible by the group size.
std::vector<std::vector<double>> reduce_scatter(const std::vector<index_t>& members,
                                                const std::vector<std::vector<double>>& contributions,
                                                CommStats* stats);

/// reduce_scatter with explicit chunk lengths (may be uneven or zero).
std::vector<std::vector<double>> reduce_scatter_v(const std::vector<index_t>& members,
                                                  const std::vector<std::vector<double>>& contributions,
                                                  const std::vector<index_t>& counts, CommStats* stats);

/// Concatenation of all blocks in member order, returned once (every member
/// conceptually receives a copy).
std::vector<double> all_gather(const std::vector<index_t>& members,
                               const std::vector<std::vector<double>>& blocks, CommStats* stats);

/// Elementwise sum delivered to every member.
std::vector<double> all_reduce(const std::vector<index_t>& members,
                               const std::vector<std::vector<double>>& contributions, CommStats* stats);

// ---- parallel kernels ------------------------------------------------------

/// Distributed TTM: each processor multiplies its block with the slice of `a`
/// matching its contraction range, then the mode fiber reduce-scatters the
/// partial results, splitting the new mode dimension near-evenly by group
/// rank (contiguous index blocks, ascending). Divisibility of the output mode
/// by the fiber size is not required; trailing members may own empty blocks.
DistTensor parallel_ttm(const DistTensor& t, const Matrix& a, int mode, bool transpose_a,
                        CommStats* stats);

/// Result of a deferred-sum multi-TTM: within the slice of fixed coordinate
/// along `scatter_mode`, the summed block is stored as near-even flat chunks
/// in ascending member-rank order.
struct ScatteredTensor {
  std::vector<index_t> global_dims;
  int scatter_mode = 0;
  GridContext grid;
  std::vector<index_t> mode_offsets;        // scatter-mode offsets, length q+1
  std::vector<std::vector<double>> chunks;  // per rank

  DenseTensor gathered() const;
  std::vector<index_t> chunk_sizes_for_slice(index_t mode_coord) const;
};

/// In-sequence multi-TTM: applies each matrix (ascending mode order, skipping
/// `skip`) with parallel_ttm, reducing over the mode fiber after every
/// product. Keeps partial tensors small at the price of one reduce-scatter
/// per mode over large payloads.
DistTensor is_mttm(const DistTensor& t, std::optional<int> skip,
                   const std::vector<ModeApplication>& apps, CommStats* stats);

/// All-at-once multi-TTM: every processor runs all its local products without
/// communication, accumulating a full-size local contribution, then a single
/// reduce-scatter over the skip-mode slice sums everything. One collective,
/// but the payload carries the product of all sketched mode sizes.
ScatteredTensor aao_mttm(const DistTensor& t, int skip, const std::vector<ModeApplication>& apps,
                         CommStats* stats);

/// All d per-mode sketches at once: recursive halving over the mode set with
/// local partial reuse, deferring all summation to one reduce-scatter per
/// leaf over the withheld mode's slice. Projections tall, applied transposed.
std::vector<ScatteredTensor> all_modes_multi_ttm(const DistTensor& x, const std::vector<Matrix>& phis,
                                                 CommStats* stats);

struct ParallelOptions {
  bool use_aao = true;                        // sketch with aao_mttm vs is_mttm
  index_t small_core_threshold = 1'000'000;   // gather + redundant serial recompress below this
};

/// Distributed counterparts of rsthosvd_kron / rhosvd_kron_reuse. Random
/// matrices are drawn redundantly from the same seed/stream scheme as the
/// serial algorithms, so a parallel run reproduces the serial factorization
/// up to roundoff.
TuckerDecomposition parallel_rsthosvd_kron(const DistTensor& x, const std::vector<index_t>& rank,
                                           const TuckerOptions& opt, const ParallelOptions& popt,
                                           CommStats* stats);
TuckerDecomposition parallel_rhosvd_kron_reuse(const DistTensor& x, const std::vector<index_t>& rank,
                                               const TuckerOptions& opt, const ParallelOptions& popt,
                                               CommStats* stats);

// ---- cost model -------------------------------------------------------------

/// Leading-order per-processor costs on a cubic tensor (size n^d, rank r^d,
/// P = q^d processors), split into the factor-forming and core-forming
/// stages. Values are model evaluations, not measurements.
struct CostModelRow {
  std::string algorithm;
  double factor_flops = 0, factor_words = 0, factor_messages = 0;
  double core_flops = 0, core_words = 0, core_messages = 0;
  bool reference_only = false;
};

/// alg is one of: sthosvd, gram-redistrib (reference only), rsthosvd-kron,
/// rhkron-re.
CostModelRow cost_model(const std::string& alg, index_t n, index_t r, int d, index_t q);

/// Exact shape-derived counters for the two multi-TTM strategies on a cubic
/// tensor with every sketch width s, skipping one mode. Requires q | n; flop
/// exactness additionally assumes q | s (offsets stay even).
struct MttmPrediction {
  std::int64_t flops_per_proc = 0;
  std::int64_t first_payload = 0;   // per-member elements in the first reduce-scatter
  std::int64_t total_payload = 0;   // summed over the collectives a member joins
  std::int64_t collectives = 0;
};
MttmPrediction predict_is_mttm(index_t n, index_t s, int d, index_t q);
MttmPrediction predict_aao_mttm(index_t n, index_t s, int d, index_t q);

}  // namespace ktt::grid

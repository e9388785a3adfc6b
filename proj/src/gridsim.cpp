#include "ktt/gridsim.hpp"

#include "ktt/linalg.hpp"
#include "ktt/rng.hpp"
#include "ktt/sketch.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace ktt::grid {

namespace {

std::int64_t log2_rounds(index_t g) {
  std::int64_t rounds = 0;
  for (index_t reach = 1; reach < g; reach *= 2) ++rounds;
  return rounds;
}

std::vector<index_t> all_ranks_of(index_t nprocs) {
  std::vector<index_t> r(static_cast<std::size_t>(nprocs));
  std::iota(r.begin(), r.end(), 0);
  return r;
}

std::vector<double> flat(const DenseTensor& t) { return t.storage(); }

std::vector<double> flat(const Matrix& m) {
  return {m.data(), m.data() + m.size()};  // column-major, matching Eigen storage
}

/// Copy of the box [start, start+out_dims) of src, walked as mode-0 runs.
DenseTensor extract_box(const DenseTensor& src, const std::vector<index_t>& start,
                        const std::vector<index_t>& len) {
  DenseTensor out(len);
  if (out.size() == 0) return out;
  const int d = src.order();
  std::vector<index_t> stride(static_cast<std::size_t>(d));
  index_t s = 1;
  for (int k = 0; k < d; ++k) {
    stride[static_cast<std::size_t>(k)] = s;
    s *= src.dim(k);
  }
  std::vector<index_t> idx(static_cast<std::size_t>(d), 0);
  const index_t run = len[0];
  index_t written = 0;
  while (true) {
    index_t off = start[0];
    for (int k = 1; k < d; ++k)
      off += (start[static_cast<std::size_t>(k)] + idx[static_cast<std::size_t>(k)]) *
             stride[static_cast<std::size_t>(k)];
    std::memcpy(out.data() + written, src.data() + off, sizeof(double) * static_cast<std::size_t>(run));
    written += run;
    int k = 1;
    while (k < d && ++idx[static_cast<std::size_t>(k)] == len[static_cast<std::size_t>(k)]) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == d) break;
  }
  return out;
}

void insert_box(DenseTensor& dst, const DenseTensor& src, const std::vector<index_t>& start) {
  if (src.size() == 0) return;
  const int d = dst.order();
  std::vector<index_t> stride(static_cast<std::size_t>(d));
  index_t s = 1;
  for (int k = 0; k < d; ++k) {
    stride[static_cast<std::size_t>(k)] = s;
    s *= dst.dim(k);
  }
  std::vector<index_t> idx(static_cast<std::size_t>(d), 0);
  const index_t run = src.dim(0);
  index_t read = 0;
  while (true) {
    index_t off = start[0];
    for (int k = 1; k < d; ++k)
      off += (start[static_cast<std::size_t>(k)] + idx[static_cast<std::size_t>(k)]) *
             stride[static_cast<std::size_t>(k)];
    std::memcpy(dst.data() + off, src.data() + read, sizeof(double) * static_cast<std::size_t>(run));
    read += run;
    int k = 1;
    while (k < d && ++idx[static_cast<std::size_t>(k)] == src.dim(k)) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == d) break;
  }
}

void check_members(const std::vector<index_t>& members, std::size_t contributions) {
  if (members.empty()) throw std::invalid_argument("collective needs at least one member");
  for (std::size_t i = 1; i < members.size(); ++i)
    if (members[i] <= members[i - 1])
      throw std::invalid_argument("collective members must be strictly ascending");
  if (members.size() != contributions)
    throw std::invalid_argument("collective needs exactly one contribution per member");
}

std::size_t common_payload(const std::vector<std::vector<double>>& contributions) {
  const std::size_t e = contributions.front().size();
  for (const auto& c : contributions)
    if (c.size() != e) throw std::invalid_argument("collective contributions must be equal-sized");
  return e;
}

/// Elementwise sum in ascending member order, so every run adds in the same
/// sequence and the result is bitwise reproducible.
std::vector<double> ascending_sum(const std::vector<std::vector<double>>& contributions) {
  std::vector<double> acc = contributions.front();
  for (std::size_t i = 1; i < contributions.size(); ++i) {
    const std::vector<double>& c = contributions[i];
    for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += c[e];
  }
  return acc;
}

}  // namespace

// ---- grid geometry ----------------------------------------------------------

index_t GridContext::nprocs() const {
  if (shape.empty()) throw std::invalid_argument("grid shape is empty");
  index_t p = 1;
  for (index_t q : shape) {
    if (q < 1) throw std::invalid_argument("grid dimensions must be positive");
    p *= q;
  }
  return p;
}

index_t GridContext::rank_of(const std::vector<index_t>& coords) const {
  if (coords.size() != shape.size()) throw std::invalid_argument("coordinate arity mismatch");
  index_t rank = 0, stride = 1;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    if (coords[k] < 0 || coords[k] >= shape[k]) throw std::out_of_range("grid coordinate out of range");
    rank += coords[k] * stride;
    stride *= shape[k];
  }
  return rank;
}

std::vector<index_t> GridContext::coords_of(index_t rank) const {
  if (rank < 0 || rank >= nprocs()) throw std::out_of_range("grid rank out of range");
  std::vector<index_t> coords(shape.size());
  for (std::size_t k = 0; k < shape.size(); ++k) {
    coords[k] = rank % shape[k];
    rank /= shape[k];
  }
  return coords;
}

std::vector<index_t> GridContext::fiber_ranks(const std::vector<index_t>& coords, int mode) const {
  if (mode < 0 || mode >= order()) throw std::invalid_argument("fiber mode out of range");
  std::vector<index_t> c = coords;
  std::vector<index_t> out;
  out.reserve(static_cast<std::size_t>(shape[static_cast<std::size_t>(mode)]));
  for (index_t i = 0; i < shape[static_cast<std::size_t>(mode)]; ++i) {
    c[static_cast<std::size_t>(mode)] = i;
    out.push_back(rank_of(c));
  }
  return out;
}

std::vector<index_t> GridContext::slice_ranks(index_t mode_coord, int mode) const {
  if (mode < 0 || mode >= order()) throw std::invalid_argument("slice mode out of range");
  if (mode_coord < 0 || mode_coord >= shape[static_cast<std::size_t>(mode)])
    throw std::out_of_range("slice coordinate out of range");
  std::vector<index_t> out;
  const index_t p = nprocs();
  for (index_t r = 0; r < p; ++r)
    if (coords_of(r)[static_cast<std::size_t>(mode)] == mode_coord) out.push_back(r);
  return out;
}

// ---- counters ---------------------------------------------------------------

std::vector<PhaseCounters>& CommStats::row(const std::string& phase) {
  for (auto& entry : table_)
    if (entry.first == phase) return entry.second;
  table_.emplace_back(phase, std::vector<PhaseCounters>(static_cast<std::size_t>(nprocs_)));
  return table_.back().second;
}

void CommStats::charge_flops(index_t rank, std::int64_t flops) {
  if (rank < 0 || rank >= nprocs_) throw std::out_of_range("counter rank out of range");
  row(phase_)[static_cast<std::size_t>(rank)].flops += flops;
}

void CommStats::charge_comm(index_t rank, std::int64_t sent, std::int64_t recv, std::int64_t messages) {
  if (rank < 0 || rank >= nprocs_) throw std::out_of_range("counter rank out of range");
  PhaseCounters& c = row(phase_)[static_cast<std::size_t>(rank)];
  c.words_sent += sent;
  c.words_recv += recv;
  c.messages += messages;
}

PhaseCounters CommStats::totals(index_t rank) const {
  if (rank < 0 || rank >= nprocs_) throw std::out_of_range("counter rank out of range");
  PhaseCounters out;
  for (const auto& entry : table_) {
    const PhaseCounters& c = entry.second[static_cast<std::size_t>(rank)];
    out.flops += c.flops;
    out.words_sent += c.words_sent;
    out.words_recv += c.words_recv;
    out.messages += c.messages;
  }
  return out;
}

PhaseCounters CommStats::phase_totals(const std::string& phase, index_t rank) const {
  if (rank < 0 || rank >= nprocs_) throw std::out_of_range("counter rank out of range");
  for (const auto& entry : table_)
    if (entry.first == phase) return entry.second[static_cast<std::size_t>(rank)];
  return {};
}

std::vector<std::string> CommStats::phases() const {
  std::vector<std::string> out;
  out.reserve(table_.size());
  for (const auto& entry : table_) out.push_back(entry.first);
  return out;
}

std::int64_t CommStats::grid_words_sent() const {
  std::int64_t total = 0;
  for (const auto& entry : table_)
    for (const PhaseCounters& c : entry.second) total += c.words_sent;
  return total;
}

std::int64_t CommStats::grid_words_recv() const {
  std::int64_t total = 0;
  for (const auto& entry : table_)
    for (const PhaseCounters& c : entry.second) total += c.words_recv;
  return total;
}

std::int64_t CommStats::grid_flops() const {
  std::int64_t total = 0;
  for (const auto& entry : table_)
    for (const PhaseCounters& c : entry.second) total += c.flops;
  return total;
}

void CommStats::write_csv(std::ostream& out) const {
  out << "proc,phase,flops,words_sent,words_recv,messages\n";
  for (index_t r = 0; r < nprocs_; ++r)
    for (const auto& entry : table_) {
      const PhaseCounters& c = entry.second[static_cast<std::size_t>(r)];
      out << r << ',' << entry.first << ',' << c.flops << ',' << c.words_sent << ','
          << c.words_recv << ',' << c.messages << '\n';
    }
}

// ---- distribution -----------------------------------------------------------

std::vector<index_t> near_even_offsets(index_t n, index_t g) {
  if (n < 0 || g < 1) throw std::invalid_argument("near_even_offsets needs n >= 0, g >= 1");
  std::vector<index_t> off(static_cast<std::size_t>(g) + 1, 0);
  const index_t base = n / g, extra = n % g;
  for (index_t i = 0; i < g; ++i)
    off[static_cast<std::size_t>(i) + 1] = off[static_cast<std::size_t>(i)] + base + (i < extra ? 1 : 0);
  return off;
}

std::vector<index_t> DistTensor::local_dims(index_t rank) const {
  const std::vector<index_t> coords = grid.coords_of(rank);
  std::vector<index_t> ld(global_dims.size());
  for (std::size_t k = 0; k < global_dims.size(); ++k)
    ld[k] = offsets[k][static_cast<std::size_t>(coords[k]) + 1] -
            offsets[k][static_cast<std::size_t>(coords[k])];
  return ld;
}

namespace {

void check_dist(const DistTensor& t) {
  if (t.grid.order() != static_cast<int>(t.global_dims.size()))
    throw std::invalid_argument("grid order does not match tensor order");
  if (t.offsets.size() != t.global_dims.size())
    throw std::invalid_argument("distributed tensor is missing mode offsets");
  if (static_cast<index_t>(t.blocks.size()) != t.grid.nprocs())
    throw std::invalid_argument("distributed tensor needs one block per processor");
}

std::vector<index_t> block_start(const DistTensor& t, const std::vector<index_t>& coords) {
  std::vector<index_t> start(t.global_dims.size());
  for (std::size_t k = 0; k < start.size(); ++k)
    start[k] = t.offsets[k][static_cast<std::size_t>(coords[k])];
  return start;
}

}  // namespace

DistTensor distribute(const DenseTensor& x, const GridContext& grid) {
  if (grid.order() != x.order())
    throw std::invalid_argument("grid order " + std::to_string(grid.order()) +
                                " does not match tensor order " + std::to_string(x.order()));
  DistTensor t;
  t.global_dims = x.dims();
  t.grid = grid;
  t.offsets.resize(static_cast<std::size_t>(x.order()));
  for (int k = 0; k < x.order(); ++k) {
    const index_t q = grid.shape[static_cast<std::size_t>(k)];
    if (x.dim(k) % q != 0)
      throw std::invalid_argument("mode-" + std::to_string(k) + " size " + std::to_string(x.dim(k)) +
                                  " is not divisible by grid dimension " + std::to_string(q));
    t.offsets[static_cast<std::size_t>(k)] = near_even_offsets(x.dim(k), q);
  }
  const index_t p = grid.nprocs();
  t.blocks.resize(static_cast<std::size_t>(p));
  for (index_t r = 0; r < p; ++r) {
    const std::vector<index_t> coords = grid.coords_of(r);
    t.blocks[static_cast<std::size_t>(r)] = extract_box(x, block_start(t, coords), t.local_dims(r));
  }
  return t;
}

DenseTensor gather(const DistTensor& t) {
  check_dist(t);
  DenseTensor out(t.global_dims);
  const index_t p = t.grid.nprocs();
  for (index_t r = 0; r < p; ++r)
    insert_box(out, t.blocks[static_cast<std::size_t>(r)], block_start(t, t.grid.coords_of(r)));
  return out;
}

// ---- collectives ------------------------------------------------------------

std::vector<std::vector<double>> reduce_scatter_v(const std::vector<index_t>& members,
                                                  const std::vector<std::vector<double>>& contributions,
                                                  const std::vector<index_t>& counts, CommStats* stats) {
  check_members(members, contributions.size());
  const index_t g = static_cast<index_t>(members.size());
  const index_t e = static_cast<index_t>(common_payload(contributions));
  if (static_cast<index_t>(counts.size()) != g)
    throw std::invalid_argument("reduce_scatter_v needs one chunk length per member");
  index_t total = 0;
  for (index_t c : counts) {
    if (c < 0) throw std::invalid_argument("chunk lengths must be nonnegative");
    total += c;
  }
  if (total != e)
    throw std::invalid_argument("chunk lengths sum to " + std::to_string(total) + ", payload is " +
                                std::to_string(e));

  const std::vector<double> summed = ascending_sum(contributions);
  std::vector<std::vector<double>> chunks(static_cast<std::size_t>(g));
  index_t off = 0;
  for (index_t i = 0; i < g; ++i) {
    chunks[static_cast<std::size_t>(i)].assign(summed.begin() + off,
                                               summed.begin() + off + counts[static_cast<std::size_t>(i)]);
    off += counts[static_cast<std::size_t>(i)];
  }

  if (stats) {
    const std::int64_t rounds = log2_rounds(g);
    std::int64_t tot_sent = 0, tot_recv = 0;
    for (index_t i = 0; i < g; ++i) {
      // a member forwards everything outside its own chunk and collects the
      // other g-1 contributions to its chunk
      const std::int64_t sent = e - counts[static_cast<std::size_t>(i)];
      const std::int64_t recv = (g - 1) * counts[static_cast<std::size_t>(i)];
      stats->charge_comm(members[static_cast<std::size_t>(i)], sent, recv, rounds);
      tot_sent += sent;
      tot_recv += recv;
    }
    stats->log_event({stats->phase(), "reduce_scatter", g, e, tot_sent, tot_recv});
  }
  return chunks;
}

std::vector<std::vector<double>> reduce_scatter(const std::vector<index_t>& members,
                                                const std::vector<std::vector<double>>& contributions,
                                                CommStats* stats) {
  check_members(members, contributions.size());
  const index_t g = static_cast<index_t>(members.size());
  const index_t e = static_cast<index_t>(common_payload(contributions));
  if (e % g != 0)
    throw std::invalid_argument("reduce_scatter payload " + std::to_string(e) +
                                " is not divisible by group size " + std::to_string(g) +
                                "; use reduce_scatter_v");
  return reduce_scatter_v(members, contributions, std::vector<index_t>(static_cast<std::size_t>(g), e / g),
                          stats);
}

std::vector<double> all_gather(const std::vector<index_t>& members,
                               const std::vector<std::vector<double>>& blocks, CommStats* stats) {
  check_members(members, blocks.size());
  const index_t g = static_cast<index_t>(members.size());
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.size();
  std::vector<double> out;
  out.reserve(total);
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());

  if (stats) {
    const std::int64_t rounds = log2_rounds(g);
    std::int64_t tot_sent = 0, tot_recv = 0;
    std::int64_t payload = 0;  // per-member contribution; the largest when uneven
    for (index_t i = 0; i < g; ++i) {
      const std::int64_t own = static_cast<std::int64_t>(blocks[static_cast<std::size_t>(i)].size());
      const std::int64_t sent = (g - 1) * own;
      const std::int64_t recv = static_cast<std::int64_t>(total) - own;
      stats->charge_comm(members[static_cast<std::size_t>(i)], sent, recv, rounds);
      tot_sent += sent;
      tot_recv += recv;
      payload = std::max(payload, own);
    }
    stats->log_event({stats->phase(), "all_gather", g, payload, tot_sent, tot_recv});
  }
  return out;
}

std::vector<double> all_reduce(const std::vector<index_t>& members,
                               const std::vector<std::vector<double>>& contributions, CommStats* stats) {
  check_members(members, contributions.size());
  const index_t g = static_cast<index_t>(members.size());
  const index_t e = static_cast<index_t>(common_payload(contributions));
  std::vector<double> summed = ascending_sum(contributions);

  if (stats) {
    // reduce-scatter over near-even chunks followed by an all-gather of them
    const std::vector<index_t> off = near_even_offsets(e, g);
    const std::int64_t rounds = 2 * log2_rounds(g);
    std::int64_t tot_sent = 0, tot_recv = 0;
    for (index_t i = 0; i < g; ++i) {
      const index_t c = off[static_cast<std::size_t>(i) + 1] - off[static_cast<std::size_t>(i)];
      const std::int64_t moved = (e - c) + (g - 1) * c;
      stats->charge_comm(members[static_cast<std::size_t>(i)], moved, moved, rounds);
      tot_sent += moved;
      tot_recv += moved;
    }
    stats->log_event({stats->phase(), "all_reduce", g, e, tot_sent, tot_recv});
  }
  return summed;
}

// ---- parallel TTM kernels ---------------------------------------------------

DistTensor parallel_ttm(const DistTensor& t, const Matrix& a, int mode, bool transpose_a,
                        CommStats* stats) {
  check_dist(t);
  const int d = t.grid.order();
  if (mode < 0 || mode >= d) throw std::invalid_argument("parallel_ttm mode out of range");
  const index_t n_mode = t.global_dims[static_cast<std::size_t>(mode)];
  const index_t contract = transpose_a ? a.rows() : a.cols();
  if (contract != n_mode)
    throw std::invalid_argument("matrix contracts " + std::to_string(contract) +
                                " indices, mode size is " + std::to_string(n_mode));
  const index_t m = transpose_a ? a.cols() : a.rows();
  const index_t q = t.grid.shape[static_cast<std::size_t>(mode)];
  const index_t p = t.grid.nprocs();

  DistTensor out;
  out.global_dims = t.global_dims;
  out.global_dims[static_cast<std::size_t>(mode)] = m;
  out.grid = t.grid;
  out.offsets = t.offsets;
  out.offsets[static_cast<std::size_t>(mode)] = near_even_offsets(m, q);
  out.blocks.resize(static_cast<std::size_t>(p));

  // local products against the owned contraction range
  std::vector<DenseTensor> partial(static_cast<std::size_t>(p));
  for (index_t r = 0; r < p; ++r) {
    const std::vector<index_t> coords = t.grid.coords_of(r);
    const index_t lo = t.offsets[static_cast<std::size_t>(mode)][static_cast<std::size_t>(coords[static_cast<std::size_t>(mode)])];
    const index_t len = t.offsets[static_cast<std::size_t>(mode)][static_cast<std::size_t>(coords[static_cast<std::size_t>(mode)]) + 1] - lo;
    const Matrix slice = transpose_a ? Matrix(a.middleRows(lo, len)) : Matrix(a.middleCols(lo, len));
    partial[static_cast<std::size_t>(r)] = ttm(t.blocks[static_cast<std::size_t>(r)], slice, mode, transpose_a);
    if (stats) {
      const index_t other = m == 0 ? 0 : partial[static_cast<std::size_t>(r)].size() / m;
      stats->charge_flops(r, 2 * other * m * len);
    }
  }

  // one reduce-scatter per mode fiber; chunk b of the summed partial is the
  // near-even output block [out_off[b], out_off[b+1]) of the new mode
  const std::vector<index_t>& out_off = out.offsets[static_cast<std::size_t>(mode)];
  for (index_t r = 0; r < p; ++r) {
    const std::vector<index_t> coords = t.grid.coords_of(r);
    if (coords[static_cast<std::size_t>(mode)] != 0) continue;
    const std::vector<index_t> members = t.grid.fiber_ranks(coords, mode);
    const index_t other = m == 0 ? 0 : partial[static_cast<std::size_t>(members[0])].size() / m;

    std::vector<index_t> counts(static_cast<std::size_t>(q));
    for (index_t b = 0; b < q; ++b)
      counts[static_cast<std::size_t>(b)] =
          (out_off[static_cast<std::size_t>(b) + 1] - out_off[static_cast<std::size_t>(b)]) * other;

    std::vector<std::vector<double>> contributions(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
      std::vector<double> packed;
      packed.reserve(static_cast<std::size_t>(partial[static_cast<std::size_t>(members[i])].size()));
      for (index_t b = 0; b < q; ++b) {
        const DenseTensor piece =
            mode_range_slice(partial[static_cast<std::size_t>(members[i])], mode,
                             out_off[static_cast<std::size_t>(b)],
                             out_off[static_cast<std::size_t>(b) + 1] - out_off[static_cast<std::size_t>(b)]);
        packed.insert(packed.end(), piece.storage().begin(), piece.storage().end());
      }
      contributions[i] = std::move(packed);
    }

    std::vector<std::vector<double>> chunks = reduce_scatter_v(members, contributions, counts, stats);
    for (std::size_t i = 0; i < members.size(); ++i)
      out.blocks[static_cast<std::size_t>(members[i])] =
          DenseTensor(out.local_dims(members[i]), std::move(chunks[i]));
  }
  return out;
}

// ---- scattered results ------------------------------------------------------

std::vector<index_t> ScatteredTensor::chunk_sizes_for_slice(index_t mode_coord) const {
  if (mode_coord < 0 || static_cast<std::size_t>(mode_coord) + 1 >= mode_offsets.size())
    throw std::out_of_range("slice coordinate out of range");
  index_t other = 1;
  for (std::size_t k = 0; k < global_dims.size(); ++k)
    if (static_cast<int>(k) != scatter_mode) other *= global_dims[k];
  const index_t e = other * (mode_offsets[static_cast<std::size_t>(mode_coord) + 1] -
                             mode_offsets[static_cast<std::size_t>(mode_coord)]);
  const index_t g = grid.nprocs() / grid.shape[static_cast<std::size_t>(scatter_mode)];
  const std::vector<index_t> off = near_even_offsets(e, g);
  std::vector<index_t> sizes(static_cast<std::size_t>(g));
  for (index_t i = 0; i < g; ++i)
    sizes[static_cast<std::size_t>(i)] = off[static_cast<std::size_t>(i) + 1] - off[static_cast<std::size_t>(i)];
  return sizes;
}

DenseTensor ScatteredTensor::gathered() const {
  DenseTensor out(global_dims);
  const index_t q = grid.shape[static_cast<std::size_t>(scatter_mode)];
  for (index_t c = 0; c < q; ++c) {
    const std::vector<index_t> members = grid.slice_ranks(c, scatter_mode);
    std::vector<double> stitched;
    for (index_t r : members) {
      const std::vector<double>& piece = chunks[static_cast<std::size_t>(r)];
      stitched.insert(stitched.end(), piece.begin(), piece.end());
    }
    std::vector<index_t> bdims = global_dims;
    bdims[static_cast<std::size_t>(scatter_mode)] =
        mode_offsets[static_cast<std::size_t>(c) + 1] - mode_offsets[static_cast<std::size_t>(c)];
    const DenseTensor block(bdims, std::move(stitched));
    std::vector<index_t> start(global_dims.size(), 0);
    start[static_cast<std::size_t>(scatter_mode)] = mode_offsets[static_cast<std::size_t>(c)];
    insert_box(out, block, start);
  }
  return out;
}

// ---- multi-TTM strategies ---------------------------------------------------

namespace {

std::vector<ModeApplication> sorted_by_mode(std::vector<ModeApplication> apps, int order,
                                            std::optional<int> skip) {
  std::sort(apps.begin(), apps.end(),
            [](const ModeApplication& a, const ModeApplication& b) { return a.mode < b.mode; });
  for (std::size_t i = 0; i < apps.size(); ++i) {
    if (apps[i].matrix == nullptr) throw std::invalid_argument("multi-TTM application without a matrix");
    if (apps[i].mode < 0 || apps[i].mode >= order)
      throw std::invalid_argument("multi-TTM mode out of range");
    if (i > 0 && apps[i].mode == apps[i - 1].mode)
      throw std::invalid_argument("multi-TTM modes must be distinct");
    if (skip && apps[i].mode == *skip)
      throw std::invalid_argument("multi-TTM application targets the withheld mode");
  }
  return apps;
}

}  // namespace

DistTensor is_mttm(const DistTensor& t, std::optional<int> skip,
                   const std::vector<ModeApplication>& apps, CommStats* stats) {
  check_dist(t);
  const std::vector<ModeApplication> ordered = sorted_by_mode(apps, t.grid.order(), skip);
  DistTensor cur = t;
  for (const ModeApplication& app : ordered)
    cur = parallel_ttm(cur, *app.matrix, app.mode, app.transpose, stats);
  return cur;
}

ScatteredTensor aao_mttm(const DistTensor& t, int skip, const std::vector<ModeApplication>& apps,
                         CommStats* stats) {
  check_dist(t);
  const int d = t.grid.order();
  if (skip < 0 || skip >= d) throw std::invalid_argument("aao_mttm skip mode out of range");
  const std::vector<ModeApplication> ordered = sorted_by_mode(apps, d, skip);
  // the slice sum needs every non-withheld mode contracted, otherwise the
  // members' partials cover different boxes
  if (static_cast<int>(ordered.size()) != d - 1)
    throw std::invalid_argument("aao_mttm needs a matrix for every mode except the withheld one");

  const index_t p = t.grid.nprocs();
  std::vector<DenseTensor> local(static_cast<std::size_t>(p));
  for (index_t r = 0; r < p; ++r) {
    const std::vector<index_t> coords = t.grid.coords_of(r);
    DenseTensor cur = t.blocks[static_cast<std::size_t>(r)];
    for (const ModeApplication& app : ordered) {
      const int k = app.mode;
      const index_t lo = t.offsets[static_cast<std::size_t>(k)][static_cast<std::size_t>(coords[static_cast<std::size_t>(k)])];
      const index_t len = t.offsets[static_cast<std::size_t>(k)][static_cast<std::size_t>(coords[static_cast<std::size_t>(k)]) + 1] - lo;
      const Matrix slice =
          app.transpose ? Matrix(app.matrix->middleRows(lo, len)) : Matrix(app.matrix->middleCols(lo, len));
      const index_t width = app.transpose ? slice.cols() : slice.rows();
      const index_t other = cur.size_other(k);
      cur = ttm(cur, slice, k, app.transpose);
      if (stats) stats->charge_flops(r, 2 * other * width * len);
    }
    local[static_cast<std::size_t>(r)] = std::move(cur);
  }

  ScatteredTensor st;
  st.global_dims = t.global_dims;
  for (const ModeApplication& app : ordered)
    st.global_dims[static_cast<std::size_t>(app.mode)] =
        app.transpose ? app.matrix->cols() : app.matrix->rows();
  st.scatter_mode = skip;
  st.grid = t.grid;
  st.mode_offsets = t.offsets[static_cast<std::size_t>(skip)];
  st.chunks.resize(static_cast<std::size_t>(p));

  const index_t q = t.grid.shape[static_cast<std::size_t>(skip)];
  for (index_t c = 0; c < q; ++c) {
    const std::vector<index_t> members = t.grid.slice_ranks(c, skip);
    std::vector<std::vector<double>> contributions(members.size());
    for (std::size_t i = 0; i < members.size(); ++i)
      contributions[i] = flat(local[static_cast<std::size_t>(members[i])]);
    std::vector<std::vector<double>> chunks =
        reduce_scatter_v(members, contributions, st.chunk_sizes_for_slice(c), stats);
    for (std::size_t i = 0; i < members.size(); ++i)
      st.chunks[static_cast<std::size_t>(members[i])] = std::move(chunks[i]);
  }
  return st;
}

namespace {

/// Recursive-halving sketch evaluation over distributed blocks. Summation is
/// deferred: every node holds per-rank unsummed partials, and each leaf runs
/// one reduce-scatter over the withheld mode's slice.
struct TreeSketcher {
  const DistTensor& x;
  const std::vector<Matrix>& phis;
  CommStats* stats;
  index_t p;
  std::vector<std::vector<index_t>> coords;  // per rank
  std::vector<ScatteredTensor> results;

  TreeSketcher(const DistTensor& x_, const std::vector<Matrix>& phis_, CommStats* stats_)
      : x(x_), phis(phis_), stats(stats_), p(x_.grid.nprocs()) {
    coords.reserve(static_cast<std::size_t>(p));
    for (index_t r = 0; r < p; ++r) coords.push_back(x.grid.coords_of(r));
    results.resize(static_cast<std::size_t>(x.grid.order()));
  }

  std::vector<DenseTensor> apply_local(const std::vector<DenseTensor>& parts,
                                       const std::vector<int>& modes) {
    std::vector<DenseTensor> next(static_cast<std::size_t>(p));
    for (index_t r = 0; r < p; ++r) {
      std::vector<Matrix> slices;
      slices.reserve(modes.size());
      for (int k : modes) {
        const index_t lo = x.offsets[static_cast<std::size_t>(k)][static_cast<std::size_t>(coords[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)])];
        const index_t len = x.offsets[static_cast<std::size_t>(k)][static_cast<std::size_t>(coords[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]) + 1] - lo;
        slices.push_back(phis[static_cast<std::size_t>(k)].middleRows(lo, len));
      }
      std::vector<ModeApplication> apps;
      apps.reserve(modes.size());
      for (std::size_t i = 0; i < modes.size(); ++i) apps.push_back({modes[i], &slices[i], true});
      FlopCounter counter;
      next[static_cast<std::size_t>(r)] =
          multi_ttm(parts[static_cast<std::size_t>(r)], apps, ModeOrder::DescendingSize, &counter);
      if (stats) stats->charge_flops(r, counter.total());
    }
    return next;
  }

  void leaf(int j, const std::vector<DenseTensor>& parts) {
    ScatteredTensor st;
    st.global_dims = x.global_dims;
    for (int k = 0; k < x.grid.order(); ++k)
      if (k != j) st.global_dims[static_cast<std::size_t>(k)] = phis[static_cast<std::size_t>(k)].cols();
    st.scatter_mode = j;
    st.grid = x.grid;
    st.mode_offsets = x.offsets[static_cast<std::size_t>(j)];
    st.chunks.resize(static_cast<std::size_t>(p));
    const index_t q = x.grid.shape[static_cast<std::size_t>(j)];
    for (index_t c = 0; c < q; ++c) {
      const std::vector<index_t> members = x.grid.slice_ranks(c, j);
      std::vector<std::vector<double>> contributions(members.size());
      for (std::size_t i = 0; i < members.size(); ++i)
        contributions[i] = flat(parts[static_cast<std::size_t>(members[i])]);
      std::vector<std::vector<double>> chunks =
          reduce_scatter_v(members, contributions, st.chunk_sizes_for_slice(c), stats);
      for (std::size_t i = 0; i < members.size(); ++i)
        st.chunks[static_cast<std::size_t>(members[i])] = std::move(chunks[i]);
    }
    results[static_cast<std::size_t>(j)] = std::move(st);
  }

  void walk(const std::vector<int>& withheld, const std::vector<DenseTensor>& parts) {
    if (withheld.size() == 1) {
      leaf(withheld.front(), parts);
      return;
    }
    const std::size_t half = (withheld.size() + 1) / 2;  // extra mode goes left
    const std::vector<int> left(withheld.begin(), withheld.begin() + static_cast<std::ptrdiff_t>(half));
    const std::vector<int> right(withheld.begin() + static_cast<std::ptrdiff_t>(half), withheld.end());
    {
      const std::vector<DenseTensor> lparts = apply_local(parts, right);
      walk(left, lparts);
    }
    const std::vector<DenseTensor> rparts = apply_local(parts, left);
    walk(right, rparts);
  }
};

}  // namespace

std::vector<ScatteredTensor> all_modes_multi_ttm(const DistTensor& x, const std::vector<Matrix>& phis,
                                                 CommStats* stats) {
  check_dist(x);
  const int d = x.grid.order();
  if (d < 2) throw std::invalid_argument("multi-mode sketching needs order >= 2");
  if (static_cast<int>(phis.size()) != d)
    throw std::invalid_argument("need one projection matrix per mode");
  for (int k = 0; k < d; ++k) {
    if (phis[static_cast<std::size_t>(k)].rows() != x.global_dims[static_cast<std::size_t>(k)])
      throw std::invalid_argument("projection " + std::to_string(k) + " has " +
                                  std::to_string(phis[static_cast<std::size_t>(k)].rows()) +
                                  " rows, mode size is " +
                                  std::to_string(x.global_dims[static_cast<std::size_t>(k)]));
    if (phis[static_cast<std::size_t>(k)].cols() < 1)
      throw std::invalid_argument("projection " + std::to_string(k) + " has no columns");
  }
  TreeSketcher sketcher(x, phis, stats);
  std::vector<int> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), 0);
  sketcher.walk(all, x.blocks);
  return std::move(sketcher.results);
}

// ---- distributed Tucker algorithms ------------------------------------------

namespace {

void check_parallel_args(const DistTensor& x, const std::vector<index_t>& rank, index_t oversample) {
  check_dist(x);
  const int d = x.grid.order();
  if (static_cast<int>(rank.size()) != d)
    throw std::invalid_argument("rank arity " + std::to_string(rank.size()) +
                                " does not match tensor order " + std::to_string(d));
  if (oversample < 0) throw std::invalid_argument("oversample must be nonnegative");
  for (int j = 0; j < d; ++j) {
    const index_t n = x.global_dims[static_cast<std::size_t>(j)];
    const index_t r = rank[static_cast<std::size_t>(j)];
    if (r < 1 || r > n)
      throw std::invalid_argument("rank " + dims_to_string(rank) + " infeasible for dims " +
                                  dims_to_string(x.global_dims));
    if (r + oversample > n)
      throw std::invalid_argument("oversampled rank " + std::to_string(r + oversample) +
                                  " exceeds mode-" + std::to_string(j) + " size " + std::to_string(n));
  }
}

std::vector<int> resolve_parallel_order(int d, std::vector<int> order) {
  std::vector<int> natural(static_cast<std::size_t>(d));
  std::iota(natural.begin(), natural.end(), 0);
  if (order.empty()) return natural;
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != natural)
    throw std::invalid_argument("mode_order must be a permutation of 0.." + std::to_string(d - 1));
  return order;
}

Matrix draw_recorded(Distribution requested, index_t rows, index_t cols, RngSpec rng, int mode,
                     int factor, Provenance& prov) {
  DrawResult dr = draw_sketch_matrix(requested, rows, cols, rng);
  prov.plan.draws.push_back({mode, factor, rows, cols, dr.used, dr.fallback});
  if (dr.fallback)
    prov.fallbacks.push_back("mode " + std::to_string(mode) + " factor " + std::to_string(factor) +
                             ": srht needs a power-of-two long dimension, drew gaussian for rows=" +
                             std::to_string(rows));
  return std::move(dr.phi);
}

Provenance parallel_provenance(std::string algorithm, const std::vector<index_t>& rank,
                               const TuckerOptions& opt, std::vector<int> order) {
  Provenance prov;
  prov.algorithm = std::move(algorithm);
  prov.rank = rank;
  prov.oversample = opt.oversample;
  prov.seed = opt.seed;
  prov.requested_distribution = opt.distribution;
  prov.mode_order = std::move(order);
  prov.rank_ell_only = opt.rank_ell_only;
  return prov;
}

std::vector<std::vector<double>> flat_blocks(const DistTensor& t) {
  std::vector<std::vector<double>> out;
  out.reserve(t.blocks.size());
  for (const DenseTensor& b : t.blocks) out.push_back(flat(b));
  return out;
}

/// Full tensor on every processor: the all-gather pays for the replication,
/// the serial reassembly supplies the value.
DenseTensor gather_everywhere(const DistTensor& t, CommStats* stats) {
  all_gather(all_ranks_of(t.grid.nprocs()), flat_blocks(t), stats);
  return gather(t);
}

DenseTensor gather_everywhere(const ScatteredTensor& st, CommStats* stats) {
  all_gather(all_ranks_of(st.grid.nprocs()), st.chunks, stats);
  return st.gathered();
}

/// Same convention as the Gram-method singular vector extraction: largest
/// magnitude entry of each column made positive, first index on ties.
void flip_column_signs(Matrix& u) {
  for (index_t j = 0; j < u.cols(); ++j) {
    index_t arg = 0;
    double best = 0.0;
    for (index_t i = 0; i < u.rows(); ++i) {
      const double a = std::abs(u(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (u(arg, j) < 0.0) u.col(j) = -u.col(j);
  }
}

/// Gram matrix of the mode-j unfolding of a distributed tensor, delivered to
/// every processor. Each mode-j fiber gathers its panel, splits the Gram rows
/// near-evenly among its members, and one all-reduce sums the fiber products
/// while assembling the row slabs.
Matrix distributed_gram(const DistTensor& g, int j, CommStats* stats) {
  const index_t ell = g.global_dims[static_cast<std::size_t>(j)];
  const index_t p = g.grid.nprocs();
  std::vector<Matrix> partial(static_cast<std::size_t>(p), Matrix::Zero(ell, ell));

  for (index_t r = 0; r < p; ++r) {
    const std::vector<index_t> coords = g.grid.coords_of(r);
    if (coords[static_cast<std::size_t>(j)] != 0) continue;
    const std::vector<index_t> members = g.grid.fiber_ranks(coords, j);

    std::vector<std::vector<double>> panels(members.size());
    for (std::size_t i = 0; i < members.size(); ++i)
      panels[i] = flat(g.blocks[static_cast<std::size_t>(members[i])]);
    all_gather(members, panels, stats);

    std::vector<index_t> bdims = g.local_dims(members[0]);
    bdims[static_cast<std::size_t>(j)] = ell;
    DenseTensor box(bdims);
    for (std::size_t i = 0; i < members.size(); ++i) {
      std::vector<index_t> start(bdims.size(), 0);
      start[static_cast<std::size_t>(j)] = g.offsets[static_cast<std::size_t>(j)][i];
      insert_box(box, g.blocks[static_cast<std::size_t>(members[i])], start);
    }
    const Matrix w = unfold(box, j);

    const std::vector<index_t> rows = near_even_offsets(ell, static_cast<index_t>(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i) {
      const index_t lo = rows[i], len = rows[i + 1] - rows[i];
      if (len > 0)
        partial[static_cast<std::size_t>(members[i])].middleRows(lo, len) =
            w.middleRows(lo, len) * w.transpose();
      if (stats) stats->charge_flops(members[i], 2 * len * ell * w.cols());
    }
  }

  std::vector<std::vector<double>> contributions;
  contributions.reserve(static_cast<std::size_t>(p));
  for (index_t r = 0; r < p; ++r) contributions.push_back(flat(partial[static_cast<std::size_t>(r)]));
  const std::vector<double> summed = all_reduce(all_ranks_of(p), contributions, stats);
  return Eigen::Map<const Matrix>(summed.data(), ell, ell);
}

/// Shared tail of the distributed algorithms: hand back the oversampled
/// result, or recompress. Small cores are gathered and recompressed
/// redundantly on every processor (bitwise identical to the serial path);
/// large cores go through per-mode distributed Grams.
TuckerDecomposition finalize_parallel(DistTensor g, std::vector<FactorMatrix> u_hat,
                                      const std::vector<index_t>& rank, const TuckerOptions& opt,
                                      const ParallelOptions& popt, CommStats* stats, Provenance prov) {
  const int d = g.grid.order();
  const index_t p = g.grid.nprocs();
  TuckerDecomposition t;
  t.provenance = std::move(prov);
  if (opt.keep_intermediate) {
    t.sketch_core = gather(g);
    t.sketch_factors = u_hat;
  }
  if (opt.rank_ell_only) {
    t.core = gather_everywhere(g, stats);
    t.factors = std::move(u_hat);
    return t;
  }

  if (stats) stats->set_phase("core");
  index_t core_size = 1;
  for (index_t n : g.global_dims) core_size *= n;

  std::vector<FactorMatrix> rotations;
  if (core_size <= popt.small_core_threshold) {
    const DenseTensor g_hat = gather_everywhere(g, stats);
    FlopCounter counter;
    CoreTruncation trunc = truncate_core(g_hat, rank, &counter);
    if (stats)
      for (index_t r = 0; r < p; ++r) stats->charge_flops(r, counter.total());
    t.core = std::move(trunc.core);
    rotations = std::move(trunc.rotations);
  } else {
    rotations.resize(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const Matrix gram = distributed_gram(g, j, stats);
      Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
      if (eig.info() != Eigen::Success) throw std::runtime_error("gram eigendecomposition failed");
      const index_t k = rank[static_cast<std::size_t>(j)];
      Matrix v(gram.rows(), k);
      for (index_t i = 0; i < k; ++i) v.col(i) = eig.eigenvectors().col(gram.rows() - 1 - i);
      flip_column_signs(v);
      rotations[static_cast<std::size_t>(j)] = {std::move(v), true};
      g = parallel_ttm(g, rotations[static_cast<std::size_t>(j)].mat, j, /*transpose_a=*/true, stats);
    }
    t.core = gather_everywhere(g, stats);
  }

  t.factors.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const Matrix& u = u_hat[static_cast<std::size_t>(j)].mat;
    const Matrix& v = rotations[static_cast<std::size_t>(j)].mat;
    if (stats) {
      const std::int64_t cost = 2 * u.rows() * v.cols() * u.cols();
      for (index_t r = 0; r < p; ++r) stats->charge_flops(r, cost);  // rotated redundantly
    }
    t.factors[static_cast<std::size_t>(j)].mat = u * v;
    t.factors[static_cast<std::size_t>(j)].orthonormal = true;
  }
  return t;
}

}  // namespace

TuckerDecomposition parallel_rsthosvd_kron(const DistTensor& x, const std::vector<index_t>& rank,
                                           const TuckerOptions& opt, const ParallelOptions& popt,
                                           CommStats* stats) {
  check_parallel_args(x, rank, opt.oversample);
  const int d = x.grid.order();
  const std::vector<int> order = resolve_parallel_order(d, opt.mode_order);
  Provenance prov = parallel_provenance("parallel-rsthosvd-kron", rank, opt, order);
  SubrankMatrix plan;
  plan.s.assign(static_cast<std::size_t>(d), std::vector<index_t>(static_cast<std::size_t>(d), 1));
  plan.adjusted_ell.assign(static_cast<std::size_t>(d), 0);

  if (stats) stats->set_phase("factors");
  std::vector<FactorMatrix> u_hat(static_cast<std::size_t>(d));
  DistTensor g = x;
  for (int j : order) {
    const SubrankRow row =
        plan_subrank_row(g.global_dims, j, rank[static_cast<std::size_t>(j)] + opt.oversample);
    plan.s[static_cast<std::size_t>(j)] = row.s;
    plan.adjusted_ell[static_cast<std::size_t>(j)] = row.adjusted_ell;

    // drawn redundantly by every processor; same streams as the serial run
    std::vector<Matrix> phis;
    phis.reserve(static_cast<std::size_t>(d - 1));
    std::vector<ModeApplication> apps;
    for (int k = 0; k < d; ++k) {
      if (k == j) continue;
      phis.push_back(draw_recorded(opt.distribution, g.global_dims[static_cast<std::size_t>(k)],
                                   row.s[static_cast<std::size_t>(k)],
                                   {opt.seed, streams::derive(streams::kKronSketch,
                                                              static_cast<std::uint64_t>(j),
                                                              static_cast<std::uint64_t>(k))},
                                   j, k, prov));
      apps.push_back({k, nullptr, true});
    }
    for (std::size_t i = 0; i < apps.size(); ++i) apps[i].matrix = &phis[i];

    DenseTensor y;
    if (popt.use_aao) {
      y = gather_everywhere(aao_mttm(g, j, apps, stats), stats);
    } else {
      y = gather_everywhere(is_mttm(g, j, apps, stats), stats);
    }
    // QR runs redundantly on every processor; it is not a matrix product, so
    // the flop ledger (products only) takes no charge
    u_hat[static_cast<std::size_t>(j)] = {thin_qr(unfold(y, j)).q, true};
    g = parallel_ttm(g, u_hat[static_cast<std::size_t>(j)].mat, j, /*transpose_a=*/true, stats);
  }
  prov.plan.subrank_matrix = std::move(plan);
  return finalize_parallel(std::move(g), std::move(u_hat), rank, opt, popt, stats, std::move(prov));
}

TuckerDecomposition parallel_rhosvd_kron_reuse(const DistTensor& x, const std::vector<index_t>& rank,
                                               const TuckerOptions& opt, const ParallelOptions& popt,
                                               CommStats* stats) {
  check_parallel_args(x, rank, opt.oversample);
  const int d = x.grid.order();
  Provenance prov = parallel_provenance("parallel-rhkron-re", rank, opt,
                                        resolve_parallel_order(d, {}));
  const SubrankVector svec = plan_subrank_vector(rank, opt.oversample, x.global_dims);
  prov.plan.subrank_vector = svec;
  for (int j = 0; j < d; ++j) {
    index_t width = 1;
    for (int k = 0; k < d; ++k)
      if (k != j) width *= svec.s[static_cast<std::size_t>(k)];
    if (width > x.global_dims[static_cast<std::size_t>(j)])
      throw std::runtime_error("shared sketch width " + std::to_string(width) + " exceeds mode-" +
                               std::to_string(j) + " size; modes too skewed for factor reuse");
  }

  if (stats) stats->set_phase("factors");
  std::vector<Matrix> phis;
  phis.reserve(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k)
    phis.push_back(draw_recorded(opt.distribution, x.global_dims[static_cast<std::size_t>(k)],
                                 svec.s[static_cast<std::size_t>(k)],
                                 {opt.seed, streams::derive(streams::kReuseSketch,
                                                            static_cast<std::uint64_t>(k))},
                                 -1, k, prov));

  std::vector<ScatteredTensor> sketches = all_modes_multi_ttm(x, phis, stats);
  std::vector<FactorMatrix> u_hat(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const DenseTensor y = gather_everywhere(sketches[static_cast<std::size_t>(j)], stats);
    u_hat[static_cast<std::size_t>(j)] = {thin_qr(unfold(y, j)).q, true};
  }

  if (stats) stats->set_phase("core");
  std::vector<ModeApplication> apps;
  apps.reserve(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j)
    apps.push_back({j, &u_hat[static_cast<std::size_t>(j)].mat, true});
  DistTensor g_hat = is_mttm(x, std::nullopt, apps, stats);
  return finalize_parallel(std::move(g_hat), std::move(u_hat), rank, opt, popt, stats, std::move(prov));
}

// ---- closed-form cost model ---------------------------------------------------

CostModelRow cost_model(const std::string& alg, index_t n, index_t r, int d, index_t q) {
  if (d < 2 || n < 1 || r < 1 || q < 1) throw std::invalid_argument("cost model needs d>=2, n,r,q>=1");
  const double nd = static_cast<double>(n), rd = static_cast<double>(r), qd = static_cast<double>(q);
  const double p = std::pow(qd, d);
  const double log_p = std::log2(p);

  CostModelRow row;
  row.algorithm = alg;
  row.core_flops = 2.0 * rd * std::pow(nd, d) / p;
  row.core_words = rd * std::pow(nd / qd, d - 1);
  row.core_messages = log_p;
  if (alg == "sthosvd") {
    row.factor_flops = std::pow(nd, d + 1) / p;
    row.factor_words = std::pow(nd, d) / p;
    row.factor_messages = static_cast<double>(d) * qd;
  } else if (alg == "gram-redistrib") {
    row.factor_flops = std::pow(nd, d + 1) / p;
    row.factor_words = std::pow(nd, d) / p;
    row.factor_messages = static_cast<double>(d) * p;
    row.core_words = 0.0;  // folded into the factor-stage redistribution
    row.core_messages = 0.0;
    row.reference_only = true;
  } else if (alg == "rsthosvd-kron" || alg == "rhkron-re") {
    const double lead = alg == "rhkron-re" ? 4.0 : 2.0;
    row.factor_flops = lead * std::pow(rd, 1.0 / (d - 1)) * std::pow(nd, d) / p;
    row.factor_words = static_cast<double>(d) * rd * nd / qd;
    row.factor_messages = static_cast<double>(d) * log_p;
  } else {
    throw std::invalid_argument("unknown cost model row: " + alg);
  }
  return row;
}

// ---- multi-TTM predictions ----------------------------------------------------

namespace {

void check_prediction_args(index_t n, index_t s, int d, index_t q) {
  if (d < 2 || n < 1 || s < 1 || q < 1)
    throw std::invalid_argument("prediction needs d>=2 and positive n, s, q");
  if (n % q != 0) throw std::invalid_argument("prediction needs q | n");
}

}  // namespace

MttmPrediction predict_is_mttm(index_t n, index_t s, int d, index_t q) {
  check_prediction_args(n, s, d, q);
  // replay of the heaviest processor (every coordinate 0, so each near-even
  // split hands it the ceiling block); exact everywhere when q | s
  std::vector<index_t> local(static_cast<std::size_t>(d), n / q);
  MttmPrediction out;
  out.collectives = d - 1;
  for (int i = 0; i + 1 < d; ++i) {  // apply ascending, skip the last mode
    index_t other = 1;
    for (int k = 0; k < d; ++k)
      if (k != i) other *= local[static_cast<std::size_t>(k)];
    out.flops_per_proc += 2 * other * s * local[static_cast<std::size_t>(i)];
    const index_t payload = other * s;
    if (i == 0) out.first_payload = payload;
    out.total_payload += payload;
    local[static_cast<std::size_t>(i)] = (s + q - 1) / q;
  }
  return out;
}

MttmPrediction predict_aao_mttm(index_t n, index_t s, int d, index_t q) {
  check_prediction_args(n, s, d, q);
  std::vector<index_t> local(static_cast<std::size_t>(d), n / q);
  MttmPrediction out;
  out.collectives = 1;
  for (int i = 0; i + 1 < d; ++i) {
    index_t other = 1;
    for (int k = 0; k < d; ++k)
      if (k != i) other *= local[static_cast<std::size_t>(k)];
    out.flops_per_proc += 2 * other * s * local[static_cast<std::size_t>(i)];
    local[static_cast<std::size_t>(i)] = s;  // kept whole locally
  }
  index_t payload = 1;
  for (index_t sz : local) payload *= sz;
  out.first_payload = payload;
  out.total_payload = payload;
  return out;
}

}  // namespace ktt::grid

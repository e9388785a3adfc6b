#include "ktt/sketch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ktt {

std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::Auto: return "auto";
    case Distribution::Gaussian: return "gaussian";
    case Distribution::Srht: return "srht";
  }
  return "?";
}

std::optional<Distribution> distribution_from_name(const std::string& name) {
  if (name == "auto") return Distribution::Auto;
  if (name == "gaussian") return Distribution::Gaussian;
  if (name == "srht") return Distribution::Srht;
  return std::nullopt;
}

bool is_power_of_two(index_t n) {
  return n > 0 && std::has_single_bit(static_cast<std::uint64_t>(n));
}

Distribution resolve_distribution(Distribution requested, const std::vector<index_t>& dims) {
  if (requested != Distribution::Auto) return requested;
  for (index_t n : dims)
    if (!is_power_of_two(n)) return Distribution::Gaussian;
  return Distribution::Srht;
}

Matrix gen_gaussian(index_t rows, index_t cols, RngSpec spec) {
  Rng rng(spec);
  Matrix m(rows, cols);
  for (index_t j = 0; j < cols; ++j)
    for (index_t i = 0; i < rows; ++i) m(i, j) = rng.gaussian();
  return m;
}

Matrix gen_srht(index_t rows, index_t cols, RngSpec spec) {
  if (!is_power_of_two(rows))
    throw std::invalid_argument("gen_srht: rows=" + std::to_string(rows) +
                                " is not a power of two");
  if (cols < 1 || cols > rows)
    throw std::invalid_argument("gen_srht: cols must lie in [1, rows]");
  Rng rng(spec);
  std::vector<int> sign(static_cast<std::size_t>(rows));
  for (auto& s : sign) s = rng.below(2) == 0 ? 1 : -1;

  // partial Fisher-Yates, then ascending for a canonical column order
  std::vector<index_t> pool(static_cast<std::size_t>(rows));
  std::iota(pool.begin(), pool.end(), index_t{0});
  for (index_t k = 0; k < cols; ++k)
    std::swap(pool[static_cast<std::size_t>(k)],
              pool[static_cast<std::size_t>(k + rng.below(rows - k))]);
  std::vector<index_t> picked(pool.begin(), pool.begin() + cols);
  std::sort(picked.begin(), picked.end());

  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  Matrix m(rows, cols);
  for (index_t j = 0; j < cols; ++j) {
    const std::uint64_t col = static_cast<std::uint64_t>(picked[static_cast<std::size_t>(j)]);
    for (index_t i = 0; i < rows; ++i) {
      const int hsign = (std::popcount(static_cast<std::uint64_t>(i) & col) & 1) ? -1 : 1;
      m(i, j) = sign[static_cast<std::size_t>(i)] * hsign * scale;
    }
  }
  return m;
}

DrawResult draw_sketch_matrix(Distribution requested, index_t rows, index_t cols, RngSpec rng) {
  DrawResult out;
  Distribution want = requested;
  if (want == Distribution::Auto)
    want = is_power_of_two(rows) ? Distribution::Srht : Distribution::Gaussian;
  if (want == Distribution::Srht && !is_power_of_two(rows)) {
    out.fallback = true;
    want = Distribution::Gaussian;
  }
  out.used = want;
  out.phi = want == Distribution::Srht ? gen_srht(rows, cols, rng) : gen_gaussian(rows, cols, rng);
  return out;
}

namespace {

void check_rank_args(const std::vector<index_t>& dims, const std::vector<index_t>& ranks,
                     index_t oversample) {
  if (dims.size() != ranks.size() || dims.size() < 2)
    throw std::invalid_argument("sketch planning needs matching dims/ranks of order >= 2");
  if (oversample < 0) throw std::invalid_argument("oversample must be nonnegative");
  for (std::size_t k = 0; k < dims.size(); ++k)
    if (ranks[k] < 1 || ranks[k] > dims[k])
      throw std::invalid_argument("rank " + std::to_string(ranks[k]) + " invalid for dim " +
                                  std::to_string(dims[k]));
}

// all ascending factor tuples of length `count` with product `target`,
// entries >= min_factor
void enumerate_factorizations(index_t target, int count, index_t min_factor,
                              std::vector<index_t>& cur,
                              std::vector<std::vector<index_t>>& out) {
  if (count == 1) {
    if (target >= min_factor) {
      cur.push_back(target);
      out.push_back(cur);
      cur.pop_back();
    }
    return;
  }
  for (index_t f = min_factor; f <= target; ++f) {
    if (target % f != 0) continue;
    cur.push_back(f);
    enumerate_factorizations(target / f, count - 1, f, cur, out);
    cur.pop_back();
  }
}

// smaller max/min ratio wins; ties by lexicographically smaller tuple
bool more_balanced(const std::vector<index_t>& a, const std::vector<index_t>& b) {
  const index_t ra_num = a.back(), ra_den = a.front();
  const index_t rb_num = b.back(), rb_den = b.front();
  const index_t lhs = ra_num * rb_den;
  const index_t rhs = rb_num * ra_den;
  if (lhs != rhs) return lhs < rhs;
  return a < b;
}

}  // namespace

SubrankRow plan_subrank_row(const std::vector<index_t>& dims, int mode, index_t ell_base,
                            index_t max_adjust) {
  const int d = static_cast<int>(dims.size());
  if (d < 2 || mode < 0 || mode >= d) throw std::invalid_argument("plan_subrank_row: bad mode");
  if (ell_base < 1 || max_adjust < 0) throw std::invalid_argument("plan_subrank_row: bad window");

  std::vector<int> others;
  for (int k = 0; k < d; ++k)
    if (k != mode) others.push_back(k);

  for (index_t ell = ell_base; ell <= ell_base + max_adjust; ++ell) {
    if (ell > dims[static_cast<std::size_t>(mode)]) break;  // QR of the sketch must stay thin
    const index_t floor2 = index_t{1} << (d - 1);
    const index_t min_factor = ell >= floor2 ? 2 : 1;
    std::vector<std::vector<index_t>> tuples;
    std::vector<index_t> scratch;
    enumerate_factorizations(ell, d - 1, min_factor, scratch, tuples);

    // keep tuples that fit the per-mode capacities under some assignment:
    // with both sides sorted ascending a pairwise check is exact
    std::vector<index_t> caps_sorted;
    for (int k : others) caps_sorted.push_back(dims[static_cast<std::size_t>(k)]);
    std::sort(caps_sorted.begin(), caps_sorted.end());
    std::vector<std::vector<index_t>> feasible;
    for (const auto& tup : tuples) {
      bool ok = true;
      for (std::size_t i = 0; i < tup.size(); ++i)
        if (tup[i] > caps_sorted[i]) {
          ok = false;
          break;
        }
      if (ok) feasible.push_back(tup);
    }
    if (feasible.empty()) continue;

    std::vector<index_t> best = feasible.front();
    for (std::size_t i = 1; i < feasible.size(); ++i)
      if (more_balanced(feasible[i], best)) best = feasible[i];

    // ascending factors onto ascending modes; permute past capacity violations
    std::vector<index_t> assign = best;
    while (true) {
      bool ok = true;
      for (std::size_t i = 0; i < assign.size(); ++i)
        if (assign[i] > dims[static_cast<std::size_t>(others[i])]) {
          ok = false;
          break;
        }
      if (ok) break;
      if (!std::next_permutation(assign.begin(), assign.end()))
        throw std::logic_error("feasible factor tuple has no feasible assignment");
    }
    SubrankRow row;
    row.s.assign(static_cast<std::size_t>(d), 1);
    for (std::size_t i = 0; i < assign.size(); ++i)
      row.s[static_cast<std::size_t>(others[i])] = assign[i];
    row.adjusted_ell = ell;
    return row;
  }
  throw std::runtime_error("no factorizable sketch size for mode " + std::to_string(mode) +
                           " within [" + std::to_string(ell_base) + ", " +
                           std::to_string(ell_base + max_adjust) + "]");
}

SubrankMatrix plan_subrank_matrix(const std::vector<index_t>& dims,
                                  const std::vector<index_t>& ranks, index_t oversample,
                                  index_t max_adjust) {
  check_rank_args(dims, ranks, oversample);
  const int d = static_cast<int>(dims.size());
  SubrankMatrix plan;
  plan.s.reserve(static_cast<std::size_t>(d));
  plan.adjusted_ell.reserve(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    SubrankRow row =
        plan_subrank_row(dims, j, ranks[static_cast<std::size_t>(j)] + oversample, max_adjust);
    plan.s.push_back(std::move(row.s));
    plan.adjusted_ell.push_back(row.adjusted_ell);
  }
  return plan;
}

SubrankVector plan_subrank_vector(const std::vector<index_t>& ranks, index_t oversample,
                                  const std::vector<index_t>& dims) {
  check_rank_args(dims, ranks, oversample);
  const int d = static_cast<int>(ranks.size());
  unsigned __int128 prod = 1;
  for (index_t r : ranks) prod *= static_cast<unsigned __int128>(r + oversample);

  SubrankVector plan;
  plan.s.resize(ranks.size());
  for (int i = 0; i < d; ++i) {
    const index_t ell = ranks[static_cast<std::size_t>(i)] + oversample;
    index_t s = 1;
    while (true) {
      unsigned __int128 lhs = 1;
      for (int k = 0; k < d - 1; ++k) lhs *= static_cast<unsigned __int128>(s * ell);
      if (lhs >= prod) break;
      ++s;
    }
    if (s > dims[static_cast<std::size_t>(i)])
      throw std::runtime_error("shared sketch size " + std::to_string(s) + " exceeds dim " +
                               std::to_string(dims[static_cast<std::size_t>(i)]));
    plan.s[static_cast<std::size_t>(i)] = s;
  }
  return plan;
}

}  // namespace ktt

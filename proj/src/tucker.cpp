#include "ktt/tucker.hpp"

#include "ktt/dimtree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace ktt {

namespace {

void check_rank(const DenseTensor& x, const std::vector<index_t>& rank) {
  if (static_cast<int>(rank.size()) != x.order())
    throw std::invalid_argument("rank arity " + std::to_string(rank.size()) +
                                " does not match tensor order " + std::to_string(x.order()));
  for (int j = 0; j < x.order(); ++j)
    if (rank[static_cast<std::size_t>(j)] < 1 || rank[static_cast<std::size_t>(j)] > x.dim(j))
      throw std::invalid_argument("rank " + dims_to_string(rank) + " infeasible for dims " +
                                  dims_to_string(x.dims()));
}

std::vector<int> natural_order(int d) {
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  return order;
}

std::vector<int> resolve_order(int d, std::vector<int> order) {
  if (order.empty()) return natural_order(d);
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != natural_order(d))
    throw std::invalid_argument("mode_order must be a permutation of 0.." + std::to_string(d - 1));
  return order;
}

void check_oversampled(const DenseTensor& x, const std::vector<index_t>& rank, index_t p) {
  if (p < 0) throw std::invalid_argument("oversample must be nonnegative");
  for (int j = 0; j < x.order(); ++j)
    if (rank[static_cast<std::size_t>(j)] + p > x.dim(j))
      throw std::invalid_argument("oversampled rank " +
                                  std::to_string(rank[static_cast<std::size_t>(j)] + p) +
                                  " exceeds mode-" + std::to_string(j) + " size " +
                                  std::to_string(x.dim(j)));
}

Matrix draw_for(Distribution requested, index_t rows, index_t cols, RngSpec rng, int mode,
                int factor, Provenance& prov) {
  DrawResult dr = draw_sketch_matrix(requested, rows, cols, rng);
  prov.plan.draws.push_back({mode, factor, rows, cols, dr.used, dr.fallback});
  if (dr.fallback)
    prov.fallbacks.push_back("mode " + std::to_string(mode) + " factor " + std::to_string(factor) +
                             ": srht needs a power-of-two long dimension, drew gaussian for rows=" +
                             std::to_string(rows));
  return std::move(dr.phi);
}

Provenance make_provenance(std::string algorithm, const std::vector<index_t>& rank,
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

/// Shared tail of the randomized family: either return the oversampled
/// (rank-ell) result as-is, or recompress the core and rotate the factors.
TuckerDecomposition finalize_randomized(const std::vector<index_t>& rank, const TuckerOptions& opt,
                                        std::vector<FactorMatrix> u_hat, DenseTensor g_hat,
                                        Provenance prov) {
  TuckerDecomposition t;
  t.provenance = std::move(prov);
  if (opt.keep_intermediate) {
    t.sketch_core = g_hat;
    t.sketch_factors = u_hat;
  }
  if (opt.rank_ell_only) {
    t.core = std::move(g_hat);
    t.factors = std::move(u_hat);
    return t;
  }
  CoreTruncation trunc = truncate_core(g_hat, rank, opt.counter);
  t.core = std::move(trunc.core);
  t.factors.resize(u_hat.size());
  for (std::size_t j = 0; j < u_hat.size(); ++j) {
    const Matrix& u = u_hat[j].mat;
    const Matrix& v = trunc.rotations[j].mat;
    if (opt.counter) opt.counter->add(2 * u.rows() * v.cols() * u.cols());
    t.factors[j].mat = u * v;
    t.factors[j].orthonormal = true;
  }
  return t;
}

std::vector<ModeApplication> transposed_apps(const std::vector<FactorMatrix>& factors) {
  std::vector<ModeApplication> apps;
  apps.reserve(factors.size());
  for (std::size_t j = 0; j < factors.size(); ++j)
    apps.push_back({static_cast<int>(j), &factors[j].mat, true});
  return apps;
}

}  // namespace

TuckerDecomposition hosvd(const DenseTensor& x, const std::vector<index_t>& rank,
                          FlopCounter* counter) {
  check_rank(x, rank);
  const int d = x.order();
  TuckerDecomposition t;
  t.factors.resize(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    LeadingVectors lead =
        leading_left_singular_vectors(unfold(x, j), rank[static_cast<std::size_t>(j)]);
    t.factors[static_cast<std::size_t>(j)] = {std::move(lead.u), true};
  }
  t.core = multi_ttm(x, transposed_apps(t.factors), ModeOrder::DescendingSize, counter);
  TuckerOptions opt;
  opt.oversample = 0;
  t.provenance = make_provenance("hosvd", rank, opt, natural_order(d));
  return t;
}

TuckerDecomposition sthosvd(const DenseTensor& x, const std::vector<index_t>& rank,
                            std::vector<int> mode_order, FlopCounter* counter) {
  check_rank(x, rank);
  const int d = x.order();
  const std::vector<int> order = resolve_order(d, std::move(mode_order));
  TuckerDecomposition t;
  t.factors.resize(static_cast<std::size_t>(d));
  DenseTensor g = x;
  for (int j : order) {
    LeadingVectors lead =
        leading_left_singular_vectors(unfold(g, j), rank[static_cast<std::size_t>(j)]);
    g = ttm(g, lead.u, j, /*transpose_a=*/true, counter);
    t.factors[static_cast<std::size_t>(j)] = {std::move(lead.u), true};
  }
  t.core = std::move(g);
  TuckerOptions opt;
  opt.oversample = 0;
  t.provenance = make_provenance("sthosvd", rank, opt, order);
  return t;
}

FactorMatrix rand_range_finder(const Matrix& m, const Matrix& omega, FlopCounter* counter) {
  if (omega.rows() != m.cols())
    throw std::invalid_argument("range finder: test matrix has " + std::to_string(omega.rows()) +
                                " rows, need " + std::to_string(m.cols()));
  if (omega.cols() > m.rows())
    throw std::invalid_argument("range finder: more sketch columns than matrix rows");
  if (counter) counter->add(2 * m.rows() * omega.cols() * m.cols());
  Matrix y = m * omega;
  return {thin_qr(y).q, true};
}

SvdResult rand_svd(const Matrix& m, index_t rank, const Matrix& omega, FlopCounter* counter) {
  if (rank < 1 || rank > omega.cols())
    throw std::invalid_argument("rand_svd: rank must lie in [1, sketch width]");
  FactorMatrix q = rand_range_finder(m, omega, counter);
  if (counter) counter->add(2 * q.mat.cols() * m.cols() * m.rows());
  Matrix b = q.mat.transpose() * m;
  SvdResult small = thin_svd(b);
  SvdResult out;
  if (counter) counter->add(2 * q.mat.rows() * rank * q.mat.cols());
  out.u = q.mat * small.u.leftCols(rank);
  out.singular_values = small.singular_values.head(rank);
  out.v = small.v.leftCols(rank);
  return out;
}

TuckerDecomposition rhosvd(const DenseTensor& x, const std::vector<index_t>& rank,
                           const TuckerOptions& opt) {
  check_rank(x, rank);
  check_oversampled(x, rank, opt.oversample);
  const int d = x.order();
  Provenance prov = make_provenance("rhosvd", rank, opt, natural_order(d));
  std::vector<FactorMatrix> u_hat(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const index_t ell = rank[static_cast<std::size_t>(j)] + opt.oversample;
    Matrix omega = draw_for(opt.distribution, x.size_other(j), ell,
                            {opt.seed, streams::derive(streams::kDenseSketch, static_cast<std::uint64_t>(j))},
                            j, -1, prov);
    u_hat[static_cast<std::size_t>(j)] = rand_range_finder(unfold(x, j), omega, opt.counter);
  }
  DenseTensor g_hat = multi_ttm(x, transposed_apps(u_hat), ModeOrder::DescendingSize, opt.counter);
  return finalize_randomized(rank, opt, std::move(u_hat), std::move(g_hat), std::move(prov));
}

TuckerDecomposition rsthosvd(const DenseTensor& x, const std::vector<index_t>& rank,
                             const TuckerOptions& opt) {
  check_rank(x, rank);
  check_oversampled(x, rank, opt.oversample);
  const int d = x.order();
  const std::vector<int> order = resolve_order(d, opt.mode_order);
  Provenance prov = make_provenance("rsthosvd", rank, opt, order);
  std::vector<FactorMatrix> u_hat(static_cast<std::size_t>(d));
  DenseTensor g = x;
  for (int j : order) {
    const index_t ell = rank[static_cast<std::size_t>(j)] + opt.oversample;
    Matrix omega = draw_for(opt.distribution, g.size_other(j), ell,
                            {opt.seed, streams::derive(streams::kDenseSketch, static_cast<std::uint64_t>(j))},
                            j, -1, prov);
    u_hat[static_cast<std::size_t>(j)] = rand_range_finder(unfold(g, j), omega, opt.counter);
    g = ttm(g, u_hat[static_cast<std::size_t>(j)].mat, j, /*transpose_a=*/true, opt.counter);
  }
  return finalize_randomized(rank, opt, std::move(u_hat), std::move(g), std::move(prov));
}

TuckerDecomposition rhosvd_kron(const DenseTensor& x, const std::vector<index_t>& rank,
                                const TuckerOptions& opt) {
  check_rank(x, rank);
  check_oversampled(x, rank, opt.oversample);
  const int d = x.order();
  Provenance prov = make_provenance("rhosvd-kron", rank, opt, natural_order(d));
  SubrankMatrix plan = plan_subrank_matrix(x.dims(), rank, opt.oversample);
  prov.plan.subrank_matrix = plan;

  std::vector<FactorMatrix> u_hat(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    std::vector<Matrix> phis;
    phis.reserve(static_cast<std::size_t>(d - 1));
    std::vector<ModeApplication> apps;
    for (int k = 0; k < d; ++k) {
      if (k == j) continue;
      const index_t cols = plan.s[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      phis.push_back(draw_for(opt.distribution, x.dim(k), cols,
                              {opt.seed, streams::derive(streams::kKronSketch,
                                                         static_cast<std::uint64_t>(j),
                                                         static_cast<std::uint64_t>(k))},
                              j, k, prov));
      apps.push_back({k, nullptr, true});
    }
    for (std::size_t i = 0; i < apps.size(); ++i) apps[i].matrix = &phis[i];
    DenseTensor y = multi_ttm(x, apps, ModeOrder::DescendingSize, opt.counter);
    u_hat[static_cast<std::size_t>(j)] = {thin_qr(unfold(y, j)).q, true};
  }
  DenseTensor g_hat = multi_ttm(x, transposed_apps(u_hat), ModeOrder::DescendingSize, opt.counter);
  return finalize_randomized(rank, opt, std::move(u_hat), std::move(g_hat), std::move(prov));
}

TuckerDecomposition rsthosvd_kron(const DenseTensor& x, const std::vector<index_t>& rank,
                                  const TuckerOptions& opt) {
  check_rank(x, rank);
  check_oversampled(x, rank, opt.oversample);
  const int d = x.order();
  const std::vector<int> order = resolve_order(d, opt.mode_order);
  Provenance prov = make_provenance("rsthosvd-kron", rank, opt, order);
  SubrankMatrix plan;
  plan.s.assign(static_cast<std::size_t>(d),
                std::vector<index_t>(static_cast<std::size_t>(d), 1));
  plan.adjusted_ell.assign(static_cast<std::size_t>(d), 0);

  std::vector<FactorMatrix> u_hat(static_cast<std::size_t>(d));
  DenseTensor g = x;
  for (int j : order) {
    // replan against the partially truncated core: processed modes offer
    // their shrunken sizes as sketch capacity
    SubrankRow row =
        plan_subrank_row(g.dims(), j, rank[static_cast<std::size_t>(j)] + opt.oversample);
    plan.s[static_cast<std::size_t>(j)] = row.s;
    plan.adjusted_ell[static_cast<std::size_t>(j)] = row.adjusted_ell;

    std::vector<Matrix> phis;
    phis.reserve(static_cast<std::size_t>(d - 1));
    std::vector<ModeApplication> apps;
    for (int k = 0; k < d; ++k) {
      if (k == j) continue;
      phis.push_back(draw_for(opt.distribution, g.dim(k), row.s[static_cast<std::size_t>(k)],
                              {opt.seed, streams::derive(streams::kKronSketch,
                                                         static_cast<std::uint64_t>(j),
                                                         static_cast<std::uint64_t>(k))},
                              j, k, prov));
      apps.push_back({k, nullptr, true});
    }
    for (std::size_t i = 0; i < apps.size(); ++i) apps[i].matrix = &phis[i];
    DenseTensor y = multi_ttm(g, apps, ModeOrder::DescendingSize, opt.counter);
    u_hat[static_cast<std::size_t>(j)] = {thin_qr(unfold(y, j)).q, true};
    g = ttm(g, u_hat[static_cast<std::size_t>(j)].mat, j, /*transpose_a=*/true, opt.counter);
  }
  prov.plan.subrank_matrix = std::move(plan);
  return finalize_randomized(rank, opt, std::move(u_hat), std::move(g), std::move(prov));
}

TuckerDecomposition rhosvd_kron_reuse(const DenseTensor& x, const std::vector<index_t>& rank,
                                      const TuckerOptions& opt) {
  check_rank(x, rank);
  check_oversampled(x, rank, opt.oversample);
  const int d = x.order();
  Provenance prov = make_provenance("rhkron-re", rank, opt, natural_order(d));
  SubrankVector svec = plan_subrank_vector(rank, opt.oversample, x.dims());
  prov.plan.subrank_vector = svec;
  for (int j = 0; j < d; ++j) {
    index_t width = 1;
    for (int k = 0; k < d; ++k)
      if (k != j) width *= svec.s[static_cast<std::size_t>(k)];
    if (width > x.dim(j))
      throw std::runtime_error("shared sketch width " + std::to_string(width) +
                               " exceeds mode-" + std::to_string(j) +
                               " size; modes too skewed for factor reuse");
  }

  std::vector<Matrix> phis;
  phis.reserve(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k)
    phis.push_back(draw_for(opt.distribution, x.dim(k), svec.s[static_cast<std::size_t>(k)],
                            {opt.seed, streams::derive(streams::kReuseSketch,
                                                       static_cast<std::uint64_t>(k))},
                            -1, k, prov));

  SketchSet sketches = all_mode_sketches(x, phis, opt.use_dimtree, opt.counter);
  std::vector<FactorMatrix> u_hat(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j)
    u_hat[static_cast<std::size_t>(j)] = {
        thin_qr(unfold(sketches.sketches[static_cast<std::size_t>(j)], j)).q, true};

  DenseTensor g_hat = multi_ttm(x, transposed_apps(u_hat), ModeOrder::DescendingSize, opt.counter);
  return finalize_randomized(rank, opt, std::move(u_hat), std::move(g_hat), std::move(prov));
}

CoreTruncation truncate_core(const DenseTensor& g_hat, const std::vector<index_t>& rank,
                             FlopCounter* counter) {
  check_rank(g_hat, rank);
  const int d = g_hat.order();
  CoreTruncation out;
  out.rotations.resize(static_cast<std::size_t>(d));
  DenseTensor g = g_hat;
  for (int j = 0; j < d; ++j) {
    LeadingVectors lead = leading_left_singular_vectors(
        unfold(g, j), rank[static_cast<std::size_t>(j)], SvdMethod::Direct);
    g = ttm(g, lead.u, j, /*transpose_a=*/true, counter);
    out.rotations[static_cast<std::size_t>(j)] = {std::move(lead.u), true};
  }
  out.core = std::move(g);
  return out;
}

DenseTensor reconstruct(const TuckerDecomposition& t, FlopCounter* counter) {
  if (static_cast<int>(t.factors.size()) != t.core.order())
    throw std::invalid_argument("reconstruct: factor count does not match core order");
  std::vector<ModeApplication> apps;
  for (std::size_t j = 0; j < t.factors.size(); ++j) {
    if (t.factors[j].mat.cols() != t.core.dim(static_cast<int>(j)))
      throw std::invalid_argument("reconstruct: factor " + std::to_string(j) +
                                  " has " + std::to_string(t.factors[j].mat.cols()) +
                                  " columns, core has " +
                                  std::to_string(t.core.dim(static_cast<int>(j))));
    apps.push_back({static_cast<int>(j), &t.factors[j].mat, false});
  }
  // natural order; the descending-size policy is tuned for shrinking chains
  return multi_ttm(t.core, apps, ModeOrder::AsGiven, counter);
}

double relative_error(const DenseTensor& x, const TuckerDecomposition& t) {
  DenseTensor xhat = reconstruct(t);
  if (xhat.dims() != x.dims())
    throw std::invalid_argument("relative_error: reconstruction dims " +
                                dims_to_string(xhat.dims()) + " do not match input " +
                                dims_to_string(x.dims()));
  const double denom = tensor_norm(x);
  if (denom == 0.0) throw std::invalid_argument("relative_error: zero reference tensor");
  Eigen::Map<const Eigen::VectorXd> a(x.data(), x.size());
  Eigen::Map<const Eigen::VectorXd> b(xhat.data(), xhat.size());
  return (a - b).norm() / denom;
}

TuckerDecomposition decompose(Algorithm alg, const DenseTensor& x, const std::vector<index_t>& rank,
                              const TuckerOptions& opt) {
  switch (alg) {
    case Algorithm::Hosvd: return hosvd(x, rank, opt.counter);
    case Algorithm::Sthosvd: return sthosvd(x, rank, opt.mode_order, opt.counter);
    case Algorithm::Rhosvd: return rhosvd(x, rank, opt);
    case Algorithm::Rsthosvd: return rsthosvd(x, rank, opt);
    case Algorithm::RhosvdKron: return rhosvd_kron(x, rank, opt);
    case Algorithm::RsthosvdKron: return rsthosvd_kron(x, rank, opt);
    case Algorithm::RhosvdKronReuse: return rhosvd_kron_reuse(x, rank, opt);
  }
  throw std::logic_error("unknown algorithm");
}

std::optional<Algorithm> algorithm_from_name(std::string_view name) {
  std::string key(name);
  std::replace(key.begin(), key.end(), '_', '-');
  if (key == "hosvd") return Algorithm::Hosvd;
  if (key == "sthosvd") return Algorithm::Sthosvd;
  if (key == "rhosvd") return Algorithm::Rhosvd;
  if (key == "rsthosvd") return Algorithm::Rsthosvd;
  if (key == "rhosvd-kron") return Algorithm::RhosvdKron;
  if (key == "rsthosvd-kron") return Algorithm::RsthosvdKron;
  if (key == "rhkron-re" || key == "rhosvd-kron-reuse") return Algorithm::RhosvdKronReuse;
  return std::nullopt;
}

std::string algorithm_name(Algorithm alg) {
  switch (alg) {
    case Algorithm::Hosvd: return "hosvd";
    case Algorithm::Sthosvd: return "sthosvd";
    case Algorithm::Rhosvd: return "rhosvd";
    case Algorithm::Rsthosvd: return "rsthosvd";
    case Algorithm::RhosvdKron: return "rhosvd-kron";
    case Algorithm::RsthosvdKron: return "rsthosvd-kron";
    case Algorithm::RhosvdKronReuse: return "rhkron-re";
  }
  return "?";
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> algs = {
      Algorithm::Hosvd,        Algorithm::Sthosvd,      Algorithm::Rhosvd,
      Algorithm::Rsthosvd,     Algorithm::RhosvdKron,   Algorithm::RsthosvdKron,
      Algorithm::RhosvdKronReuse};
  return algs;
}

const std::vector<Algorithm>& randomized_algorithms() {
  static const std::vector<Algorithm> algs = {
      Algorithm::Rhosvd, Algorithm::Rsthosvd, Algorithm::RhosvdKron, Algorithm::RsthosvdKron,
      Algorithm::RhosvdKronReuse};
  return algs;
}

}  // namespace ktt

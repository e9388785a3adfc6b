#include "ktt/analysis.hpp"

#include "ktt/linalg.hpp"
#include "ktt/rng.hpp"
#include "ktt/sketch.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ktt {

namespace {

Vector singular_values_of(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m);  // values only
  return svd.singularValues();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double norm_of_difference(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims())
    throw std::invalid_argument("tensor difference needs matching dims, got " +
                                dims_to_string(a.dims()) + " vs " + dims_to_string(b.dims()));
  double acc = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (index_t i = 0; i < a.size(); ++i) {
    const double diff = pa[i] - pb[i];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace

SpectralProfile SpectralProfile::of(const DenseTensor& x) {
  SpectralProfile p;
  p.spectra_.resize(static_cast<std::size_t>(x.order()));
  p.suffix_.resize(static_cast<std::size_t>(x.order()));
  for (int j = 0; j < x.order(); ++j) {
    Vector sv = singular_values_of(unfold(x, j));
    std::vector<double> suffix(static_cast<std::size_t>(sv.size()) + 1, 0.0);
    for (index_t i = sv.size() - 1; i >= 0; --i)
      suffix[static_cast<std::size_t>(i)] =
          suffix[static_cast<std::size_t>(i) + 1] + sv(i) * sv(i);
    p.spectra_[static_cast<std::size_t>(j)] = std::move(sv);
    p.suffix_[static_cast<std::size_t>(j)] = std::move(suffix);
  }
  return p;
}

double SpectralProfile::tail(int j, index_t k) const {
  if (j < 0 || j >= order()) throw std::invalid_argument("spectral profile mode out of range");
  if (k < 0) throw std::invalid_argument("tail index must be nonnegative");
  const std::vector<double>& suffix = suffix_[static_cast<std::size_t>(j)];
  if (static_cast<std::size_t>(k) >= suffix.size()) return 0.0;
  return suffix[static_cast<std::size_t>(k)];
}

bool bound_admissible(double alpha, double beta, index_t rank, index_t ell, index_t m, index_t n) {
  if (!(alpha > 1.0) || !(beta > 1.0)) return false;
  if (rank < 1 || ell < rank) return false;
  const double needed = alpha * alpha * beta / ((alpha - 1.0) * (alpha - 1.0)) *
                        static_cast<double>(rank * rank + rank);
  return static_cast<double>(ell) >= needed && ell < std::min(m, n);
}

MatrixBound matrix_bound_rhs(const Vector& spectrum, index_t rank, index_t ell, index_t m,
                             index_t n, double alpha, double beta) {
  if (rank < 1 || rank > spectrum.size())
    throw std::invalid_argument("bound rank outside the spectrum length");
  if (ell < rank) throw std::invalid_argument("sketch size must be at least the rank");
  double tail = 0.0;
  for (index_t i = rank; i < spectrum.size(); ++i) tail += spectrum(i) * spectrum(i);
  MatrixBound out;
  out.value = std::sqrt((1.0 + alpha * static_cast<double>(n) / static_cast<double>(ell)) * tail);
  out.failure_probability = 1.0 / (beta * beta);
  out.admissible = bound_admissible(alpha, beta, rank, ell, m, n);
  return out;
}

namespace {

void check_bound_args(const SpectralProfile& profile, const std::vector<index_t>& dims,
                      const std::vector<index_t>& rank, const std::vector<index_t>& ell,
                      const std::vector<double>& alpha, const std::vector<double>& beta) {
  const std::size_t d = dims.size();
  if (profile.order() != static_cast<int>(d) || rank.size() != d || ell.size() != d ||
      alpha.size() != d || beta.size() != d)
    throw std::invalid_argument("bound arguments must agree on the tensor order");
  for (std::size_t j = 0; j < d; ++j) {
    if (rank[j] < 1 || ell[j] < rank[j])
      throw std::invalid_argument("bound needs 1 <= rank_j <= ell_j for every mode");
  }
}

}  // namespace

TensorBound tensor_bound_rhs(const SpectralProfile& profile, const std::vector<index_t>& dims,
                             const std::vector<index_t>& rank, const std::vector<index_t>& ell,
                             const std::vector<double>& alpha, const std::vector<double>& beta) {
  check_bound_args(profile, dims, rank, ell, alpha, beta);
  const std::size_t d = dims.size();
  TensorBound out;
  out.admissible = true;
  double rand_sq = 0.0, core_sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    index_t facing = 1;  // product of the dimensions the mode-j sketch contracts
    for (std::size_t k = 0; k < d; ++k)
      if (k != j) facing *= dims[k];
    rand_sq += (1.0 + alpha[j] * static_cast<double>(facing) / static_cast<double>(ell[j])) *
               profile.tail(static_cast<int>(j), ell[j]);
    core_sq += profile.tail(static_cast<int>(j), rank[j]) - profile.tail(static_cast<int>(j), ell[j]);
    out.failure_probability += 1.0 / (beta[j] * beta[j]);
    out.admissible =
        out.admissible && bound_admissible(alpha[j], beta[j], rank[j], ell[j], dims[j], facing);
  }
  out.rand_term = std::sqrt(rand_sq);
  out.core_term = std::sqrt(std::max(core_sq, 0.0));
  out.value = out.rand_term + out.core_term;
  return out;
}

TensorBound sthosvd_bound_rhs(const SpectralProfile& profile, const std::vector<index_t>& dims,
                              const std::vector<index_t>& rank, const std::vector<index_t>& ell,
                              const std::vector<double>& alpha, const std::vector<double>& beta) {
  // the sequential variant satisfies the same right-hand side: each step's
  // partially truncated unfolding has singular values dominated by the
  // original ones, so the per-mode tails carry over unchanged
  return tensor_bound_rhs(profile, dims, rank, ell, alpha, beta);
}

OmegaOneReport omega1_monte_carlo(const std::vector<index_t>& n_dims,
                                  const std::vector<index_t>& s_dims, index_t rank, int trials,
                                  double alpha, double beta, std::uint64_t seed) {
  if (n_dims.empty() || n_dims.size() != s_dims.size())
    throw std::invalid_argument("need one sketch width per mode");
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  index_t n = 1, ell = 1;
  for (std::size_t k = 0; k < n_dims.size(); ++k) {
    if (n_dims[k] < 1 || s_dims[k] < 1 || s_dims[k] > n_dims[k])
      throw std::invalid_argument("sketch widths must satisfy 1 <= s_k <= n_k");
    n *= n_dims[k];
    ell *= s_dims[k];
  }
  if (rank < 1 || rank > ell)
    throw std::invalid_argument("subspace rank must lie in [1, prod s_k]");

  OmegaOneReport report;
  report.trials = trials;
  report.threshold = alpha * static_cast<double>(n) / static_cast<double>(ell);
  report.bound_probability = 1.0 / (beta * beta);
  report.admissible = bound_admissible(alpha, beta, rank, ell, n, n);

  std::vector<double> inv_sq(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    // Haar-distributed orthonormal basis: QR of a Gaussian with the positive
    // diagonal convention
    const Matrix v1 =
        thin_qr(gen_gaussian(n, rank, {seed, streams::derive(streams::kHaarSubspace,
                                                             static_cast<std::uint64_t>(t))}))
            .q;
    Matrix omega;  // highest mode on the left so mode 0 indexes fastest
    for (std::size_t k = 0; k < n_dims.size(); ++k) {
      const Matrix phi =
          draw_sketch_matrix(Distribution::Auto, n_dims[k], s_dims[k],
                             {seed, streams::derive(streams::kKronSketch,
                                                    static_cast<std::uint64_t>(t),
                                                    static_cast<std::uint64_t>(k))})
              .phi;
      omega = k == 0 ? phi : kronecker(phi, omega);
    }
    const Vector sv = singular_values_of(v1.transpose() * omega);
    const double sigma_min = sv(sv.size() - 1);
    const double value = 1.0 / (sigma_min * sigma_min);
    inv_sq[static_cast<std::size_t>(t)] = value;
    if (value > report.threshold) ++report.violations;
  }
  report.violation_rate = static_cast<double>(report.violations) / trials;

  std::sort(inv_sq.begin(), inv_sq.end());
  const std::size_t mid = inv_sq.size() / 2;
  report.median_inv_sigma_min_sq =
      inv_sq.size() % 2 == 1 ? inv_sq[mid] : 0.5 * (inv_sq[mid - 1] + inv_sq[mid]);
  return report;
}

LemmaCheckReport lemma_core_svals_check(const DenseTensor& x, const std::vector<Matrix>& factors) {
  if (static_cast<int>(factors.size()) != x.order())
    throw std::invalid_argument("need one factor per mode");
  std::vector<ModeApplication> apps;
  apps.reserve(factors.size());
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (factors[k].rows() != x.dim(static_cast<int>(k)))
      throw std::invalid_argument("factor " + std::to_string(k) + " has " +
                                  std::to_string(factors[k].rows()) + " rows, mode size is " +
                                  std::to_string(x.dim(static_cast<int>(k))));
    apps.push_back({static_cast<int>(k), &factors[k], true});
  }
  const DenseTensor y = multi_ttm(x, apps, ModeOrder::DescendingSize);

  LemmaCheckReport report;
  report.worst_excess = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < x.order(); ++j) {
    const Vector sy = singular_values_of(unfold(y, j));
    const Vector sx = singular_values_of(unfold(x, j));
    const index_t count = std::min(sy.size(), sx.size());
    for (index_t i = 0; i < count; ++i)
      report.worst_excess = std::max(report.worst_excess, sy(i) - sx(i));
  }
  report.ok = report.worst_excess <= 1e-10;
  return report;
}

ErrorDecomposition error_decomposition(const DenseTensor& x, const TuckerDecomposition& t) {
  if (!t.sketch_core || t.sketch_factors.empty())
    throw std::invalid_argument(
        "error decomposition needs the intermediate oversampled stage; rerun with keep_intermediate");
  const double x_norm = tensor_norm(x);
  if (x_norm == 0.0) throw std::invalid_argument("reference tensor has zero norm");

  TuckerDecomposition sketch_stage;
  sketch_stage.core = *t.sketch_core;
  sketch_stage.factors = t.sketch_factors;
  const DenseTensor x_ell = reconstruct(sketch_stage);
  const DenseTensor x_hat = reconstruct(t);

  ErrorDecomposition out;
  out.total = norm_of_difference(x, x_hat) / x_norm;
  out.rand = norm_of_difference(x, x_ell) / x_norm;
  out.core = norm_of_difference(x_ell, x_hat) / x_norm;

  const SpectralProfile profile = SpectralProfile::of(x);
  double core_sq = 0.0;
  for (int j = 0; j < x.order(); ++j) {
    const index_t r = t.core.dim(j);
    const index_t ell = t.sketch_factors[static_cast<std::size_t>(j)].mat.cols();
    core_sq += profile.tail(j, r) - profile.tail(j, ell);
  }
  out.core_tail_bound = std::sqrt(std::max(core_sq, 0.0)) / x_norm;
  return out;
}

void write_bound_trials_csv(std::ostream& out, const std::vector<double>& observed,
                            const std::vector<double>& bounds) {
  if (observed.size() != bounds.size())
    throw std::invalid_argument("need one bound per observed value");
  out << "trial,observed,bound,violated\n";
  for (std::size_t i = 0; i < observed.size(); ++i)
    out << i << ',' << fmt(observed[i]) << ',' << fmt(bounds[i]) << ','
        << (observed[i] > bounds[i] ? 1 : 0) << '\n';
}

}  // namespace ktt

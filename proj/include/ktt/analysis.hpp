#pragma once

#include "ktt/tensor.hpp"
#include "ktt/tucker.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace ktt {

/// Full singular spectra of all mode unfoldings plus squared tail sums.
class SpectralProfile {
 public:
  static SpectralProfile of(const DenseTensor& x);

  int order() const { return static_cast<int>(spectra_.size()); }
  const Vector& mode(int j) const { return spectra_.at(static_cast<std::size_t>(j)); }
  /// sum_{i > k} sigma_i^2 of the mode-j unfolding (k = 0 gives ||X||^2).
  double tail(int j, index_t k) const;

 private:
  std::vector<Vector> spectra_;
  std::vector<std::vector<double>> suffix_;  // suffix_[j][k] = tail(j, k)
};

/// The probabilistic guarantees hold when
///   ell >= alpha^2 * beta / (alpha - 1)^2 * (r^2 + r)   and   ell < min(m, n).
/// Outside that region the bound values are still computable, just not backed
/// by the theory; callers get a flag instead of an error.
bool bound_admissible(double alpha, double beta, index_t rank, index_t ell, index_t m, index_t n);

struct MatrixBound {
  double value = 0;
  double failure_probability = 0;  // 1/beta^2
  bool admissible = false;
};

/// RHS of the range-finder tail bound for an m x n matrix with the given
/// spectrum: sqrt((1 + alpha * n / ell) * sum_{i > rank} sigma_i^2).
MatrixBound matrix_bound_rhs(const Vector& spectrum, index_t rank, index_t ell, index_t m,
                             index_t n, double alpha, double beta);

struct TensorBound {
  double value = 0;
  double rand_term = 0;  // sqrt(sum_j (1 + alpha_j n_j~ / ell_j) * tail(j, ell_j))
  double core_term = 0;  // sqrt(sum_j sum_{i = r_j+1}^{ell_j} sigma_i^2)
  double failure_probability = 0;  // sum_j 1/beta_j^2
  bool admissible = false;
};

/// Two-part tail bound for the randomized Tucker family: sketch-induced error
/// plus recompression error, with n_j~ the product of the sketched dimensions
/// facing mode j.
TensorBound tensor_bound_rhs(const SpectralProfile& profile, const std::vector<index_t>& dims,
                             const std::vector<index_t>& rank, const std::vector<index_t>& ell,
                             const std::vector<double>& alpha, const std::vector<double>& beta);

/// Same right-hand side evaluated for the sequentially truncated variant (the
/// guarantee carries over with identical constants).
TensorBound sthosvd_bound_rhs(const SpectralProfile& profile, const std::vector<index_t>& dims,
                              const std::vector<index_t>& rank, const std::vector<index_t>& ell,
                              const std::vector<double>& alpha, const std::vector<double>& beta);

struct OmegaOneReport {
  int trials = 0;
  int violations = 0;
  double violation_rate = 0;
  double bound_probability = 0;       // 1/beta^2
  double median_inv_sigma_min_sq = 0; // median over trials of 1/sigma_min^2
  double threshold = 0;               // alpha * n / ell
  bool admissible = false;
};

/// Monte Carlo check of the smallest-singular-value inequality for a
/// Kronecker SRHT sketch hitting a Haar-random r-dimensional subspace:
/// 1/sigma_min(V1^T Omega)^2 <= alpha * n / ell with probability >= 1 - 1/beta^2.
OmegaOneReport omega1_monte_carlo(const std::vector<index_t>& n_dims,
                                  const std::vector<index_t>& s_dims, index_t rank, int trials,
                                  double alpha, double beta, std::uint64_t seed);

struct LemmaCheckReport {
  bool ok = false;
  double worst_excess = 0;  // max over (j, i) of sigma_i(Y_(j)) - sigma_i(X_(j))
};

/// Verifies that projecting every mode onto orthonormal bases cannot raise
/// singular values: sigma_i(Y_(j)) <= sigma_i(X_(j)) + 1e-10 for
/// i <= min(ell_j, prod_{k != j} ell_k), where Y = X x_k U_k^T.
LemmaCheckReport lemma_core_svals_check(const DenseTensor& x, const std::vector<Matrix>& factors);

struct ErrorDecomposition {
  double total = 0;       // ||X - [[G; U]]|| / ||X||
  double rand = 0;        // sketch-induced part
  double core = 0;        // recompression part
  double core_tail_bound = 0;  // sqrt(sum_j sum_{i=r_j+1}^{ell_j} sigma_i^2) / ||X||
};

/// Splits the total error of a randomized decomposition into its sketch and
/// recompression parts. Requires the decomposition to carry its intermediate
/// rank-ell stage (TuckerOptions::keep_intermediate).
ErrorDecomposition error_decomposition(const DenseTensor& x, const TuckerDecomposition& t);

/// CSV: trial,observed,bound,violated
void write_bound_trials_csv(std::ostream& out, const std::vector<double>& observed,
                            const std::vector<double>& bounds);

}  // namespace ktt

#include "ktt/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ktt {

QrResult thin_qr(const Matrix& m) {
  if (m.rows() < m.cols())
    throw std::invalid_argument("thin_qr: need rows >= cols, got " + std::to_string(m.rows()) +
                                "x" + std::to_string(m.cols()));
  Eigen::HouseholderQR<Matrix> qr(m);
  QrResult out;
  out.q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  out.r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  for (index_t j = 0; j < out.r.rows(); ++j) {
    if (out.r(j, j) < 0.0) {
      out.r.row(j) = -out.r.row(j);
      out.q.col(j) = -out.q.col(j);
    }
  }
  return out;
}

namespace {

// Flip column pairs so each left vector's largest-magnitude entry (first such
// index on ties) is positive. Keeps u v^T products unchanged.
void fix_svd_signs(Matrix& u, Matrix* v) {
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
    if (u(arg, j) < 0.0) {
      u.col(j) = -u.col(j);
      if (v) v->col(j) = -v->col(j);
    }
  }
}

}  // namespace

SvdResult thin_svd(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult out;
  out.u = svd.matrixU();
  out.singular_values = svd.singularValues();
  out.v = svd.matrixV();
  fix_svd_signs(out.u, &out.v);
  return out;
}

LeadingVectors leading_left_singular_vectors(const Matrix& m, index_t k, SvdMethod method) {
  const index_t max_rank = std::min(m.rows(), m.cols());
  if (k < 1 || k > max_rank)
    throw std::invalid_argument("leading_left_singular_vectors: k=" + std::to_string(k) +
                                " outside [1, " + std::to_string(max_rank) + "]");
  LeadingVectors out;
  if (method == SvdMethod::Direct) {
    SvdResult svd = thin_svd(m);
    out.u = svd.u.leftCols(k);
    out.singular_values = svd.singular_values.head(k);
    return out;
  }
  Matrix gram = Matrix::Zero(m.rows(), m.rows());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success) throw std::runtime_error("gram eigendecomposition failed");
  // eigenvalues ascend; take the trailing k in reverse
  out.u.resize(m.rows(), k);
  out.singular_values.resize(k);
  for (index_t j = 0; j < k; ++j) {
    const index_t src = m.rows() - 1 - j;
    out.u.col(j) = eig.eigenvectors().col(src);
    out.singular_values(j) = std::sqrt(std::max(eig.eigenvalues()(src), 0.0));
  }
  fix_svd_signs(out.u, nullptr);
  return out;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (index_t i = 0; i < a.rows(); ++i)
    for (index_t j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace ktt

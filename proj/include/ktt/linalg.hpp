#pragma once

#include "ktt/tensor.hpp"

namespace ktt {

struct QrResult {
  Matrix q;  // rows x cols, orthonormal columns
  Matrix r;  // cols x cols, upper triangular, nonnegative diagonal
};

/// Householder thin QR. Requires rows >= cols. The factorization is made
/// unique (for full-rank input) by flipping signs so diag(R) >= 0.
QrResult thin_qr(const Matrix& m);

struct SvdResult {
  Matrix u;
  Vector singular_values;  // descending
  Matrix v;
};

/// Thin SVD with a deterministic sign convention: in each left singular
/// vector the entry of largest magnitude (first such index) is positive.
SvdResult thin_svd(const Matrix& m);

enum class SvdMethod {
  Gram,    // eigendecomposition of M M^T; cheap for short-fat M, loses half
           // the digits for tiny singular values
  Direct,  // thin SVD of M itself
};

struct LeadingVectors {
  Matrix u;                // rows x k, orthonormal
  Vector singular_values;  // descending, length k
};

/// Top-k left singular vectors of m, same sign convention as thin_svd.
LeadingVectors leading_left_singular_vectors(const Matrix& m, index_t k,
                                             SvdMethod method = SvdMethod::Gram);

Matrix kronecker(const Matrix& a, const Matrix& b);

}  // namespace ktt

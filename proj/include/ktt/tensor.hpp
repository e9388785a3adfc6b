#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ktt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using index_t = std::int64_t;

class FlopCounter;

/// Dense d-way array. Storage is contiguous with the mode-0 index varying
/// fastest (generalized column-major), so unfolding along mode 0 is a
/// straight reinterpretation of the buffer. Modes are 0-based.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<index_t> dims);
  DenseTensor(std::vector<index_t> dims, std::vector<double> data);

  int order() const { return static_cast<int>(dims_.size()); }
  const std::vector<index_t>& dims() const { return dims_; }
  index_t dim(int mode) const { return dims_.at(static_cast<std::size_t>(mode)); }
  index_t size() const { return static_cast<index_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  index_t flat_index(const std::vector<index_t>& idx) const;
  double at(const std::vector<index_t>& idx) const { return data_[static_cast<std::size_t>(flat_index(idx))]; }
  double& at(const std::vector<index_t>& idx) { return data_[static_cast<std::size_t>(flat_index(idx))]; }

  /// Product of dims strictly below / strictly above / all except `mode`.
  index_t size_left(int mode) const;
  index_t size_right(int mode) const;
  index_t size_other(int mode) const;

 private:
  std::vector<index_t> dims_;
  std::vector<double> data_;
};

/// Tall matrix (rows >= cols) whose columns are expected to be orthonormal.
/// `orthonormal` is set by producers that guarantee it within 1e-10 * cols.
struct FactorMatrix {
  Matrix mat;
  bool orthonormal = false;
};

/// ||F^T F - I||_F
double orthonormality_residual(const Matrix& f);

/// Mode-`mode` unfolding: rows index the given mode, columns enumerate the
/// remaining indices with the lowest surviving mode varying fastest.
Matrix unfold(const DenseTensor& t, int mode);

/// Inverse of unfold.
DenseTensor fold(const Matrix& m, int mode, const std::vector<index_t>& dims);

/// Tensor-times-matrix in one mode: result_(mode) = A * t_(mode), or
/// A^T * t_(mode) when transpose_a is set. Pure function.
DenseTensor ttm(const DenseTensor& t, const Matrix& a, int mode, bool transpose_a = false,
                FlopCounter* counter = nullptr);

struct ModeApplication {
  int mode = 0;
  const Matrix* matrix = nullptr;
  bool transpose = false;
};

enum class ModeOrder {
  DescendingSize,  // largest current mode first, ties by ascending mode index
  AsGiven,
};

/// Order in which to contract `modes` of a tensor with the given dims under
/// the DescendingSize policy.
std::vector<int> plan_mode_order(const std::vector<index_t>& dims, std::vector<int> modes);

/// Apply several TTMs across distinct modes. Modes commute, so any order
/// yields the same result up to roundoff; the default policy contracts the
/// largest mode first for the cheapest chain.
DenseTensor multi_ttm(const DenseTensor& t, const std::vector<ModeApplication>& apps,
                      ModeOrder order = ModeOrder::DescendingSize, FlopCounter* counter = nullptr);

/// Frobenius-type norm over all entries.
double tensor_norm(const DenseTensor& t);

/// Contiguous copy of the index range [start, start+len) along `mode`.
DenseTensor mode_range_slice(const DenseTensor& t, int mode, index_t start, index_t len);

std::string dims_to_string(const std::vector<index_t>& dims);

}  // namespace ktt

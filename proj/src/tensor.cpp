#include "ktt/tensor.hpp"

#include "ktt/flops.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ktt {

namespace {

index_t checked_total(const std::vector<index_t>& dims) {
  if (dims.empty()) throw std::invalid_argument("tensor must have at least one mode");
  index_t total = 1;
  // zero-length modes are allowed so distributed blocks may be empty
  for (index_t n : dims) {
    if (n < 0) throw std::invalid_argument("tensor dimensions must be nonnegative, got " + dims_to_string(dims));
    total *= n;
  }
  return total;
}

void check_mode(const DenseTensor& t, int mode) {
  if (mode < 0 || mode >= t.order())
    throw std::invalid_argument("mode " + std::to_string(mode) + " out of range for order " +
                                std::to_string(t.order()));
}

}  // namespace

DenseTensor::DenseTensor(std::vector<index_t> dims) : dims_(std::move(dims)) {
  data_.assign(static_cast<std::size_t>(checked_total(dims_)), 0.0);
}

DenseTensor::DenseTensor(std::vector<index_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  if (checked_total(dims_) != static_cast<index_t>(data_.size()))
    throw std::invalid_argument("payload size does not match dims " + dims_to_string(dims_));
}

index_t DenseTensor::flat_index(const std::vector<index_t>& idx) const {
  if (idx.size() != dims_.size()) throw std::invalid_argument("index arity mismatch");
  index_t flat = 0, stride = 1;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= dims_[k]) throw std::out_of_range("tensor index out of range");
    flat += idx[k] * stride;
    stride *= dims_[k];
  }
  return flat;
}

index_t DenseTensor::size_left(int mode) const {
  check_mode(*this, mode);
  index_t p = 1;
  for (int k = 0; k < mode; ++k) p *= dims_[static_cast<std::size_t>(k)];
  return p;
}

index_t DenseTensor::size_right(int mode) const {
  check_mode(*this, mode);
  index_t p = 1;
  for (int k = mode + 1; k < order(); ++k) p *= dims_[static_cast<std::size_t>(k)];
  return p;
}

index_t DenseTensor::size_other(int mode) const { return size_left(mode) * size_right(mode); }

double orthonormality_residual(const Matrix& f) {
  Matrix g = f.transpose() * f;
  g.diagonal().array() -= 1.0;
  return g.norm();
}

Matrix unfold(const DenseTensor& t, int mode) {
  check_mode(t, mode);
  const index_t nj = t.dim(mode);
  const index_t left = t.size_left(mode);
  const index_t right = t.size_right(mode);
  Matrix m(nj, left * right);
  const double* src = t.data();
  if (left == 1) {
    // mode-0 unfolding is the raw buffer
    std::memcpy(m.data(), src, sizeof(double) * static_cast<std::size_t>(nj * right));
    return m;
  }
  for (index_t r = 0; r < right; ++r) {
    for (index_t i = 0; i < nj; ++i) {
      const double* run = src + left * (i + nj * r);
      // destination entries (i, left*r + l) for l = 0..left-1, stride nj apart
      double* dst = m.data() + i + nj * left * r;
      for (index_t l = 0; l < left; ++l) dst[l * nj] = run[l];
    }
  }
  return m;
}

DenseTensor fold(const Matrix& m, int mode, const std::vector<index_t>& dims) {
  const index_t total = checked_total(dims);
  if (mode < 0 || mode >= static_cast<int>(dims.size()))
    throw std::invalid_argument("fold: mode out of range");
  const index_t nj = dims[static_cast<std::size_t>(mode)];
  if (m.rows() != nj || m.rows() * m.cols() != total)
    throw std::invalid_argument("fold: matrix shape incompatible with dims " + dims_to_string(dims));
  DenseTensor t(dims);
  double* dst = t.data();
  index_t left = 1;
  for (int k = 0; k < mode; ++k) left *= dims[static_cast<std::size_t>(k)];
  const index_t right = total / (left * nj);
  if (left == 1) {
    std::memcpy(dst, m.data(), sizeof(double) * static_cast<std::size_t>(total));
    return t;
  }
  for (index_t r = 0; r < right; ++r) {
    for (index_t i = 0; i < nj; ++i) {
      const double* colrun = m.data() + i + nj * left * r;
      double* run = dst + left * (i + nj * r);
      for (index_t l = 0; l < left; ++l) run[l] = colrun[l * nj];
    }
  }
  return t;
}

DenseTensor ttm(const DenseTensor& t, const Matrix& a, int mode, bool transpose_a,
                FlopCounter* counter) {
  check_mode(t, mode);
  const index_t nj = t.dim(mode);
  const index_t contract = transpose_a ? a.rows() : a.cols();
  if (contract != nj)
    throw std::invalid_argument("ttm: matrix contraction dimension " + std::to_string(contract) +
                                " does not match mode size " + std::to_string(nj));
  const index_t m = transpose_a ? a.cols() : a.rows();
  std::vector<index_t> out_dims = t.dims();
  out_dims[static_cast<std::size_t>(mode)] = m;
  DenseTensor out(out_dims);

  const index_t left = t.size_left(mode);
  const index_t right = t.size_right(mode);
  if (counter) counter->add(2 * left * right * m * nj);

  if (left == 1) {
    Eigen::Map<const Matrix> x(t.data(), nj, right);
    Eigen::Map<Matrix> y(out.data(), m, right);
    if (transpose_a)
      y.noalias() = a.transpose() * x;
    else
      y.noalias() = a * x;
    return out;
  }
  for (index_t r = 0; r < right; ++r) {
    Eigen::Map<const Matrix> x(t.data() + r * left * nj, left, nj);
    Eigen::Map<Matrix> y(out.data() + r * left * m, left, m);
    if (transpose_a)
      y.noalias() = x * a;
    else
      y.noalias() = x * a.transpose();
  }
  return out;
}

std::vector<int> plan_mode_order(const std::vector<index_t>& dims, std::vector<int> modes) {
  std::sort(modes.begin(), modes.end(), [&](int a, int b) {
    const index_t na = dims[static_cast<std::size_t>(a)];
    const index_t nb = dims[static_cast<std::size_t>(b)];
    if (na != nb) return na > nb;
    return a < b;
  });
  return modes;
}

DenseTensor multi_ttm(const DenseTensor& t, const std::vector<ModeApplication>& apps,
                      ModeOrder order, FlopCounter* counter) {
  std::vector<int> seen;
  for (const auto& app : apps) {
    check_mode(t, app.mode);
    if (app.matrix == nullptr) throw std::invalid_argument("multi_ttm: null matrix");
    if (std::find(seen.begin(), seen.end(), app.mode) != seen.end())
      throw std::invalid_argument("multi_ttm: duplicate mode " + std::to_string(app.mode));
    seen.push_back(app.mode);
  }

  std::vector<int> sequence(apps.size());
  std::iota(sequence.begin(), sequence.end(), 0);
  if (order == ModeOrder::DescendingSize) {
    std::sort(sequence.begin(), sequence.end(), [&](int a, int b) {
      const index_t na = t.dim(apps[static_cast<std::size_t>(a)].mode);
      const index_t nb = t.dim(apps[static_cast<std::size_t>(b)].mode);
      if (na != nb) return na > nb;
      return apps[static_cast<std::size_t>(a)].mode < apps[static_cast<std::size_t>(b)].mode;
    });
  }

  DenseTensor cur = t;
  for (int i : sequence) {
    const auto& app = apps[static_cast<std::size_t>(i)];
    cur = ttm(cur, *app.matrix, app.mode, app.transpose, counter);
  }
  return cur;
}

double tensor_norm(const DenseTensor& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.data(), t.size()).norm();
}

DenseTensor mode_range_slice(const DenseTensor& t, int mode, index_t start, index_t len) {
  check_mode(t, mode);
  if (start < 0 || len < 0 || start + len > t.dim(mode))
    throw std::invalid_argument("mode_range_slice: range out of bounds");
  std::vector<index_t> out_dims = t.dims();
  out_dims[static_cast<std::size_t>(mode)] = len;
  DenseTensor out(out_dims);
  if (len == 0) return out;
  const index_t left = t.size_left(mode);
  const index_t right = t.size_right(mode);
  const index_t nj = t.dim(mode);
  for (index_t r = 0; r < right; ++r) {
    const double* src = t.data() + left * (start + nj * r);
    double* dst = out.data() + left * len * r;
    std::memcpy(dst, src, sizeof(double) * static_cast<std::size_t>(left * len));
  }
  return out;
}

std::string dims_to_string(const std::vector<index_t>& dims) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < dims.size(); ++k) os << (k ? "," : "") << dims[k];
  os << ")";
  return os.str();
}

}  // namespace ktt

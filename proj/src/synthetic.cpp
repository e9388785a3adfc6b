#include "ktt/synthetic.hpp"

#include "ktt/linalg.hpp"
#include "ktt/rng.hpp"
#include "ktt/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ktt {

namespace {

Matrix random_orthogonal(index_t n, index_t cols, RngSpec spec) {
  return thin_qr(gen_gaussian(n, cols, spec)).q;
}

void check_dims(const std::vector<index_t>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("synthetic tensors need order >= 2");
  for (index_t n : dims)
    if (n < 1) throw std::invalid_argument("dims must be positive");
}

}  // namespace

DenseTensor synth_geometric(const std::vector<index_t>& dims, double decay, std::uint64_t seed) {
  check_dims(dims);
  if (decay <= 0.0 || decay >= 1.0) throw std::invalid_argument("decay must lie in (0, 1)");
  const index_t diag_len = *std::min_element(dims.begin(), dims.end());

  DenseTensor t(std::vector<index_t>(dims.size(), diag_len));
  std::vector<index_t> idx(dims.size());
  for (index_t i = 0; i < diag_len; ++i) {
    std::fill(idx.begin(), idx.end(), i);
    t.at(idx) = std::pow(decay, static_cast<double>(i));
  }
  std::vector<Matrix> q(dims.size());
  std::vector<ModeApplication> apps;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    q[j] = random_orthogonal(dims[j], diag_len,
                             {seed, streams::derive(streams::kSynthFactor, j)});
    apps.push_back({static_cast<int>(j), &q[j], false});
  }
  return multi_ttm(t, apps, ModeOrder::AsGiven);
}

DenseTensor synth_lowrank_noise(const std::vector<index_t>& dims,
                                const std::vector<index_t>& true_rank, double noise_rel,
                                std::uint64_t seed) {
  check_dims(dims);
  if (true_rank.size() != dims.size()) throw std::invalid_argument("rank arity mismatch");
  for (std::size_t j = 0; j < dims.size(); ++j)
    if (true_rank[j] < 1 || true_rank[j] > dims[j])
      throw std::invalid_argument("true rank infeasible for dims");
  if (noise_rel < 0.0) throw std::invalid_argument("noise level must be nonnegative");

  index_t core_size = 1;
  for (index_t r : true_rank) core_size *= r;
  Matrix core_draw = gen_gaussian(core_size, 1, {seed, streams::derive(streams::kSynthCore)});
  DenseTensor core(true_rank,
                   std::vector<double>(core_draw.data(), core_draw.data() + core_size));

  std::vector<Matrix> q(dims.size());
  std::vector<ModeApplication> apps;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    q[j] = random_orthogonal(dims[j], true_rank[j],
                             {seed, streams::derive(streams::kSynthFactor, j)});
    apps.push_back({static_cast<int>(j), &q[j], false});
  }
  DenseTensor signal = multi_ttm(core, apps, ModeOrder::AsGiven);
  const double signal_norm = tensor_norm(signal);
  Eigen::Map<Eigen::VectorXd> sig(signal.data(), signal.size());
  sig /= signal_norm;

  if (noise_rel > 0.0) {
    Rng rng({seed, streams::derive(streams::kSynthNoise)});
    std::vector<double> noise(static_cast<std::size_t>(signal.size()));
    for (auto& v : noise) v = rng.gaussian();
    Eigen::Map<Eigen::VectorXd> nz(noise.data(), signal.size());
    sig += (noise_rel / nz.norm()) * nz;
  }
  return signal;
}

DenseTensor synth_exact_lowrank(const std::vector<index_t>& dims, const std::vector<index_t>& rank,
                                std::uint64_t seed) {
  check_dims(dims);
  if (rank.size() != dims.size()) throw std::invalid_argument("rank arity mismatch");
  for (std::size_t j = 0; j < dims.size(); ++j)
    if (rank[j] < 1 || rank[j] > dims[j]) throw std::invalid_argument("rank infeasible for dims");

  index_t core_size = 1;
  for (index_t r : rank) core_size *= r;
  Matrix core_draw = gen_gaussian(core_size, 1, {seed, streams::derive(streams::kSynthCore)});
  DenseTensor core(rank, std::vector<double>(core_draw.data(), core_draw.data() + core_size));

  std::vector<Matrix> f(dims.size());
  std::vector<ModeApplication> apps;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    f[j] = gen_gaussian(dims[j], rank[j], {seed, streams::derive(streams::kSynthFactor, j)});
    apps.push_back({static_cast<int>(j), &f[j], false});
  }
  return multi_ttm(core, apps, ModeOrder::AsGiven);
}

}  // namespace ktt

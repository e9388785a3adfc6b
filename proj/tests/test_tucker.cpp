#include "ktt/synthetic.hpp"
#include "ktt/tucker.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace ktt;

namespace {

// truncating a rotated superdiagonal tensor removes exactly the trailing
// diagonal entries, in every mode at once
double geometric_truncation_error(double decay, index_t diag_len, index_t rank) {
  double kept = 0, all = 0;
  for (index_t i = 0; i < diag_len; ++i) {
    const double v = std::pow(decay, static_cast<double>(i));
    all += v * v;
    if (i >= rank) kept += v * v;
  }
  return std::sqrt(kept / all);
}

}  // namespace

TEST_SUITE("tucker") {

TEST_CASE("deterministic algorithms hit the geometric closed form") {
  const DenseTensor x = synth_geometric({12, 10, 8}, 0.5, 21);
  const double expect = geometric_truncation_error(0.5, 8, 3);
  const double st = relative_error(x, sthosvd(x, {3, 3, 3}));
  const double ho = relative_error(x, hosvd(x, {3, 3, 3}));
  CHECK(st == doctest::Approx(expect).epsilon(1e-9));
  CHECK(ho == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("every algorithm recovers an exactly low-rank tensor") {
  const DenseTensor x = synth_exact_lowrank({16, 12, 14}, {3, 2, 4}, 33);
  TuckerOptions opt;
  opt.oversample = 2;
  opt.seed = 5;
  for (Algorithm alg : all_algorithms()) {
    CAPTURE(algorithm_name(alg));
    TuckerDecomposition t = decompose(alg, x, {3, 2, 4}, opt);
    CHECK(relative_error(x, t) < 1e-8);
    REQUIRE(t.core.dims() == std::vector<index_t>{3, 2, 4});
    for (int j = 0; j < 3; ++j) {
      CHECK(t.factors[static_cast<std::size_t>(j)].orthonormal);
      CHECK(orthonormality_residual(t.factors[static_cast<std::size_t>(j)].mat) < 1e-9);
    }
  }
}

TEST_CASE("the deterministic error lower-bounds every randomized run") {
  const DenseTensor x = synth_geometric({24, 24, 24}, 0.5, 2);
  const std::vector<index_t> rank = {4, 4, 4};
  const double det = relative_error(x, sthosvd(x, rank));
  TuckerOptions opt;
  opt.oversample = 4;
  for (Algorithm alg : randomized_algorithms()) {
    CAPTURE(algorithm_name(alg));
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      opt.seed = mix64(100, trial);
      const double err = relative_error(x, decompose(alg, x, rank, opt));
      CHECK(err + 1e-12 >= det);
      CHECK(err <= 10.0 * det);
    }
  }
}

TEST_CASE("runs are bitwise reproducible from the seed") {
  const DenseTensor x = synth_geometric({16, 16, 16}, 0.6, 9);
  TuckerOptions opt;
  opt.oversample = 3;
  opt.seed = 77;
  for (Algorithm alg : randomized_algorithms()) {
    CAPTURE(algorithm_name(alg));
    TuckerDecomposition a = decompose(alg, x, {3, 3, 3}, opt);
    TuckerDecomposition b = decompose(alg, x, {3, 3, 3}, opt);
    CHECK(a.core.storage() == b.core.storage());
    for (std::size_t j = 0; j < 3; ++j)
      CHECK((a.factors[j].mat - b.factors[j].mat).cwiseAbs().maxCoeff() == 0.0);
    opt.seed = 78;
    TuckerDecomposition c = decompose(alg, x, {3, 3, 3}, opt);
    CHECK(a.core.storage() != c.core.storage());
    opt.seed = 77;
  }
}

TEST_CASE("rand_range_finder captures a planted range") {
  Matrix u = thin_qr(gen_gaussian(30, 3, {4, 1})).q;
  Matrix v = gen_gaussian(25, 3, {4, 2});
  const Matrix m = u * v.transpose();
  const Matrix omega = gen_gaussian(25, 5, {4, 3});
  FactorMatrix q = rand_range_finder(m, omega);
  REQUIRE(q.mat.cols() == 5);
  CHECK(q.orthonormal);
  CHECK((m - q.mat * (q.mat.transpose() * m)).norm() < 1e-10);
}

TEST_CASE("rand_svd recovers an exactly low-rank matrix") {
  Matrix u = thin_qr(gen_gaussian(20, 3, {6, 1})).q;
  Matrix v = thin_qr(gen_gaussian(18, 3, {6, 2})).q;
  Vector s(3);
  s << 5.0, 3.0, 1.0;
  const Matrix m = u * s.asDiagonal() * v.transpose();
  SvdResult svd = rand_svd(m, 3, gen_gaussian(18, 6, {6, 3}));
  CHECK((svd.u * svd.singular_values.asDiagonal() * svd.v.transpose() - m).norm() < 1e-10);
  CHECK((svd.singular_values - s).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("truncate_core recompresses like a sequential direct-SVD pass") {
  const DenseTensor g = ktt_test::random_tensor({6, 7, 5}, 41);
  CoreTruncation tr = truncate_core(g, {3, 3, 3});
  REQUIRE(tr.core.dims() == std::vector<index_t>{3, 3, 3});
  for (const FactorMatrix& rot : tr.rotations) {
    CHECK(rot.orthonormal);
    CHECK(orthonormality_residual(rot.mat) < 1e-10);
  }
  TuckerDecomposition ref = sthosvd(g, {3, 3, 3});
  TuckerDecomposition got;
  got.core = tr.core;
  got.factors = tr.rotations;
  const DenseTensor a = reconstruct(got), b = reconstruct(ref);
  CHECK(ktt_test::rel_diff(a, b) < 1e-12);
}

TEST_CASE("rank_ell_only returns the oversampled stage") {
  const DenseTensor x = synth_geometric({16, 16, 16}, 0.5, 3);
  TuckerOptions opt;
  opt.oversample = 2;
  opt.rank_ell_only = true;
  TuckerDecomposition t = rhosvd(x, {3, 3, 3}, opt);
  CHECK(t.core.dims() == std::vector<index_t>{5, 5, 5});
  CHECK(t.provenance.rank_ell_only);
  // the kron planner may adjust ell upward per mode
  TuckerDecomposition k = rhosvd_kron(x, {3, 3, 3}, opt);
  REQUIRE(k.provenance.plan.subrank_matrix.has_value());
  for (int j = 0; j < 3; ++j)
    CHECK(k.core.dim(j) ==
          k.provenance.plan.subrank_matrix->adjusted_ell[static_cast<std::size_t>(j)]);
}

TEST_CASE("keep_intermediate stores the sketch stage") {
  const DenseTensor x = synth_geometric({16, 16, 16}, 0.5, 3);
  TuckerOptions opt;
  opt.oversample = 2;
  opt.keep_intermediate = true;
  TuckerDecomposition t = rsthosvd(x, {3, 3, 3}, opt);
  REQUIRE(t.sketch_core.has_value());
  REQUIRE(t.sketch_factors.size() == 3);
  CHECK(t.sketch_core->dims() == std::vector<index_t>{5, 5, 5});
  CHECK(t.core.dims() == std::vector<index_t>{3, 3, 3});
  TuckerDecomposition sketch;
  sketch.core = *t.sketch_core;
  sketch.factors = t.sketch_factors;
  // recompression can only lose accuracy relative to the rank-ell stage
  CHECK(relative_error(x, sketch) <= relative_error(x, t) + 1e-12);
}

TEST_CASE("mode_order permutes the sequential sweep") {
  const DenseTensor x = synth_geometric({14, 12, 10}, 0.5, 13);
  TuckerOptions opt;
  opt.oversample = 3;
  opt.seed = 4;
  opt.mode_order = {2, 0, 1};
  TuckerDecomposition t = rsthosvd(x, {3, 3, 3}, opt);
  CHECK(t.provenance.mode_order == std::vector<int>{2, 0, 1});
  CHECK(relative_error(x, t) < 10.0 * geometric_truncation_error(0.5, 10, 3) + 1e-9);
  opt.mode_order = {0, 0, 1};
  CHECK_THROWS(rsthosvd(x, {3, 3, 3}, opt));
}

TEST_CASE("kron sketches record plans and srht fallbacks") {
  TuckerOptions opt;
  opt.oversample = 2;
  opt.distribution = Distribution::Srht;

  // non-sequential variant: every draw contracts an original mode, so on
  // power-of-two input the structured transform is used throughout
  const DenseTensor pow2 = synth_geometric({16, 16, 16}, 0.5, 8);
  TuckerDecomposition a = rhosvd_kron(pow2, {3, 3, 3}, opt);
  CHECK(a.provenance.fallbacks.empty());
  for (const PhiDraw& d : a.provenance.plan.draws) CHECK(d.used == Distribution::Srht);

  // sequential variant: later draws contract modes already shrunk to widths
  // that are not powers of two; those fall back to gaussian, one note each
  TuckerDecomposition b = rsthosvd_kron(pow2, {3, 3, 3}, opt);
  std::size_t gaussians = 0;
  for (const PhiDraw& d : b.provenance.plan.draws) {
    const bool structured_ok = is_power_of_two(d.rows);
    CHECK(d.used == (structured_ok ? Distribution::Srht : Distribution::Gaussian));
    CHECK(d.fallback == !structured_ok);
    if (d.used == Distribution::Gaussian) ++gaussians;
  }
  CHECK(gaussians > 0);
  CHECK(b.provenance.fallbacks.size() == gaussians);

  const DenseTensor odd = synth_geometric({15, 15, 15}, 0.5, 8);
  TuckerDecomposition c = rsthosvd_kron(odd, {3, 3, 3}, opt);
  CHECK(!c.provenance.fallbacks.empty());
  bool any_gaussian = false;
  for (const PhiDraw& d : c.provenance.plan.draws) any_gaussian |= d.used == Distribution::Gaussian;
  CHECK(any_gaussian);
}

TEST_CASE("factor-reuse rejects too-skewed shapes") {
  const DenseTensor x = ktt_test::random_tensor({3, 50, 50}, 15);
  TuckerOptions opt;
  opt.oversample = 1;
  CHECK_THROWS_WITH_AS(rhosvd_kron_reuse(x, {2, 2, 2}, opt),
                       doctest::Contains("too skewed"), std::runtime_error);
}

TEST_CASE("factor reuse gives the same subspaces with and without the shared tree") {
  const DenseTensor x = synth_geometric({12, 12, 12}, 0.5, 30);
  TuckerOptions opt;
  opt.oversample = 3;
  opt.seed = 19;
  opt.use_dimtree = true;
  TuckerDecomposition with_tree = rhosvd_kron_reuse(x, {3, 3, 3}, opt);
  opt.use_dimtree = false;
  TuckerDecomposition without = rhosvd_kron_reuse(x, {3, 3, 3}, opt);
  // same random draws, different contraction order: equal up to roundoff
  const double a = relative_error(x, with_tree);
  const double b = relative_error(x, without);
  CHECK(a == doctest::Approx(b).epsilon(1e-8));
}

TEST_CASE("argument validation throws early") {
  const DenseTensor x = ktt_test::random_tensor({8, 8, 8}, 1);
  CHECK_THROWS(sthosvd(x, {3, 3}));
  CHECK_THROWS(sthosvd(x, {9, 3, 3}));
  CHECK_THROWS(hosvd(x, {0, 3, 3}));
  TuckerOptions opt;
  opt.oversample = 6;
  CHECK_THROWS(rhosvd(x, {3, 3, 3}, opt));  // 3 + 6 > 8
  opt.oversample = -1;
  CHECK_THROWS(rhosvd(x, {3, 3, 3}, opt));
}

TEST_CASE("algorithm names round-trip") {
  for (Algorithm alg : all_algorithms()) {
    auto back = algorithm_from_name(algorithm_name(alg));
    REQUIRE(back.has_value());
    CHECK(*back == alg);
  }
  CHECK(algorithm_from_name("rhosvd_kron") == Algorithm::RhosvdKron);
  CHECK(algorithm_from_name("rhosvd-kron-reuse") == Algorithm::RhosvdKronReuse);
  CHECK(!algorithm_from_name("nope").has_value());
}

}  // TEST_SUITE

#include "ktt/analysis.hpp"
#include "ktt/synthetic.hpp"
#include "ktt/tucker.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace ktt;

TEST_SUITE("synthetic") {

TEST_CASE("geometric tensor has the prescribed norm and spectra") {
  const double decay = 0.4;
  const DenseTensor x = synth_geometric({12, 10, 8}, decay, 5);
  REQUIRE(x.dims() == std::vector<index_t>{12, 10, 8});

  double norm_sq = 0;
  for (index_t i = 0; i < 8; ++i) norm_sq += std::pow(decay, 2.0 * static_cast<double>(i));
  CHECK(tensor_norm(x) == doctest::Approx(std::sqrt(norm_sq)).epsilon(1e-10));

  const SpectralProfile prof = SpectralProfile::of(x);
  for (int j = 0; j < 3; ++j) {
    const Vector& s = prof.mode(j);
    REQUIRE(s.size() == x.dim(j));
    for (index_t i = 0; i < 8; ++i)
      CHECK(s(i) == doctest::Approx(std::pow(decay, static_cast<double>(i))).epsilon(1e-9));
    for (index_t i = 8; i < s.size(); ++i) CHECK(s(i) < 1e-12);
  }
}

TEST_CASE("geometric generator validates decay") {
  CHECK_THROWS(synth_geometric({8, 8}, 0.0, 1));
  CHECK_THROWS(synth_geometric({8, 8}, 1.0, 1));
  CHECK_THROWS(synth_geometric({8}, 0.5, 1));
}

TEST_CASE("noiseless low-rank input is recovered to rounding error") {
  const DenseTensor x = synth_lowrank_noise({14, 12, 10}, {3, 4, 2}, 0.0, 7);
  CHECK(tensor_norm(x) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(relative_error(x, sthosvd(x, {3, 4, 2})) < 1e-10);
}

TEST_CASE("the noise level sets the error floor at the true rank") {
  const DenseTensor x = synth_lowrank_noise({30, 30, 30}, {5, 5, 5}, 1e-4, 7);
  const double at_rank = relative_error(x, sthosvd(x, {5, 5, 5}));
  CHECK(at_rank >= 0.5e-4);
  CHECK(at_rank <= 5e-4);
  // below the true rank the signal itself dominates the error
  const double below = relative_error(x, sthosvd(x, {3, 3, 3}));
  CHECK(below > 10.0 * at_rank);
}

TEST_CASE("exact low-rank spectra cut off sharply") {
  const DenseTensor x = synth_exact_lowrank({15, 12, 9}, {4, 3, 2}, 11);
  const SpectralProfile prof = SpectralProfile::of(x);
  const std::vector<index_t> rank = {4, 3, 2};
  for (int j = 0; j < 3; ++j) {
    const Vector& s = prof.mode(j);
    const index_t r = rank[static_cast<std::size_t>(j)];
    CHECK(s(r - 1) > 1e-12 * s(0));
    for (index_t i = r; i < s.size(); ++i) CHECK(s(i) <= 1e-12 * s(0));
  }
  CHECK(relative_error(x, sthosvd(x, rank)) < 1e-10);
}

TEST_CASE("generators are reproducible from the seed") {
  const DenseTensor a = synth_exact_lowrank({8, 8, 8, 8}, {2, 2, 2, 2}, 42);
  const DenseTensor b = synth_exact_lowrank({8, 8, 8, 8}, {2, 2, 2, 2}, 42);
  const DenseTensor c = synth_exact_lowrank({8, 8, 8, 8}, {2, 2, 2, 2}, 43);
  CHECK(a.storage() == b.storage());
  CHECK(a.storage() != c.storage());
  const DenseTensor g1 = synth_geometric({10, 10}, 0.5, 9);
  const DenseTensor g2 = synth_geometric({10, 10}, 0.5, 9);
  CHECK(g1.storage() == g2.storage());
  const DenseTensor n1 = synth_lowrank_noise({10, 10}, {2, 2}, 1e-3, 9);
  const DenseTensor n2 = synth_lowrank_noise({10, 10}, {2, 2}, 1e-3, 9);
  CHECK(n1.storage() == n2.storage());
}

TEST_CASE("rank validation") {
  CHECK_THROWS(synth_lowrank_noise({8, 8}, {9, 2}, 0.0, 1));
  CHECK_THROWS(synth_lowrank_noise({8, 8}, {2}, 0.0, 1));
  CHECK_THROWS(synth_lowrank_noise({8, 8}, {2, 2}, -1.0, 1));
  CHECK_THROWS(synth_exact_lowrank({8, 8}, {0, 2}, 1));
}

}  // TEST_SUITE

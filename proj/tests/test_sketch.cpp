#include "ktt/rng.hpp"
#include "ktt/sketch.hpp"

#include <doctest.h>

#include <cmath>

using namespace ktt;

namespace {

// every row-plan constraint, checked from first principles
void check_row_plan(const SubrankRow& row, const std::vector<index_t>& dims, int mode,
                    index_t ell_base, index_t max_adjust) {
  const int d = static_cast<int>(dims.size());
  REQUIRE(static_cast<int>(row.s.size()) == d);
  CHECK(row.s[static_cast<std::size_t>(mode)] == 1);
  index_t prod = 1;
  bool needs_two = row.adjusted_ell >= (index_t{1} << (d - 1));
  for (int k = 0; k < d; ++k) {
    if (k == mode) continue;
    const index_t s = row.s[static_cast<std::size_t>(k)];
    CHECK(s >= 1);
    CHECK(s <= dims[static_cast<std::size_t>(k)]);
    if (needs_two && d > 2) CHECK(s >= 2);
    prod *= s;
  }
  CHECK(prod == row.adjusted_ell);
  CHECK(row.adjusted_ell >= ell_base);
  CHECK(row.adjusted_ell <= ell_base + max_adjust);
  CHECK(row.adjusted_ell <= dims[static_cast<std::size_t>(mode)]);
}

// brute force: can `remaining` split into per-mode factors within the caps?
bool assignable(index_t remaining, std::size_t k, const std::vector<index_t>& dims, int mode,
                index_t min_factor) {
  if (k == dims.size()) return remaining == 1;
  if (static_cast<int>(k) == mode) return assignable(remaining, k + 1, dims, mode, min_factor);
  for (index_t f = min_factor; f <= std::min(remaining, dims[k]); ++f)
    if (remaining % f == 0 && assignable(remaining / f, k + 1, dims, mode, min_factor)) return true;
  return false;
}

// exhaustive replay of the window the planner is allowed to search
bool window_feasible(const std::vector<index_t>& dims, int mode, index_t ell_base,
                     index_t max_adjust) {
  const int d = static_cast<int>(dims.size());
  for (index_t ell = ell_base; ell <= ell_base + max_adjust; ++ell) {
    if (ell > dims[static_cast<std::size_t>(mode)]) break;
    const index_t min_factor = ell >= (index_t{1} << (d - 1)) ? 2 : 1;
    if (assignable(ell, 0, dims, mode, min_factor)) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("sketch") {

TEST_CASE("gen_gaussian is deterministic with the expected shape") {
  const Matrix a = gen_gaussian(6, 3, {9, 1});
  const Matrix b = gen_gaussian(6, 3, {9, 1});
  const Matrix c = gen_gaussian(6, 3, {9, 2});
  REQUIRE(a.rows() == 6);
  REQUIRE(a.cols() == 3);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a - c).cwiseAbs().maxCoeff() != 0.0);
}

TEST_CASE("srht columns are exactly orthonormal with flat magnitudes") {
  for (index_t n : {index_t{8}, index_t{16}, index_t{64}, index_t{256}}) {
    const index_t s = std::min<index_t>(n, 7);
    const Matrix phi = gen_srht(n, s, {11, static_cast<std::uint64_t>(n)});
    REQUIRE(phi.rows() == n);
    REQUIRE(phi.cols() == s);
    const double mag = 1.0 / std::sqrt(static_cast<double>(n));
    for (index_t i = 0; i < n; ++i)
      for (index_t j = 0; j < s; ++j) CHECK(std::abs(phi(i, j)) == doctest::Approx(mag).epsilon(1e-15));
    const Matrix gram = phi.transpose() * phi;
    CHECK((gram - Matrix::Identity(s, s)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("srht rejects impossible shapes") {
  CHECK_THROWS(gen_srht(12, 3, {1, 1}));  // rows not a power of two
  CHECK_THROWS(gen_srht(8, 9, {1, 1}));   // more columns than distinct samples
}

TEST_CASE("distribution resolution prefers srht only on power-of-two modes") {
  CHECK(resolve_distribution(Distribution::Auto, {16, 32, 8}) == Distribution::Srht);
  CHECK(resolve_distribution(Distribution::Auto, {16, 30, 8}) == Distribution::Gaussian);
  CHECK(resolve_distribution(Distribution::Gaussian, {16, 32, 8}) == Distribution::Gaussian);
  CHECK(resolve_distribution(Distribution::Srht, {16, 30, 8}) == Distribution::Srht);
  CHECK(is_power_of_two(64));
  CHECK(!is_power_of_two(48));
  CHECK(!is_power_of_two(0));
}

TEST_CASE("draw_sketch_matrix falls back to gaussian off powers of two") {
  DrawResult ok = draw_sketch_matrix(Distribution::Srht, 16, 4, {1, 1});
  CHECK(ok.used == Distribution::Srht);
  CHECK(!ok.fallback);
  DrawResult fb = draw_sketch_matrix(Distribution::Srht, 12, 4, {1, 1});
  CHECK(fb.used == Distribution::Gaussian);
  CHECK(fb.fallback);
  REQUIRE(fb.phi.rows() == 12);
}

TEST_CASE("row planner picks the most balanced factor pair") {
  // 507 = 13*39 beats 3*169; 510 = 17*30; 366 = 6*61
  SUBCASE("507") {
    SubrankRow row = plan_subrank_row({600, 600, 600}, 0, 507);
    CHECK(row.adjusted_ell == 507);
    CHECK(row.s == std::vector<index_t>{1, 13, 39});
  }
  SUBCASE("510") {
    SubrankRow row = plan_subrank_row({600, 600, 600}, 1, 510);
    CHECK(row.adjusted_ell == 510);
    CHECK(row.s == std::vector<index_t>{17, 1, 30});
  }
  SUBCASE("366") {
    SubrankRow row = plan_subrank_row({600, 600, 600}, 2, 366);
    CHECK(row.adjusted_ell == 366);
    CHECK(row.s == std::vector<index_t>{6, 61, 1});
  }
}

TEST_CASE("row planner walks the window past infeasible targets") {
  // 5 >= 2^(d-1) forces both factors >= 2, so the prime 5 bumps to 6 = 2*3
  SubrankRow row = plan_subrank_row({10, 10, 10}, 0, 5);
  CHECK(row.adjusted_ell == 6);
  CHECK(row.s == std::vector<index_t>{1, 2, 3});
}

TEST_CASE("row planner permutes factors around capacity limits") {
  // 30: balanced (5,6) cannot sit on a capacity-4 mode, (3,10) can
  SubrankRow row = plan_subrank_row({4, 100, 100}, 1, 30);
  CHECK(row.adjusted_ell == 30);
  CHECK(row.s == std::vector<index_t>{3, 1, 10});
}

TEST_CASE("row planner handles two-mode tensors") {
  SubrankRow row = plan_subrank_row({50, 40}, 0, 7);
  CHECK(row.adjusted_ell == 7);
  CHECK(row.s == std::vector<index_t>{1, 7});
}

TEST_CASE("row plans satisfy every constraint across random shapes") {
  Rng rng({77, 1});
  int planned = 0, rejected = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 2 + static_cast<int>(rng.below(3));
    std::vector<index_t> dims;
    for (int k = 0; k < d; ++k) dims.push_back(20 + rng.below(80));
    const int mode = static_cast<int>(rng.below(d));
    const index_t base = 2 + rng.below(std::min<index_t>(60, dims[static_cast<std::size_t>(mode)] - 1));
    CAPTURE(trial);
    if (window_feasible(dims, mode, base, 16)) {
      SubrankRow row = plan_subrank_row(dims, mode, base);
      check_row_plan(row, dims, mode, base, 16);
      ++planned;
    } else {
      // e.g. two-mode tensors whose other mode is smaller than the window
      CHECK_THROWS_AS(plan_subrank_row(dims, mode, base), std::runtime_error);
      ++rejected;
    }
  }
  CHECK(planned > 0);
  CHECK(rejected > 0);
}

TEST_CASE("matrix planner delegates row by row") {
  const std::vector<index_t> dims = {30, 40, 50};
  const std::vector<index_t> ranks = {5, 6, 7};
  SubrankMatrix m = plan_subrank_matrix(dims, ranks, 3);
  REQUIRE(m.s.size() == 3);
  REQUIRE(m.adjusted_ell.size() == 3);
  for (int j = 0; j < 3; ++j) {
    SubrankRow row = plan_subrank_row(dims, j, ranks[static_cast<std::size_t>(j)] + 3);
    CHECK(m.s[static_cast<std::size_t>(j)] == row.s);
    CHECK(m.adjusted_ell[static_cast<std::size_t>(j)] == row.adjusted_ell);
    CHECK(m.s[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] == 1);
  }
}

TEST_CASE("vector planner finds the smallest shared sketch sizes") {
  SUBCASE("symmetric") {
    SubrankVector v = plan_subrank_vector({10, 10, 10}, 5, {100, 100, 100});
    CHECK(v.s == std::vector<index_t>{4, 4, 4});
  }
  SUBCASE("asymmetric") {
    SubrankVector v = plan_subrank_vector({3, 4, 5}, 1, {100, 100, 100});
    CHECK(v.s == std::vector<index_t>{3, 3, 2});
  }
  SUBCASE("minimality") {
    SubrankVector v = plan_subrank_vector({7, 9, 11}, 4, {100, 100, 100});
    const index_t d = 3;
    const std::vector<index_t> ell = {11, 13, 15};
    double prod = 1;
    for (index_t e : ell) prod *= static_cast<double>(e);
    for (std::size_t i = 0; i < 3; ++i) {
      const double hit = std::pow(static_cast<double>(v.s[i] * ell[i]), static_cast<double>(d - 1));
      CHECK(hit >= prod);
      if (v.s[i] > 1) {
        const double miss =
            std::pow(static_cast<double>((v.s[i] - 1) * ell[i]), static_cast<double>(d - 1));
        CHECK(miss < prod);
      }
    }
  }
}

}  // TEST_SUITE

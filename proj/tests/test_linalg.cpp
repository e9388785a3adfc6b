#include "ktt/linalg.hpp"
#include "ktt/sketch.hpp"

#include <doctest.h>

using namespace ktt;

TEST_SUITE("linalg") {

TEST_CASE("thin_qr produces an orthonormal Q and nonnegative-diagonal R") {
  const Matrix m = gen_gaussian(10, 4, {1, 1});
  QrResult qr = thin_qr(m);
  REQUIRE(qr.q.rows() == 10);
  REQUIRE(qr.q.cols() == 4);
  REQUIRE(qr.r.rows() == 4);
  CHECK(orthonormality_residual(qr.q) < 1e-13);
  CHECK((qr.q * qr.r - m).cwiseAbs().maxCoeff() < 1e-13);
  for (index_t i = 0; i < 4; ++i) {
    CHECK(qr.r(i, i) >= 0.0);
    for (index_t j = 0; j < i; ++j) CHECK(qr.r(i, j) == 0.0);
  }
  CHECK_THROWS(thin_qr(gen_gaussian(3, 5, {1, 2})));
}

TEST_CASE("thin_svd reconstructs and orders singular values") {
  const Matrix m = gen_gaussian(8, 5, {2, 1});
  SvdResult svd = thin_svd(m);
  const Matrix back = svd.u * svd.singular_values.asDiagonal() * svd.v.transpose();
  CHECK((back - m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(orthonormality_residual(svd.u) < 1e-13);
  CHECK(orthonormality_residual(svd.v) < 1e-13);
  for (index_t i = 0; i + 1 < svd.singular_values.size(); ++i)
    CHECK(svd.singular_values(i) >= svd.singular_values(i + 1));
  // deterministic sign convention: dominant entry of each left vector positive
  for (index_t j = 0; j < svd.u.cols(); ++j) {
    index_t arg = 0;
    svd.u.col(j).cwiseAbs().maxCoeff(&arg);
    CHECK(svd.u(arg, j) > 0.0);
  }
}

TEST_CASE("leading_left_singular_vectors agrees between methods") {
  // well-separated spectrum so the Gram route keeps full accuracy
  Matrix u = thin_qr(gen_gaussian(20, 4, {3, 1})).q;
  Matrix v = thin_qr(gen_gaussian(15, 4, {3, 2})).q;
  Vector s(4);
  s << 8.0, 4.0, 2.0, 1.0;
  const Matrix m = u * s.asDiagonal() * v.transpose();

  LeadingVectors gram = leading_left_singular_vectors(m, 3, SvdMethod::Gram);
  LeadingVectors direct = leading_left_singular_vectors(m, 3, SvdMethod::Direct);
  REQUIRE(gram.u.cols() == 3);
  CHECK((gram.singular_values - direct.singular_values).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((gram.u - direct.u).cwiseAbs().maxCoeff() < 1e-7);
  CHECK((direct.singular_values - s.head(3)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(orthonormality_residual(gram.u) < 1e-10);
  CHECK_THROWS(leading_left_singular_vectors(m, 25));
}

TEST_CASE("kronecker lays out blocks of a times b") {
  Matrix a(2, 2), b(2, 3);
  a << 1, 2, 3, 4;
  b << 5, 6, 7, 8, 9, 10;
  const Matrix k = kronecker(a, b);
  REQUIRE(k.rows() == 4);
  REQUIRE(k.cols() == 6);
  for (index_t i = 0; i < 2; ++i)
    for (index_t j = 0; j < 2; ++j)
      for (index_t p = 0; p < 2; ++p)
        for (index_t q = 0; q < 3; ++q) CHECK(k(2 * i + p, 3 * j + q) == a(i, j) * b(p, q));
}

}  // TEST_SUITE

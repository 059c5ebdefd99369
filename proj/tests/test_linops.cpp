#include <cmath>
#include <cstring>

#include "doctest.h"
#include "flexikry/linops.hpp"
#include "oracles.hpp"

using namespace flexikry;

namespace {

double adjoint_gap(const LinearOperator& op, oracle::Rng& rng) {
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Vector x = rng.vector(op.cols()), y = rng.vector(op.rows());
    const Vector ax = op.apply(x);
    const double gap = std::abs(ax.dot(y) - x.dot(op.apply_adjoint(y)));
    worst = std::max(worst, gap / (ax.norm() * y.norm()));
  }
  return worst;
}

}  // namespace

TEST_SUITE("linops") {

TEST_CASE("blur 1d with zero bandwidth is the identity") {
  const Matrix d = gaussian_blur_1d(3, 1.0, 0).to_dense();
  CHECK((d - Matrix::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("blur 1d interior row matches the hand-evaluated kernel") {
  const Matrix d = gaussian_blur_1d(3, 1.0, 1).to_dense();
  const double e = std::exp(-0.5), c = 1.0 / (1.0 + 2.0 * e);
  CHECK(d(1, 0) == doctest::Approx(c * e).epsilon(1e-15));
  CHECK(d(1, 1) == doctest::Approx(c).epsilon(1e-15));
  CHECK(d(1, 2) == doctest::Approx(c * e).epsilon(1e-15));
  CHECK(d(1, 0) == doctest::Approx(0.2741).epsilon(1e-4));
  CHECK(d(1, 1) == doctest::Approx(0.4519).epsilon(1e-4));
}

TEST_CASE("blur 1d preserves constants in the interior only") {
  const Vector y = gaussian_blur_1d(5, 1.0, 1).apply(Vector::Ones(5));
  for (Index i = 1; i < 4; ++i) CHECK(y[i] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y[0] < 1.0);
  CHECK(y[4] < 1.0);
}

TEST_CASE("blur 1d matches the dense kernel oracle") {
  const Matrix d = gaussian_blur_1d(12, 1.7, 4).to_dense();
  CHECK(oracle::rel_diff(d, oracle::dense_blur_1d(12, 1.7, 4)) < 1e-15);
}

TEST_CASE("blur rejects a bandwidth that reaches the array size") {
  CHECK_THROWS_AS(gaussian_blur_1d(3, 1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_blur_2d(4, 8, 1.0, 4), std::invalid_argument);
}

TEST_CASE("blur 2d with zero bandwidth is the identity") {
  CHECK((gaussian_blur_2d(2, 2, 1.0, 0).to_dense() - Matrix::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("blur 2d of an interior delta is the outer product of the kernels") {
  const Index n = 8, bw = 2;
  const LinearOperator a = gaussian_blur_2d(n, n, 1.3, bw);
  Vector delta = Vector::Zero(n * n);
  delta[4 * n + 3] = 1.0;
  const Vector y = a.apply(delta);
  const Vector g = gaussian_kernel(1.3, bw);
  for (Index r = 0; r < n; ++r) {
    for (Index c = 0; c < n; ++c) {
      const Index dr = r - 4, dc = c - 3;
      const double expect = (std::abs(dr) <= bw && std::abs(dc) <= bw) ? g[dr + bw] * g[dc + bw] : 0.0;
      CHECK(y[r * n + c] == doctest::Approx(expect).epsilon(1e-15));
    }
  }
  CHECK(oracle::rel_diff(a.to_dense(), oracle::dense_kron(oracle::dense_blur_1d(n, 1.3, bw),
                                                          oracle::dense_blur_1d(n, 1.3, bw))) < 1e-14);
}

TEST_CASE("adjoint probes hold for every concrete operator") {
  oracle::Rng rng(11);
  CHECK(adjoint_gap(gaussian_blur_2d(16, 16, 1.0, 4), rng) <= 1e-12);
  CHECK(adjoint_gap(gaussian_blur_1d(30, 2.0, 7), rng) <= 1e-12);
  CHECK(adjoint_gap(kron(gaussian_blur_1d(5, 1.0, 2), gaussian_blur_2d(6, 6, 1.0, 3)), rng) <= 1e-12);
  CHECK(adjoint_gap(select_rows(LinearOperator::from_dense(rng.matrix(9, 7)), {0, 3, 8}), rng) <= 1e-12);
  CHECK(adjoint_gap(compose(LinearOperator::from_dense(rng.matrix(4, 6)),
                            LinearOperator::from_dense(rng.matrix(6, 5))), rng) <= 1e-12);
}

TEST_CASE("kron of scalars multiplies them") {
  const LinearOperator k = kron(LinearOperator::from_dense(Matrix::Constant(1, 1, 2.0)),
                                LinearOperator::from_dense(Matrix::Constant(1, 1, 3.0)));
  CHECK(k.to_dense()(0, 0) == 6.0);
}

TEST_CASE("kron agrees with the dense Kronecker product") {
  oracle::Rng rng(3);
  const Matrix b = rng.matrix(2, 2);
  const LinearOperator k = kron(LinearOperator::identity(2), LinearOperator::from_dense(b));
  Matrix block = Matrix::Zero(4, 4);
  block.topLeftCorner(2, 2) = b;
  block.bottomRightCorner(2, 2) = b;
  CHECK((k.to_dense() - block).cwiseAbs().maxCoeff() <= 1e-13);

  for (int t = 0; t < 20; ++t) {
    const Index ar = rng.integer(1, 4), ac = rng.integer(1, 4), br = rng.integer(1, 4), bc = rng.integer(1, 4);
    const Matrix ma = rng.matrix(ar, ac), mb = rng.matrix(br, bc);
    const LinearOperator op = kron(LinearOperator::from_dense(ma), LinearOperator::from_dense(mb));
    const Matrix expect = oracle::dense_kron(ma, mb);
    CHECK((op.to_dense() - expect).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((op.transpose().to_dense() - expect.transpose()).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("forward application is deterministic") {
  const LinearOperator a = gaussian_blur_2d(10, 10, 1.5, 3);
  oracle::Rng rng(5);
  const Vector x = rng.vector(100);
  const Vector y1 = a.apply(x), y2 = a.apply(x);
  CHECK(std::memcmp(y1.data(), y2.data(), sizeof(double) * 100) == 0);
}

TEST_CASE("covariance kernel values") {
  CHECK(covariance_kernel(0.0, 2.0) == 1.0);
  CHECK(covariance_kernel(2.0, 2.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(covariance_kernel(1.0, 2.0) == doctest::Approx(0.3125).epsilon(1e-15));
  CHECK(covariance_kernel(5.0, 2.0) == 0.0);
  CHECK_THROWS_AS(covariance_kernel(-1.0, 2.0), std::invalid_argument);
}

TEST_CASE("covariance matrices") {
  Matrix one(1, 1);
  one << 0.0;
  CHECK(build_covariance(one, 1.0, DistanceMetric::euclidean).as_linear_operator().to_dense()(0, 0) == 1.0);

  Matrix far(2, 1);
  far << 0.0, 10.0;
  CHECK((build_covariance(far, 3.0, DistanceMetric::euclidean).as_linear_operator().to_dense() -
         Matrix::Identity(2, 2)).norm() == 0.0);

  Matrix days(3, 1);
  days << 0.0, 1.0, 2.0;
  const Matrix c = covariance_matrix(days, 9.854, DistanceMetric::time_days);
  CHECK(c(0, 1) == covariance_kernel(1.0, 9.854));
  CHECK(c(0, 2) == covariance_kernel(2.0, 9.854));
  CHECK(c(1, 2) == covariance_kernel(1.0, 9.854));
  CHECK(c.diagonal() == Vector::Ones(3));

  Matrix dup(2, 1);
  dup << 1.0, 1.0;
  CHECK_THROWS_AS(build_covariance(dup, 3.0, DistanceMetric::euclidean), DegenerateConfiguration);
}

TEST_CASE("great-circle covariance is exactly symmetric and positive definite") {
  Matrix pts(25, 2);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j) pts.row(i * 5 + j) << 40.0 + double(i), -100.0 + double(j);
  const Matrix c = covariance_matrix(pts, 555.42, DistanceMetric::spherical_great_circle);
  CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const SpdOperator q = build_covariance(pts, 555.42, DistanceMetric::spherical_great_circle);
  oracle::Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const Vector x = rng.vector(25), y = rng.vector(25);
    CHECK(q.apply(x).dot(x) > 0.0);
    CHECK(std::abs(q.apply(x).dot(y) - x.dot(q.apply(y))) <= 1e-12 * q.apply(x).norm() * y.norm());
    CHECK(oracle::rel_diff(q.apply_inverse(q.apply(x)), x) < 1e-10);
  }
  const Vector l = q.apply_factor(Vector::Unit(25, 3));
  CHECK(l.allFinite());
}

TEST_CASE("kron of SPD operators") {
  oracle::Rng rng(21);
  const Matrix a = rng.spd(3), b = rng.spd(4);
  const SpdOperator k = SpdOperator::kron(SpdOperator::dense(a), SpdOperator::dense(b));
  const Matrix expect = oracle::dense_kron(a, b);
  CHECK(oracle::rel_diff(k.as_linear_operator().to_dense(), expect) < 1e-13);
  const Vector x = rng.vector(12);
  CHECK(oracle::rel_diff(k.apply_inverse(x), Vector(expect.ldlt().solve(x))) < 1e-10);
  // Factor columns from unit vectors must reassemble M.
  Matrix l(12, 12);
  for (Index j = 0; j < 12; ++j) l.col(j) = k.apply_factor(Vector::Unit(12, j));
  CHECK(oracle::rel_diff(Matrix(l * l.transpose()), expect) < 1e-12);
}

}  // TEST_SUITE

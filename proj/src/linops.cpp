#include "flexikry/linops.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace flexikry {

LinearOperator::LinearOperator(Index rows, Index cols, Map forward, Map adjoint)
    : rows_(rows), cols_(cols), forward_(std::move(forward)), adjoint_(std::move(adjoint)) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("LinearOperator: dimensions must be positive");
  }
  if (!forward_) {
    throw std::invalid_argument("LinearOperator: forward map is required");
  }
}

Vector LinearOperator::apply(const Vector& x) const {
  if (x.size() != cols_) {
    throw std::invalid_argument("LinearOperator::apply: expected length " + std::to_string(cols_) +
                                ", got " + std::to_string(x.size()));
  }
  return forward_(x);
}

Vector LinearOperator::apply_adjoint(const Vector& y) const {
  if (!adjoint_) {
    throw std::logic_error("LinearOperator::apply_adjoint: operator has no adjoint");
  }
  if (y.size() != rows_) {
    throw std::invalid_argument("LinearOperator::apply_adjoint: expected length " +
                                std::to_string(rows_) + ", got " + std::to_string(y.size()));
  }
  return adjoint_(y);
}

LinearOperator LinearOperator::transpose() const {
  if (!adjoint_) {
    throw std::logic_error("LinearOperator::transpose: operator has no adjoint");
  }
  return LinearOperator(cols_, rows_, adjoint_, forward_);
}

Matrix LinearOperator::to_dense() const {
  Matrix m(rows_, cols_);
  Vector e = Vector::Zero(cols_);
  for (Index j = 0; j < cols_; ++j) {
    e[j] = 1.0;
    m.col(j) = apply(e);
    e[j] = 0.0;
  }
  return m;
}

LinearOperator LinearOperator::identity(Index n) {
  auto id = [](const Vector& x) { return x; };
  return LinearOperator(n, n, id, id);
}

LinearOperator LinearOperator::from_dense(Matrix m) {
  auto mat = std::make_shared<const Matrix>(std::move(m));
  return LinearOperator(
      mat->rows(), mat->cols(), [mat](const Vector& x) -> Vector { return *mat * x; },
      [mat](const Vector& y) -> Vector { return mat->transpose() * y; });
}

LinearOperator LinearOperator::diagonal(Vector d) {
  auto diag = std::make_shared<const Vector>(std::move(d));
  auto f = [diag](const Vector& x) -> Vector { return diag->cwiseProduct(x); };
  return LinearOperator(diag->size(), diag->size(), f, f);
}

LinearOperator compose(const LinearOperator& a, const LinearOperator& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("compose: inner dimensions do not match");
  }
  LinearOperator::Map adjoint;
  if (a.has_adjoint() && b.has_adjoint()) {
    adjoint = [a, b](const Vector& y) { return b.apply_adjoint(a.apply_adjoint(y)); };
  }
  return LinearOperator(
      a.rows(), b.cols(), [a, b](const Vector& x) { return a.apply(b.apply(x)); }, adjoint);
}

// ---------------------------------------------------------------------------

SpdOperator::SpdOperator(Index dim, Map apply, Map apply_inverse)
    : dim_(dim), apply_(std::move(apply)), inverse_(std::move(apply_inverse)) {
  if (dim <= 0) throw std::invalid_argument("SpdOperator: dimension must be positive");
  if (!apply_) throw std::invalid_argument("SpdOperator: apply map is required");
}

Vector SpdOperator::apply(const Vector& x) const {
  if (x.size() != dim_) throw std::invalid_argument("SpdOperator::apply: length mismatch");
  return apply_(x);
}

Vector SpdOperator::apply_inverse(const Vector& x) const {
  if (!inverse_) throw std::logic_error("SpdOperator::apply_inverse: no inverse available");
  if (x.size() != dim_) throw std::invalid_argument("SpdOperator::apply_inverse: length mismatch");
  return inverse_(x);
}

Vector SpdOperator::apply_factor(const Vector& x) const {
  if (!factor_) throw std::logic_error("SpdOperator::apply_factor: no factor available");
  if (x.size() != dim_) throw std::invalid_argument("SpdOperator::apply_factor: length mismatch");
  return factor_(x);
}

LinearOperator SpdOperator::as_linear_operator() const {
  return LinearOperator(dim_, dim_, apply_, apply_);
}

SpdOperator SpdOperator::dense(Matrix m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SpdOperator::dense: matrix not square");
  auto mat = std::make_shared<const Matrix>(std::move(m));
  auto llt = std::make_shared<Eigen::LLT<Matrix>>(*mat);
  if (llt->info() != Eigen::Success) {
    throw DegenerateConfiguration("SpdOperator::dense: matrix is not positive definite");
  }
  // A successful LLT can still hide a numerically singular factor.
  const Vector diag = llt->matrixL().toDenseMatrix().diagonal();
  if (diag.minCoeff() <= 1e-12 * diag.maxCoeff()) {
    throw DegenerateConfiguration("SpdOperator::dense: matrix is numerically singular");
  }
  SpdOperator op(
      mat->rows(), [mat](const Vector& x) -> Vector { return *mat * x; },
      [llt](const Vector& x) -> Vector { return llt->solve(x); });
  op.factor_ = [llt](const Vector& x) -> Vector { return llt->matrixL() * x; };
  return op;
}

SpdOperator SpdOperator::scaled_identity(Index n, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("SpdOperator::scaled_identity: scale must be > 0");
  SpdOperator op(
      n, [scale](const Vector& x) -> Vector { return scale * x; },
      [scale](const Vector& x) -> Vector { return x / scale; });
  const double root = std::sqrt(scale);
  op.factor_ = [root](const Vector& x) -> Vector { return root * x; };
  return op;
}

SpdOperator SpdOperator::scaled(const SpdOperator& a, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("SpdOperator::scaled: scale must be > 0");
  Map inv;
  if (a.has_inverse()) {
    inv = [a, scale](const Vector& x) -> Vector { return a.apply_inverse(x) / scale; };
  }
  SpdOperator op(a.dim(), [a, scale](const Vector& x) -> Vector { return scale * a.apply(x); },
                 inv);
  if (a.has_factor()) {
    const double root = std::sqrt(scale);
    op.factor_ = [a, root](const Vector& x) -> Vector { return root * a.apply_factor(x); };
  }
  return op;
}

SpdOperator SpdOperator::kron(const SpdOperator& a, const SpdOperator& b) {
  const LinearOperator prod = flexikry::kron(a.as_linear_operator(), b.as_linear_operator());
  Map inv;
  if (a.has_inverse() && b.has_inverse()) {
    const LinearOperator ai(a.dim(), a.dim(), a.inverse_, a.inverse_);
    const LinearOperator bi(b.dim(), b.dim(), b.inverse_, b.inverse_);
    const LinearOperator k = flexikry::kron(ai, bi);
    inv = [k](const Vector& x) { return k.apply(x); };
  }
  SpdOperator op(a.dim() * b.dim(), [prod](const Vector& x) { return prod.apply(x); }, inv);
  if (a.has_factor() && b.has_factor()) {
    const LinearOperator af(a.dim(), a.dim(), a.factor_);
    const LinearOperator bf(b.dim(), b.dim(), b.factor_);
    const LinearOperator k = flexikry::kron(af, bf);
    op.factor_ = [k](const Vector& x) { return k.apply(x); };
  }
  return op;
}

// ---------------------------------------------------------------------------

Vector gaussian_kernel(double sigma, Index bandwidth) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
  if (bandwidth < 0) throw std::invalid_argument("gaussian_kernel: bandwidth must be >= 0");
  Vector g(2 * bandwidth + 1);
  for (Index j = -bandwidth; j <= bandwidth; ++j) {
    const double t = static_cast<double>(j);
    g[j + bandwidth] = std::exp(-t * t / (2.0 * sigma * sigma));
  }
  g /= g.sum();
  return g;
}

LinearOperator gaussian_blur_1d(Index n, double sigma, Index bandwidth) {
  if (n <= 0) throw std::invalid_argument("gaussian_blur_1d: n must be positive");
  if (bandwidth >= n) {
    throw std::invalid_argument("gaussian_blur_1d: bandwidth must be smaller than n");
  }
  auto taps = std::make_shared<const Vector>(gaussian_kernel(sigma, bandwidth));
  // Symmetric Toeplitz: the adjoint is the same map.
  auto f = [taps, n, bandwidth](const Vector& x) -> Vector {
    Vector y = Vector::Zero(n);
    const Vector& g = *taps;
    for (Index i = 0; i < n; ++i) {
      const Index lo = std::max<Index>(-bandwidth, -i);
      const Index hi = std::min<Index>(bandwidth, n - 1 - i);
      double acc = 0.0;
      for (Index j = lo; j <= hi; ++j) acc += g[j + bandwidth] * x[i + j];
      y[i] = acc;
    }
    return y;
  };
  return LinearOperator(n, n, f, f);
}

LinearOperator gaussian_blur_2d(Index rows, Index cols, double sigma, Index bandwidth) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("gaussian_blur_2d: empty image");
  if (bandwidth >= std::min(rows, cols)) {
    throw std::invalid_argument("gaussian_blur_2d: bandwidth must be smaller than min(rows, cols)");
  }
  return kron(gaussian_blur_1d(rows, sigma, bandwidth), gaussian_blur_1d(cols, sigma, bandwidth));
}

namespace {

// Y = a X b^T for X (a.cols x b.cols) stored row-major in x, using `fa`/`fb`
// as the maps for a and b respectively.
Vector kron_apply(const Vector& x, Index a_in, Index a_out, Index b_in, Index b_out,
                  const std::function<Vector(const Vector&)>& fa,
                  const std::function<Vector(const Vector&)>& fb) {
  Matrix t(a_in, b_out);
  for (Index r = 0; r < a_in; ++r) {
    t.row(r) = fb(x.segment(r * b_in, b_in)).transpose();
  }
  Vector y(a_out * b_out);
  Vector col(a_in);
  for (Index c = 0; c < b_out; ++c) {
    col = t.col(c);
    const Vector out = fa(col);
    for (Index i = 0; i < a_out; ++i) y[i * b_out + c] = out[i];
  }
  return y;
}

}  // namespace

LinearOperator kron(const LinearOperator& a, const LinearOperator& b) {
  const Index ar = a.rows(), ac = a.cols(), br = b.rows(), bc = b.cols();
  auto forward = [a, b, ar, ac, br, bc](const Vector& x) {
    return kron_apply(
        x, ac, ar, bc, br, [&a](const Vector& v) { return a.apply(v); },
        [&b](const Vector& v) { return b.apply(v); });
  };
  LinearOperator::Map adjoint;
  if (a.has_adjoint() && b.has_adjoint()) {
    adjoint = [a, b, ar, ac, br, bc](const Vector& y) {
      return kron_apply(
          y, ar, ac, br, bc, [&a](const Vector& v) { return a.apply_adjoint(v); },
          [&b](const Vector& v) { return b.apply_adjoint(v); });
    };
  }
  return LinearOperator(ar * br, ac * bc, forward, adjoint);
}

LinearOperator select_rows(const LinearOperator& op, std::vector<Index> rows) {
  if (rows.empty()) throw std::invalid_argument("select_rows: no rows selected");
  for (Index r : rows) {
    if (r < 0 || r >= op.rows()) throw std::invalid_argument("select_rows: row out of range");
  }
  auto idx = std::make_shared<const std::vector<Index>>(std::move(rows));
  const Index m = static_cast<Index>(idx->size());
  auto forward = [op, idx, m](const Vector& x) {
    const Vector full = op.apply(x);
    Vector y(m);
    for (Index i = 0; i < m; ++i) y[i] = full[(*idx)[i]];
    return y;
  };
  LinearOperator::Map adjoint;
  if (op.has_adjoint()) {
    adjoint = [op, idx, m](const Vector& y) {
      Vector full = Vector::Zero(op.rows());
      for (Index i = 0; i < m; ++i) full[(*idx)[i]] += y[i];
      return op.apply_adjoint(full);
    };
  }
  return LinearOperator(m, op.cols(), forward, adjoint);
}

// ---------------------------------------------------------------------------

double covariance_kernel(double d, double theta) {
  if (!(d >= 0.0)) throw std::invalid_argument("covariance_kernel: distance must be >= 0");
  if (!(theta > 0.0)) throw std::invalid_argument("covariance_kernel: theta must be > 0");
  if (d > theta) return 0.0;
  const double r = d / theta;
  return 1.0 - 1.5 * r + 0.5 * r * r * r;
}

double distance(const Eigen::Ref<const Eigen::RowVectorXd>& p,
                const Eigen::Ref<const Eigen::RowVectorXd>& q, DistanceMetric metric) {
  if (p.size() != q.size()) throw std::invalid_argument("distance: dimension mismatch");
  switch (metric) {
    case DistanceMetric::euclidean:
      return (p - q).norm();
    case DistanceMetric::time_days:
      if (p.size() != 1) throw std::invalid_argument("distance: time coordinates are scalars");
      return std::abs(p[0] - q[0]);
    case DistanceMetric::spherical_great_circle: {
      if (p.size() != 2) {
        throw std::invalid_argument("distance: great-circle coordinates are (lat, lon)");
      }
      constexpr double kEarthRadiusKm = 6371.0;
      constexpr double deg = std::numbers::pi / 180.0;
      const double lat1 = p[0] * deg, lat2 = q[0] * deg;
      const double dlat = lat2 - lat1, dlon = (q[1] - p[1]) * deg;
      const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                       std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
      return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
    }
  }
  throw std::invalid_argument("distance: unknown metric");
}

Matrix covariance_matrix(const Matrix& coords, double theta, DistanceMetric metric) {
  if (coords.rows() == 0) throw std::invalid_argument("build_covariance: no coordinates");
  const Index n = coords.rows();
  Matrix c(n, n);
  for (Index i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (Index j = 0; j < i; ++j) {
      const double v = covariance_kernel(distance(coords.row(i), coords.row(j), metric), theta);
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

SpdOperator build_covariance(const Matrix& coords, double theta, DistanceMetric metric) {
  return SpdOperator::dense(covariance_matrix(coords, theta, metric));
}

}  // namespace flexikry

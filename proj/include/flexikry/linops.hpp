#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace flexikry {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a covariance or other SPD construction fails its factorization check.
class DegenerateConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix-free linear map with a known shape.
///
/// The forward and adjoint maps are stored behind shared, immutable state so
/// copies are cheap and concurrent application from several threads is safe.
/// The adjoint may be absent for square operators that are only ever used by
/// Arnoldi-type methods.
class LinearOperator {
 public:
  using Map = std::function<Vector(const Vector&)>;

  LinearOperator(Index rows, Index cols, Map forward, Map adjoint = {});

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }
  bool has_adjoint() const { return static_cast<bool>(adjoint_); }

  Vector apply(const Vector& x) const;
  Vector apply_adjoint(const Vector& y) const;

  /// The adjoint operator; throws if no adjoint map is available.
  LinearOperator transpose() const;

  /// Dense materialization by probing with unit vectors. Test and debug use only.
  Matrix to_dense() const;

  static LinearOperator identity(Index n);
  static LinearOperator from_dense(Matrix m);
  static LinearOperator diagonal(Vector d);

 private:
  Index rows_;
  Index cols_;
  Map forward_;
  Map adjoint_;
};

/// Product a * b as an operator (b applied first).
LinearOperator compose(const LinearOperator& a, const LinearOperator& b);

/// Symmetric positive definite operator with optional inverse application.
class SpdOperator {
 public:
  using Map = std::function<Vector(const Vector&)>;

  SpdOperator(Index dim, Map apply, Map apply_inverse = {});

  Index dim() const { return dim_; }
  Vector apply(const Vector& x) const;
  bool has_inverse() const { return static_cast<bool>(inverse_); }
  Vector apply_inverse(const Vector& x) const;

  /// Symmetric square root factor L with L * L^T = M applied to x; only set for
  /// operators built from a Cholesky factorization. Used to sample N(0, M).
  bool has_factor() const { return static_cast<bool>(factor_); }
  Vector apply_factor(const Vector& x) const;

  LinearOperator as_linear_operator() const;

  /// Dense SPD matrix; fails with DegenerateConfiguration if Cholesky fails.
  static SpdOperator dense(Matrix m);
  static SpdOperator scaled_identity(Index n, double scale);
  /// a (x) b; inverse and factor are the Kronecker products of the factors' own.
  static SpdOperator kron(const SpdOperator& a, const SpdOperator& b);
  static SpdOperator scaled(const SpdOperator& a, double scale);

 private:
  Index dim_;
  Map apply_;
  Map inverse_;
  Map factor_;
};

/// Banded Toeplitz Gaussian blur with zero boundary conditions.
///
/// Row i convolves with g_j = exp(-j^2 / (2 sigma^2)), |j| <= bandwidth, scaled
/// so that the full (interior) kernel sums to one. Rows near the edges lose the
/// taps that fall outside the array and therefore sum to less than one.
LinearOperator gaussian_blur_1d(Index n, double sigma, Index bandwidth);

/// Separable 2D blur kron(blur_1d(rows), blur_1d(cols)) on row-major images.
LinearOperator gaussian_blur_2d(Index rows, Index cols, double sigma, Index bandwidth);

/// The normalized 1D kernel taps g_{-bw..bw}.
Vector gaussian_kernel(double sigma, Index bandwidth);

/// (a (x) b) x computed by reshape-multiply-multiply. Vectors are laid out with
/// the b-index fastest: x[i * b.cols() + j].
LinearOperator kron(const LinearOperator& a, const LinearOperator& b);

/// Restriction to a subset of rows (the result has rows == rows.size()).
LinearOperator select_rows(const LinearOperator& op, std::vector<Index> rows);

enum class DistanceMetric { euclidean, spherical_great_circle, time_days };

/// Compactly supported "spherical" covariance kernel:
/// 1 - 1.5 (d/theta) + 0.5 (d/theta)^3 for d <= theta, zero beyond.
double covariance_kernel(double d, double theta);

/// Distance between two coordinate rows under the given metric. Great-circle
/// coordinates are (latitude, longitude) in degrees and distances are in km.
double distance(const Eigen::Ref<const Eigen::RowVectorXd>& p,
                const Eigen::Ref<const Eigen::RowVectorXd>& q, DistanceMetric metric);

/// Dense covariance with entries covariance_kernel(distance(i, j), theta).
/// `coords` holds one point per row.
SpdOperator build_covariance(const Matrix& coords, double theta, DistanceMetric metric);

/// Dense covariance matrix without the SPD check (used by build_covariance).
Matrix covariance_matrix(const Matrix& coords, double theta, DistanceMetric metric);

}  // namespace flexikry

#pragma once

#include <optional>
#include <vector>

#include "flexikry/groups.hpp"
#include "flexikry/linops.hpp"

namespace flexikry {

/// Relative threshold below which an orthogonalized vector counts as zero.
inline constexpr double kBreakdownTol = 1e-14;

/// Incrementally maintained thin QR factorization Z = Q R.
struct ThinQr {
  std::vector<Vector> q;  ///< orthonormal columns
  Matrix r;               ///< upper triangular, cols() x cols()
  bool dependent = false; ///< set once a column was (numerically) in the span of the previous ones

  Index cols() const { return static_cast<Index>(q.size()); }
};

/// Gram-Schmidt update with one reorthogonalization pass. A column whose
/// residual falls below kBreakdownTol * ||col|| sets `dependent`.
void thin_qr_update(ThinQr& qr, const Vector& col);

/// Thin QR of the columns of a basis, built column by column.
ThinQr thin_qr(const std::vector<Vector>& columns);

enum class Decomposition {
  arnoldi,                  ///< A Psi^{-1} Z_k = V_{k+1} H_k
  golub_kahan,              ///< A Psi^{-1} Z_k = U_{k+1} M_k,  Psi^{-T} A^T U_{k+1} = V_{k+1} S_{k+1}
  generalized_golub_kahan,  ///< [A Q  A] [V_k; Z_k] = U_{k+1} M_k,  A^T R^{-1} U_{k+1} = V_{k+1} S_{k+1}
};

struct Breakdown {
  enum class Source { none, u_recurrence, v_recurrence };
  bool occurred = false;
  Index iteration = 0;  ///< step at which it happened (0 = during initialization)
  Source source = Source::none;
};

/// Everything a flexible decomposition accumulates.
///
/// `h` is the (k+1) x k Hessenberg matrix (H for Arnoldi, M otherwise) and `s`
/// the (k+1) x (k+1) upper triangular factor of the Golub-Kahan variants. For
/// the generalized process the weighted images Q v_i and R^{-1} u_i are cached
/// in `qv` and `rinv_u`. After a breakdown the last row of `h` (or the last
/// diagonal entry of `s`) is zero and the corresponding basis vector is absent.
struct KrylovState {
  Decomposition kind = Decomposition::arnoldi;
  std::vector<Vector> u;
  std::vector<Vector> v;
  std::vector<Vector> z;
  std::vector<Vector> qv;
  std::vector<Vector> rinv_u;
  Matrix h;
  Matrix s;
  double beta = 0.0;
  ThinQr qr_z;
  bool track_qr_z = false;
  Breakdown breakdown;

  Index k() const { return static_cast<Index>(z.size()); }
  bool can_continue() const { return !breakdown.occurred; }
};

Matrix to_matrix(const std::vector<Vector>& columns, Index count = -1);

/// v_1 = b / ||b||.
KrylovState init_arnoldi(const Vector& b);
/// u_1 = b / ||b||, v_1 = Psi^{-T} A^T u_1 normalized.
KrylovState init_golub_kahan(const LinearOperator& a, const LinearOperator& psi_inv, const Vector& b);
/// u_1 = b / ||b||_{R^{-1}}, v_1 = A^T R^{-1} u_1 normalized in the Q norm.
KrylovState init_fggk(const LinearOperator& a, const SpdOperator& q, const SpdOperator& r,
                      const Vector& b, bool track_qr_z = true);

/// One flexible Arnoldi step with preconditioner diag(precond)^{-1}.
void arnoldi_step(const LinearOperator& a, const LinearOperator& psi_inv,
                  const WeightVector& precond, KrylovState& state);

/// One flexible Golub-Kahan step.
void golub_kahan_step(const LinearOperator& a, const LinearOperator& psi_inv,
                      const WeightVector& precond, KrylovState& state);

/// One flexible generalized Golub-Kahan step. `r` must provide apply_inverse.
void fggk_step(const LinearOperator& a, const SpdOperator& q, const SpdOperator& r,
               const WeightVector& precond, KrylovState& state);

struct ProjectedSolution {
  Vector y;
  double lambda = 0.0;
  double alpha = 0.0;
  double projected_residual_norm = 0.0;
  bool rank_deficient = false;
};

/// argmin ||H y - beta e1||^2 + lambda ||y||^2.
ProjectedSolution solve_projected_tikhonov(const Matrix& h, double beta, double lambda);

/// argmin ||H y - beta e1||^2 + lambda ||L y||^2 for square L.
ProjectedSolution solve_projected_general(const Matrix& h, double beta, double lambda,
                                          const Matrix& l);

/// argmin ||M y - beta e1||^2 + alpha ||y||^2 + lambda ||R_W y||^2.
ProjectedSolution solve_projected_sd(const Matrix& m, double beta, double alpha, double lambda,
                                     const Matrix& r_w);

/// ||H y - beta e1||_2 evaluated directly.
double projected_residual(const Matrix& h, double beta, const Vector& y);

struct DiscrepancyResult {
  double lambda = 0.0;
  double alpha = 0.0;
  bool reachable = false;  ///< false when the target residual is outside [r(0), r(inf))
  double residual = 0.0;   ///< projected residual at the returned parameter
  double target = 0.0;
};

inline constexpr double kDpRelTol = 1e-6;
inline constexpr double kDpLogLambdaMin = -12.0;
inline constexpr double kDpLogLambdaMax = 12.0;
inline constexpr int kDpMaxBisections = 60;

/// Discrepancy principle on the projected problem: find lambda with
/// ||H y(lambda) - beta e1|| = eta * noise_norm by bisection on log10(lambda).
DiscrepancyResult discrepancy_lambda(const Matrix& h, double beta, double noise_norm, double eta);

/// As discrepancy_lambda with regularizer lambda ||L y||^2 (L square, upper triangular).
DiscrepancyResult discrepancy_lambda_general(const Matrix& h, double beta, const Matrix& l,
                                             double noise_norm, double eta);

/// Two-parameter discrepancy principle with the coupling alpha = gamma * lambda.
/// The merged regularizer alpha ||y||^2 + lambda ||R_W y||^2 is written as
/// lambda ||L y||^2 with L^T L = gamma I + R_W^T R_W.
DiscrepancyResult discrepancy_pair(const Matrix& m, double beta, const Matrix& r_w,
                                   double noise_norm, double eta, double gamma);

}  // namespace flexikry

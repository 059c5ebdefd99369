#include "flexikry/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace flexikry {

namespace {

// Resize keeping the existing block and zero-filling everything new.
void grow(Matrix& m, Index rows, Index cols) {
  Matrix out = Matrix::Zero(rows, cols);
  const Index r = std::min(rows, m.rows()), c = std::min(cols, m.cols());
  out.topLeftCorner(r, c) = m.topLeftCorner(r, c);
  m = std::move(out);
}

// Two passes of modified Gram-Schmidt against `basis` in the inner product
// <b_i, w> = images[i] . w, where images[i] is the weighted image of b_i
// (images == basis for the Euclidean inner product). Returns the accumulated
// projection coefficients.
Vector orthogonalize(Vector& w, const std::vector<Vector>& basis, const std::vector<Vector>& images) {
  Vector coeffs = Vector::Zero(static_cast<Index>(basis.size()));
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double c = images[i].dot(w);
      w.noalias() -= c * basis[i];
      coeffs[static_cast<Index>(i)] += c;
    }
  }
  return coeffs;
}

// Weighted norm of the vector before orthogonalization, reconstructed from the
// weighted image of the orthogonalized vector and the cached basis images.
double weighted_norm_before(const Vector& w_before, const Vector& mw_after, const Vector& coeffs,
                            const std::vector<Vector>& images) {
  Vector mw = mw_after;
  for (std::size_t i = 0; i < images.size(); ++i) mw.noalias() += coeffs[static_cast<Index>(i)] * images[i];
  return std::sqrt(std::max(0.0, w_before.dot(mw)));
}

bool is_breakdown(double after, double before, std::size_t basis_size, Index space_dim) {
  return !(after > kBreakdownTol * before) || static_cast<Index>(basis_size) >= space_dim;
}

Vector apply_preconditioner(const Vector& v, const WeightVector& precond) {
  if (precond.diag.size() != v.size()) {
    throw std::invalid_argument("flexible step: preconditioner length does not match the basis");
  }
  return v.cwiseQuotient(precond.diag);
}

void require_continuable(const KrylovState& state, Decomposition kind, const char* who) {
  if (state.kind != kind) throw std::logic_error(std::string(who) + ": state has the wrong kind");
  if (state.breakdown.occurred) throw std::logic_error(std::string(who) + ": state has broken down");
}

}  // namespace

void thin_qr_update(ThinQr& qr, const Vector& col) {
  const Index k = qr.cols();
  if (k > 0 && qr.q.front().size() != col.size()) {
    throw std::invalid_argument("thin_qr_update: column length mismatch");
  }
  Vector w = col;
  const double before = w.norm();
  const Vector coeffs = orthogonalize(w, qr.q, qr.q);
  const double after = w.norm();
  grow(qr.r, k + 1, k + 1);
  qr.r.col(k).head(k) = coeffs;
  qr.r(k, k) = after;
  if (!(after > kBreakdownTol * before)) {
    qr.dependent = true;
    qr.q.push_back(after > 0.0 ? Vector(w / after) : Vector(Vector::Zero(col.size())));
  } else {
    qr.q.push_back(w / after);
  }
}

ThinQr thin_qr(const std::vector<Vector>& columns) {
  ThinQr qr;
  for (const auto& c : columns) thin_qr_update(qr, c);
  return qr;
}

Matrix to_matrix(const std::vector<Vector>& columns, Index count) {
  const Index k = count < 0 ? static_cast<Index>(columns.size()) : count;
  if (k == 0) return Matrix(0, 0);
  Matrix m(columns.front().size(), k);
  for (Index j = 0; j < k; ++j) m.col(j) = columns[static_cast<std::size_t>(j)];
  return m;
}

// ---------------------------------------------------------------------------

KrylovState init_arnoldi(const Vector& b) {
  const double beta = b.norm();
  if (!(beta > 0.0)) throw std::invalid_argument("init_arnoldi: right-hand side is zero");
  KrylovState st;
  st.kind = Decomposition::arnoldi;
  st.beta = beta;
  st.v.push_back(b / beta);
  st.h = Matrix::Zero(1, 0);
  return st;
}

KrylovState init_golub_kahan(const LinearOperator& a, const LinearOperator& psi_inv, const Vector& b) {
  const double beta = b.norm();
  if (!(beta > 0.0)) throw std::invalid_argument("init_golub_kahan: right-hand side is zero");
  KrylovState st;
  st.kind = Decomposition::golub_kahan;
  st.beta = beta;
  st.u.push_back(b / beta);
  const Vector g = psi_inv.apply_adjoint(a.apply_adjoint(st.u.front()));
  const double s11 = g.norm();
  st.h = Matrix::Zero(1, 0);
  st.s = Matrix::Zero(1, 1);
  if (!(s11 > 0.0)) {
    st.breakdown = {true, 0, Breakdown::Source::v_recurrence};
    return st;
  }
  st.s(0, 0) = s11;
  st.v.push_back(g / s11);
  return st;
}

KrylovState init_fggk(const LinearOperator& a, const SpdOperator& q, const SpdOperator& r,
                      const Vector& b, bool track_qr_z) {
  const Vector rinv_b = r.apply_inverse(b);
  const double beta = std::sqrt(std::max(0.0, b.dot(rinv_b)));
  if (!(beta > 0.0)) throw std::invalid_argument("init_fggk: right-hand side is zero");
  KrylovState st;
  st.kind = Decomposition::generalized_golub_kahan;
  st.track_qr_z = track_qr_z;
  st.beta = beta;
  st.u.push_back(b / beta);
  st.rinv_u.push_back(rinv_b / beta);
  const Vector g = a.apply_adjoint(st.rinv_u.front());
  const Vector qg = q.apply(g);
  const double s11 = std::sqrt(std::max(0.0, g.dot(qg)));
  st.h = Matrix::Zero(1, 0);
  st.s = Matrix::Zero(1, 1);
  if (!(s11 > 0.0)) {
    st.breakdown = {true, 0, Breakdown::Source::v_recurrence};
    return st;
  }
  st.s(0, 0) = s11;
  st.v.push_back(g / s11);
  st.qv.push_back(qg / s11);
  return st;
}

// ---------------------------------------------------------------------------

void arnoldi_step(const LinearOperator& a, const LinearOperator& psi_inv,
                  const WeightVector& precond, KrylovState& state) {
  require_continuable(state, Decomposition::arnoldi, "arnoldi_step");
  if (!a.is_square()) throw std::invalid_argument("arnoldi_step: operator must be square");
  const Index k = state.k();
  Vector z = apply_preconditioner(state.v[static_cast<std::size_t>(k)], precond);
  Vector w = a.apply(psi_inv.apply(z));
  const double before = w.norm();
  const Vector coeffs = orthogonalize(w, state.v, state.v);
  const double after = w.norm();

  state.z.push_back(std::move(z));
  grow(state.h, k + 2, k + 1);
  state.h.col(k).head(k + 1) = coeffs;
  if (is_breakdown(after, before, state.v.size(), a.rows())) {
    state.breakdown = {true, k + 1, Breakdown::Source::v_recurrence};
    return;
  }
  state.h(k + 1, k) = after;
  state.v.push_back(w / after);
}

void golub_kahan_step(const LinearOperator& a, const LinearOperator& psi_inv,
                      const WeightVector& precond, KrylovState& state) {
  require_continuable(state, Decomposition::golub_kahan, "golub_kahan_step");
  const Index k = state.k();
  Vector z = apply_preconditioner(state.v[static_cast<std::size_t>(k)], precond);
  Vector w = a.apply(psi_inv.apply(z));
  double before = w.norm();
  Vector coeffs = orthogonalize(w, state.u, state.u);
  double after = w.norm();

  state.z.push_back(std::move(z));
  grow(state.h, k + 2, k + 1);
  state.h.col(k).head(k + 1) = coeffs;
  if (is_breakdown(after, before, state.u.size(), a.rows())) {
    state.breakdown = {true, k + 1, Breakdown::Source::u_recurrence};
    return;
  }
  state.h(k + 1, k) = after;
  state.u.push_back(w / after);

  Vector g = psi_inv.apply_adjoint(a.apply_adjoint(state.u.back()));
  before = g.norm();
  coeffs = orthogonalize(g, state.v, state.v);
  after = g.norm();
  grow(state.s, k + 2, k + 2);
  state.s.col(k + 1).head(k + 1) = coeffs;
  if (is_breakdown(after, before, state.v.size(), psi_inv.cols())) {
    state.breakdown = {true, k + 1, Breakdown::Source::v_recurrence};
    return;
  }
  state.s(k + 1, k + 1) = after;
  state.v.push_back(g / after);
}

void fggk_step(const LinearOperator& a, const SpdOperator& q, const SpdOperator& r,
               const WeightVector& precond, KrylovState& state) {
  require_continuable(state, Decomposition::generalized_golub_kahan, "fggk_step");
  const Index k = state.k();
  const auto kk = static_cast<std::size_t>(k);
  Vector z = apply_preconditioner(state.v[kk], precond);
  // A Q v_k + A z_k in a single product.
  Vector w = a.apply(state.qv[kk] + z);
  const Vector w_before = w;
  Vector coeffs = orthogonalize(w, state.u, state.rinv_u);
  Vector rinv_w = r.apply_inverse(w);
  double after = std::sqrt(std::max(0.0, w.dot(rinv_w)));
  double before = weighted_norm_before(w_before, rinv_w, coeffs, state.rinv_u);

  if (state.track_qr_z) thin_qr_update(state.qr_z, z);
  state.z.push_back(std::move(z));
  grow(state.h, k + 2, k + 1);
  state.h.col(k).head(k + 1) = coeffs;
  if (is_breakdown(after, before, state.u.size(), a.rows())) {
    state.breakdown = {true, k + 1, Breakdown::Source::u_recurrence};
    return;
  }
  state.h(k + 1, k) = after;
  state.u.push_back(w / after);
  state.rinv_u.push_back(rinv_w / after);

  Vector g = a.apply_adjoint(state.rinv_u.back());
  const Vector g_before = g;
  coeffs = orthogonalize(g, state.v, state.qv);
  Vector qg = q.apply(g);
  after = std::sqrt(std::max(0.0, g.dot(qg)));
  before = weighted_norm_before(g_before, qg, coeffs, state.qv);
  grow(state.s, k + 2, k + 2);
  state.s.col(k + 1).head(k + 1) = coeffs;
  if (is_breakdown(after, before, state.v.size(), a.cols())) {
    state.breakdown = {true, k + 1, Breakdown::Source::v_recurrence};
    return;
  }
  state.s(k + 1, k + 1) = after;
  state.v.push_back(g / after);
  state.qv.push_back(qg / after);
}

// ---------------------------------------------------------------------------

double projected_residual(const Matrix& h, double beta, const Vector& y) {
  Vector r = h * y;
  r[0] -= beta;
  return r.norm();
}

namespace {

ProjectedSolution solve_stacked(const Matrix& stacked, const Matrix& h, double beta) {
  const Index k = stacked.cols();
  Vector rhs = Vector::Zero(stacked.rows());
  rhs[0] = beta;
  ProjectedSolution sol;
  if (k == 0) {
    sol.y = Vector(0);
    sol.projected_residual_norm = beta;
    return sol;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
  qr.setThreshold(kBreakdownTol);
  if (qr.rank() == k) {
    sol.y = qr.solve(rhs);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(stacked);
    cod.setThreshold(kBreakdownTol);
    sol.y = cod.solve(rhs);
    sol.rank_deficient = true;
  }
  sol.projected_residual_norm = projected_residual(h, beta, sol.y);
  return sol;
}

void check_projected(const Matrix& h, double lambda, const char* who) {
  if (h.rows() != h.cols() + 1) {
    throw std::invalid_argument(std::string(who) + ": projected matrix must be (k+1) x k");
  }
  if (!(lambda >= 0.0)) throw std::invalid_argument(std::string(who) + ": parameter must be >= 0");
}

}  // namespace

ProjectedSolution solve_projected_tikhonov(const Matrix& h, double beta, double lambda) {
  check_projected(h, lambda, "solve_projected_tikhonov");
  const Index k = h.cols();
  Matrix stacked(lambda > 0.0 ? 2 * k + 1 : k + 1, k);
  stacked.topRows(k + 1) = h;
  if (lambda > 0.0) stacked.bottomRows(k) = std::sqrt(lambda) * Matrix::Identity(k, k);
  ProjectedSolution sol = solve_stacked(stacked, h, beta);
  sol.lambda = lambda;
  return sol;
}

ProjectedSolution solve_projected_general(const Matrix& h, double beta, double lambda,
                                          const Matrix& l) {
  check_projected(h, lambda, "solve_projected_general");
  const Index k = h.cols();
  if (l.rows() != k || l.cols() != k) {
    throw std::invalid_argument("solve_projected_general: regularizer must be k x k");
  }
  Matrix stacked(lambda > 0.0 ? 2 * k + 1 : k + 1, k);
  stacked.topRows(k + 1) = h;
  if (lambda > 0.0) stacked.bottomRows(k) = std::sqrt(lambda) * l;
  ProjectedSolution sol = solve_stacked(stacked, h, beta);
  sol.lambda = lambda;
  return sol;
}

ProjectedSolution solve_projected_sd(const Matrix& m, double beta, double alpha, double lambda,
                                     const Matrix& r_w) {
  check_projected(m, lambda, "solve_projected_sd");
  if (!(alpha >= 0.0)) throw std::invalid_argument("solve_projected_sd: alpha must be >= 0");
  const Index k = m.cols();
  if (r_w.rows() != k || r_w.cols() != k) {
    throw std::invalid_argument("solve_projected_sd: R_W must be k x k");
  }
  const Index extra = (alpha > 0.0 ? k : 0) + (lambda > 0.0 ? k : 0);
  Matrix stacked(k + 1 + extra, k);
  stacked.topRows(k + 1) = m;
  Index row = k + 1;
  if (alpha > 0.0) {
    stacked.middleRows(row, k) = std::sqrt(alpha) * Matrix::Identity(k, k);
    row += k;
  }
  if (lambda > 0.0) stacked.middleRows(row, k) = std::sqrt(lambda) * r_w;
  ProjectedSolution sol = solve_stacked(stacked, m, beta);
  sol.lambda = lambda;
  sol.alpha = alpha;
  return sol;
}

// ---------------------------------------------------------------------------

namespace {

// r(lambda) for the standard-form problem min ||Ht w - beta e1||^2 + lambda ||w||^2
// with Ht = H L^{-1}, evaluated through filter factors of the SVD of Ht.
class ResidualCurve {
 public:
  ResidualCurve(const Matrix& h, double beta, const Matrix* l) {
    const Index k = h.cols();
    Matrix ht = h;
    if (l != nullptr) {
      const Vector d = l->diagonal().cwiseAbs();
      if (k > 0 && !(d.minCoeff() > kBreakdownTol * d.maxCoeff())) {
        valid_ = false;
        return;
      }
      // Ht = H L^{-1}  <=>  L^T Ht^T = H^T.
      ht = l->triangularView<Eigen::Upper>().transpose().solve(h.transpose()).transpose();
    }
    Eigen::BDCSVD<Matrix> svd(ht, Eigen::ComputeThinU);
    const Vector sigma = svd.singularValues();
    sigma2_ = sigma.array().square();
    c2_ = (beta * svd.matrixU().row(0).transpose()).array().square();
    tail2_ = std::max(0.0, beta * beta - c2_.sum());
    zero_cut_ = sigma.size() > 0 ? kBreakdownTol * sigma.maxCoeff() : 0.0;
    sigma_ = sigma;
    valid_ = ht.allFinite();
  }

  bool valid() const { return valid_; }

  double operator()(double lambda) const {
    double acc = tail2_;
    for (Index i = 0; i < sigma2_.size(); ++i) {
      double f;
      if (sigma_[i] <= zero_cut_) {
        f = 1.0;
      } else {
        f = lambda / (sigma2_[i] + lambda);
      }
      acc += f * f * c2_[i];
    }
    return std::sqrt(acc);
  }

 private:
  Vector sigma_, sigma2_, c2_;
  double tail2_ = 0.0;
  double zero_cut_ = 0.0;
  bool valid_ = true;
};

// Monotone root finding for r(lambda) = target. `r` must be nondecreasing.
DiscrepancyResult bisect(const std::function<double(double)>& r, double beta, double target,
                         double rel_tol) {
  DiscrepancyResult res;
  res.target = target;
  const double r0 = r(0.0);
  if (r0 >= target) {
    res.lambda = 0.0;
    res.residual = r0;
    return res;
  }
  const double lambda_max = std::pow(10.0, kDpLogLambdaMax);
  const double r_max = r(lambda_max);
  if (target >= beta || r_max < target) {
    res.lambda = lambda_max;
    res.residual = r_max;
    return res;
  }
  const double lambda_min = std::pow(10.0, kDpLogLambdaMin);
  const bool linear = r(lambda_min) > target;
  double lo = linear ? 0.0 : kDpLogLambdaMin;
  double hi = linear ? lambda_min : kDpLogLambdaMax;
  auto param = [linear](double t) { return linear ? t : std::pow(10.0, t); };
  double best = param(hi), best_r = linear ? r(lambda_min) : r_max;
  for (int it = 0; it < kDpMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double lam = param(mid);
    const double rm = r(lam);
    if (std::abs(rm - target) < std::abs(best_r - target)) {
      best = lam;
      best_r = rm;
    }
    if (std::abs(rm - target) <= rel_tol * target) break;
    if (rm < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  res.lambda = best;
  res.residual = best_r;
  res.reachable = std::abs(best_r - target) <= rel_tol * target;
  return res;
}

DiscrepancyResult discrepancy_impl(const Matrix& h, double beta, const Matrix* l, double noise_norm,
                                   double eta) {
  if (!(eta >= 1.0)) throw std::invalid_argument("discrepancy principle: eta must be >= 1");
  const double target = eta * noise_norm;
  if (!(target > 0.0)) throw std::invalid_argument("discrepancy principle: target residual must be > 0");
  if (h.rows() != h.cols() + 1) {
    throw std::invalid_argument("discrepancy principle: projected matrix must be (k+1) x k");
  }
  const Index k = h.cols();
  const Matrix identity = Matrix::Identity(k, k);
  const Matrix& reg = l != nullptr ? *l : identity;
  auto direct = [&](double lambda) {
    const ProjectedSolution sol = solve_projected_general(h, beta, lambda, reg);
    return sol.projected_residual_norm;
  };

  const ResidualCurve curve(h, beta, l);
  if (curve.valid()) {
    DiscrepancyResult res = bisect(std::cref(curve), beta, target, 1e-3 * kDpRelTol);
    // Confirm on the factorization the caller will use to form y.
    res.residual = direct(res.lambda);
    const bool hit = std::abs(res.residual - target) <= kDpRelTol * target;
    if (!res.reachable || hit) {
      res.reachable = res.reachable && hit;
      return res;
    }
  }
  DiscrepancyResult res = bisect(direct, beta, target, 0.5 * kDpRelTol);
  res.residual = direct(res.lambda);
  res.reachable = res.reachable && std::abs(res.residual - target) <= kDpRelTol * target;
  return res;
}

}  // namespace

DiscrepancyResult discrepancy_lambda(const Matrix& h, double beta, double noise_norm, double eta) {
  return discrepancy_impl(h, beta, nullptr, noise_norm, eta);
}

DiscrepancyResult discrepancy_lambda_general(const Matrix& h, double beta, const Matrix& l,
                                             double noise_norm, double eta) {
  if (l.rows() != h.cols() || l.cols() != h.cols()) {
    throw std::invalid_argument("discrepancy_lambda_general: regularizer must be k x k");
  }
  return discrepancy_impl(h, beta, &l, noise_norm, eta);
}

DiscrepancyResult discrepancy_pair(const Matrix& m, double beta, const Matrix& r_w,
                                   double noise_norm, double eta, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("discrepancy_pair: gamma must be >= 0");
  const Index k = m.cols();
  if (r_w.rows() != k || r_w.cols() != k) throw std::invalid_argument("discrepancy_pair: R_W must be k x k");
  Matrix l;
  if (gamma == 0.0) {
    l = r_w.triangularView<Eigen::Upper>();
  } else {
    const Matrix gram = gamma * Matrix::Identity(k, k) + r_w.transpose() * r_w;
    Eigen::LLT<Matrix> llt(gram);
    l = llt.matrixU();
  }
  DiscrepancyResult res = discrepancy_impl(m, beta, &l, noise_norm, eta);
  res.alpha = gamma * res.lambda;
  return res;
}

}  // namespace flexikry

#include "flexikry/solvers.hpp"

#include <cctype>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace flexikry {

namespace {

bool uses_golub_kahan(Variant v) {
  return v == Variant::flsqr || v == Variant::hybrid_flsqr || v == Variant::irw_flsqr;
}

bool uses_arnoldi(Variant v) { return v == Variant::fgmres || v == Variant::hybrid_fgmres; }

bool regularizes_projection(Variant v) {
  return v == Variant::hybrid_flsqr || v == Variant::irw_flsqr || v == Variant::hybrid_fgmres ||
         v == Variant::hybrid_sd;
}

void validate(const TestProblem& p, const SolverConfig& c, const GroupStructure& gs) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("solver config: " + msg); };
  if (c.max_iters < 0) fail("max_iters must be >= 0");
  if (p.b.size() != p.m()) fail("data length does not match the operator");
  if (gs.n() != p.n()) fail("group structure dimension does not match the unknowns");
  if (uses_arnoldi(c.variant) && !p.a.is_square()) fail("GMRES-type methods need a square operator");
  if (uses_golub_kahan(c.variant) && !p.a.has_adjoint()) fail("LSQR-type methods need the adjoint");
  if (c.variant == Variant::hybrid_sd) {
    if (!p.priors) fail("hybrid-sd needs the priors Q and R");
    if (!p.priors->r.has_inverse()) fail("hybrid-sd needs R^{-1}");
    if (p.psi) fail("hybrid-sd does not support a sparsifying transform");
    if (!p.a.has_adjoint()) fail("hybrid-sd needs the adjoint");
    if (c.regularizer == Regularizer::combined) fail("hybrid-sd supports group, l1 and l2 only");
  }
  if (c.regularizer == Regularizer::combined && !(c.tau_lambda > 0.0)) fail("tau_lambda must be > 0");
  if (!(c.tau > 0.0)) fail("tau must be > 0");
  if (c.lambda_mode == LambdaMode::dp && regularizes_projection(c.variant)) {
    if (!(c.eta >= 1.0)) fail("eta must be >= 1");
    if (!(p.noise_norm > 0.0)) fail("the discrepancy principle needs a positive noise norm");
  }
  if (c.lambda_mode == LambdaMode::fixed && !(c.fixed_lambda >= 0.0)) fail("fixed lambda must be >= 0");
  if (!(c.gamma >= 0.0)) fail("gamma must be >= 0");
  if (c.fixed_weights) {
    if (c.fixed_weights->size() != p.n()) fail("fixed weights have the wrong length");
    if (!(c.fixed_weights->minCoeff() > 0.0)) fail("fixed weights must be positive");
  }
  if (c.snapshot_every < 0) fail("snapshot_every must be >= 0");
}

class Reweighting {
 public:
  Reweighting(const SolverConfig& c, const GroupStructure& gs, Index n)
      : config_(c), groups_(gs), singletons_(singleton_groups(n)), n_(n) {}

  WeightVector weights(Index k, const Vector* previous) const {
    if (config_.fixed_weights) return {*config_.fixed_weights, config_.tau};
    if (k == 1 || previous == nullptr || config_.regularizer == Regularizer::l2) {
      return {Vector::Ones(n_), config_.tau};
    }
    switch (config_.regularizer) {
      case Regularizer::group:
        return compute_weights(groups_, *previous, config_.tau);
      case Regularizer::l1:
        return compute_weights(singletons_, *previous, config_.tau);
      case Regularizer::combined:
        return combined_weights(compute_weights(singletons_, *previous, config_.tau),
                                compute_weights(groups_, *previous, config_.tau), config_.tau_lambda);
      case Regularizer::l2:
        break;
    }
    return {Vector::Ones(n_), config_.tau};
  }

 private:
  const SolverConfig& config_;
  const GroupStructure& groups_;
  GroupStructure singletons_;
  Index n_;
};

Vector combine(const std::vector<Vector>& basis, const Vector& y, Index n) {
  Vector out = Vector::Zero(n);
  for (Index i = 0; i < y.size(); ++i) out.noalias() += y[i] * basis[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace

SolverTrace run(const TestProblem& problem, const SolverConfig& config) {
  const GroupStructure& gs = config.groups ? *config.groups : problem.groups;
  validate(problem, config, gs);

  const Index n = problem.n();
  const LinearOperator psi_inv = problem.transform_inverse();
  const bool sd = config.variant == Variant::hybrid_sd;

  SolverTrace trace;
  trace.n = n;
  trace.x = Vector::Zero(n);
  if (sd) {
    trace.xi = Vector::Zero(n);
    trace.s = Vector::Zero(n);
  }
  trace.dp_target = config.eta * problem.noise_norm;
  if (config.max_iters == 0) return trace;

  KrylovState state;
  if (sd) {
    state = init_fggk(problem.a, problem.priors->q, problem.priors->r, problem.b, true);
  } else if (uses_arnoldi(config.variant)) {
    state = init_arnoldi(problem.b);
  } else {
    state = init_golub_kahan(problem.a, psi_inv, problem.b);
  }

  const Reweighting reweighting(config, gs, n);
  std::optional<Vector> previous;
  const bool has_truth = problem.x_true.size() == n && problem.x_true.norm() > 0.0;

  for (Index k = 1; k <= config.max_iters && state.can_continue(); ++k) {
    const WeightVector w = reweighting.weights(k, previous ? &*previous : nullptr);
    if (sd) {
      fggk_step(problem.a, problem.priors->q, problem.priors->r, w, state);
    } else if (uses_arnoldi(config.variant)) {
      arnoldi_step(problem.a, psi_inv, w, state);
    } else {
      golub_kahan_step(problem.a, psi_inv, w, state);
    }

    const Matrix& h = state.h;
    const double beta = state.beta;
    IterationRecord rec;
    rec.k = k;

    // Regularization matrix of the projected problem (identity for hybrid).
    Matrix l;
    if (config.variant == Variant::irw_flsqr) {
      std::vector<Vector> scaled;
      scaled.reserve(state.z.size());
      for (const auto& zc : state.z) scaled.push_back(w.diag.cwiseProduct(zc));
      l = thin_qr(scaled).r;
    } else if (sd) {
      l = state.qr_z.r;
    }

    ProjectedSolution sol;
    if (!regularizes_projection(config.variant) || config.lambda_mode == LambdaMode::none) {
      sol = sd ? solve_projected_sd(h, beta, 0.0, 0.0, l) : solve_projected_tikhonov(h, beta, 0.0);
    } else {
      double lambda = config.fixed_lambda;
      double alpha = config.gamma * config.fixed_lambda;
      if (config.lambda_mode == LambdaMode::dp) {
        DiscrepancyResult dp;
        if (sd) {
          dp = discrepancy_pair(h, beta, l, problem.noise_norm, config.eta, config.gamma);
        } else if (config.variant == Variant::irw_flsqr) {
          dp = discrepancy_lambda_general(h, beta, l, problem.noise_norm, config.eta);
        } else {
          dp = discrepancy_lambda(h, beta, problem.noise_norm, config.eta);
        }
        lambda = dp.lambda;
        alpha = dp.alpha;
        rec.dp_reachable = dp.reachable;
      }
      if (sd) {
        sol = solve_projected_sd(h, beta, alpha, lambda, l);
      } else if (config.variant == Variant::irw_flsqr) {
        sol = solve_projected_general(h, beta, lambda, l);
      } else {
        sol = solve_projected_tikhonov(h, beta, lambda);
      }
    }
    rec.lambda = sol.lambda;
    rec.alpha = sol.alpha;
    rec.proj_residual = sol.projected_residual_norm;
    rec.rank_deficient = sol.rank_deficient;

    Vector coeff = combine(state.z, sol.y, n);
    Vector residual;
    if (sd) {
      Vector xi = combine(state.qv, sol.y, n);
      trace.x = xi + coeff;
      trace.xi = std::move(xi);
      trace.s = coeff;
      residual = problem.a.apply(trace.x) - problem.b;
      rec.full_residual = std::sqrt(std::max(0.0, residual.dot(problem.priors->r.apply_inverse(residual))));
      rec.group_norm = group_norm(problem.groups, trace.s);
    } else {
      trace.x = psi_inv.apply(coeff);
      residual = problem.a.apply(trace.x) - problem.b;
      rec.full_residual = residual.norm();
      rec.group_norm = group_norm(problem.groups, coeff);
    }
    rec.rel_error = has_truth ? relative_error(trace.x, problem.x_true)
                              : std::numeric_limits<double>::quiet_NaN();
    trace.records.push_back(rec);

    if (config.snapshot_every > 0 && k % config.snapshot_every == 0) {
      trace.snapshots[k] = trace.x;
      if (sd) trace.component_snapshots[k] = {trace.xi, trace.s};
    }
    previous = sd ? trace.s : std::move(coeff);
  }
  trace.breakdown = state.breakdown;
  return trace;
}

Vector reconstruct(const SolverTrace& trace, Index k) {
  if (k == 0) return Vector::Zero(trace.n);
  if (k == trace.iterations()) return trace.x;
  const auto it = trace.snapshots.find(k);
  if (it == trace.snapshots.end()) {
    throw std::out_of_range("reconstruct: no snapshot stored for iteration " + std::to_string(k));
  }
  return it->second;
}

double relative_error(const Vector& x, const Vector& x_true) {
  if (x.size() != x_true.size()) throw std::invalid_argument("relative_error: length mismatch");
  const double ref = x_true.norm();
  if (!(ref > 0.0)) throw std::invalid_argument("relative_error: reference has zero norm");
  return (x - x_true).norm() / ref;
}

namespace {

// Shortest round-trippable decimal representation, stable across runs.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

void write_trace_csv(std::ostream& out, const SolverTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.k << ',' << fmt(r.lambda) << ',' << fmt(r.alpha) << ',' << fmt(r.proj_residual) << ','
        << fmt(r.full_residual) << ',' << fmt(r.rel_error) << ',' << fmt(r.group_norm) << '\n';
  }
}

void write_lambda_csv(std::ostream& out, const SolverTrace& trace) {
  out << kLambdaCsvHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.k << ',' << fmt(r.lambda) << ',' << fmt(r.alpha) << '\n';
  }
}

// ---------------------------------------------------------------------------

SolverSpec parse_solver_name(const std::string& raw) {
  std::string name;
  for (char c : raw) name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  auto bad = [&raw](const std::string& why) {
    return std::invalid_argument("unknown solver '" + raw + "': " + why);
  };
  SolverSpec spec;
  spec.name = name;

  std::string rest = name;
  enum class Projection { none, hybrid, irw } projection = Projection::none;
  if (rest.rfind("hybrid-", 0) == 0) {
    projection = Projection::hybrid;
    rest = rest.substr(7);
  } else if (rest.rfind("irw-", 0) == 0) {
    projection = Projection::irw;
    rest = rest.substr(4);
  }

  std::string algorithm = rest, suffix;
  if (const auto dash = rest.find('-'); dash != std::string::npos) {
    algorithm = rest.substr(0, dash);
    suffix = rest.substr(dash + 1);
  }

  bool flexible = true;
  if (algorithm == "lsqr" || algorithm == "gmres") {
    flexible = false;
    algorithm = "f" + algorithm;
  }
  if (algorithm == "flsqr") {
    spec.variant = projection == Projection::hybrid ? Variant::hybrid_flsqr
                 : projection == Projection::irw    ? Variant::irw_flsqr
                                                    : Variant::flsqr;
  } else if (algorithm == "fgmres") {
    if (projection == Projection::irw) throw bad("the IRW projection is only available for FLSQR");
    spec.variant = projection == Projection::hybrid ? Variant::hybrid_fgmres : Variant::fgmres;
  } else if (algorithm == "sd") {
    if (projection != Projection::hybrid) throw bad("SD is only available as hybrid-sd");
    spec.variant = Variant::hybrid_sd;
  } else {
    throw bad("expected lsqr, gmres, flsqr, fgmres or sd");
  }

  if (!flexible) {
    if (!suffix.empty()) throw bad("non-flexible methods take no regularizer suffix");
    if (projection == Projection::irw) throw bad("the IRW projection needs a flexible method");
    spec.regularizer = Regularizer::l2;
  } else if (suffix.empty()) {
    spec.regularizer = Regularizer::l1;
  } else if (suffix == "g") {
    spec.regularizer = Regularizer::group;
  } else if (suffix == "g1" || suffix == "g2") {
    spec.regularizer = Regularizer::group;
    spec.group_tag = suffix;
  } else if (suffix == "c") {
    if (spec.variant == Variant::hybrid_sd) throw bad("combined regularization is not available for SD");
    spec.regularizer = Regularizer::combined;
  } else {
    throw bad("unknown suffix '" + suffix + "'");
  }
  return spec;
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::flsqr: return "flsqr";
    case Variant::hybrid_flsqr: return "hybrid-flsqr";
    case Variant::irw_flsqr: return "irw-flsqr";
    case Variant::fgmres: return "fgmres";
    case Variant::hybrid_fgmres: return "hybrid-fgmres";
    case Variant::hybrid_sd: return "hybrid-sd";
  }
  return "?";
}

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::group: return "group";
    case Regularizer::l1: return "l1";
    case Regularizer::l2: return "l2";
    case Regularizer::combined: return "combined";
  }
  return "?";
}

}  // namespace flexikry

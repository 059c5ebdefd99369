#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flexikry/krylov.hpp"
#include "flexikry/problem.hpp"

namespace flexikry {

enum class Variant {
  flsqr,          ///< flexible LSQR, no projected regularization (early stopping)
  hybrid_flsqr,   ///< flexible LSQR with Tikhonov on the projected problem
  irw_flsqr,      ///< flexible LSQR projecting the reweighted problem itself
  fgmres,         ///< flexible GMRES, no projected regularization
  hybrid_fgmres,  ///< flexible GMRES with Tikhonov on the projected problem
  hybrid_sd,      ///< solution decomposition on the generalized Golub-Kahan basis
};

enum class Regularizer {
  group,     ///< l2,1 over the problem's (or the config's) groups
  l1,        ///< singleton groups
  l2,        ///< unit weights, i.e. the non-flexible method
  combined,  ///< l1 + tau_lambda^2 * l2,1
};

enum class LambdaMode { dp, fixed, none };

struct SolverConfig {
  Variant variant = Variant::hybrid_flsqr;
  Regularizer regularizer = Regularizer::group;
  /// Overrides the problem's group structure when set.
  std::optional<GroupStructure> groups;
  double tau = kDefaultTau;
  double eta = 1.01;
  double tau_lambda = 1.0;
  /// alpha = gamma * lambda for the solution-decomposition parameter pair.
  double gamma = 1.0;
  Index max_iters = 50;
  LambdaMode lambda_mode = LambdaMode::dp;
  double fixed_lambda = 0.0;
  /// Store x_k every this many iterations (0: final iterate only).
  Index snapshot_every = 0;
  /// Preconditioner diagonal held fixed for every iteration instead of reweighting.
  std::optional<Vector> fixed_weights;
};

struct IterationRecord {
  Index k = 0;
  double lambda = 0.0;
  double alpha = 0.0;
  double proj_residual = 0.0;
  double full_residual = 0.0;
  double rel_error = 0.0;
  double group_norm = 0.0;
  bool dp_reachable = false;
  bool rank_deficient = false;
};

struct SolverTrace {
  std::vector<IterationRecord> records;
  Index n = 0;
  Vector x;   ///< final iterate
  Vector xi;  ///< smooth component (solution decomposition only)
  Vector s;   ///< group-sparse component (solution decomposition only)
  std::map<Index, Vector> snapshots;
  std::map<Index, std::pair<Vector, Vector>> component_snapshots;
  Breakdown breakdown;
  double dp_target = 0.0;

  Index iterations() const { return static_cast<Index>(records.size()); }
};

/// Runs one configured method on a problem. Breakdown truncates the trace.
SolverTrace run(const TestProblem& problem, const SolverConfig& config);

/// Stored iterate x_k (k = 0 is the zero initial guess).
Vector reconstruct(const SolverTrace& trace, Index k);

/// ||x - x_true|| / ||x_true||.
double relative_error(const Vector& x, const Vector& x_true);

/// CSV with header `k,lambda,alpha,proj_residual,full_residual,rel_error,group_norm`.
void write_trace_csv(std::ostream& out, const SolverTrace& trace);
/// CSV with header `k,lambda,alpha`.
void write_lambda_csv(std::ostream& out, const SolverTrace& trace);

inline constexpr const char* kTraceCsvHeader =
    "k,lambda,alpha,proj_residual,full_residual,rel_error,group_norm";
inline constexpr const char* kLambdaCsvHeader = "k,lambda,alpha";

/// Parsed solver name of the form [hybrid-|irw-]ALGORITHM[-g|-g1|-g2|-c], where
/// ALGORITHM is lsqr, gmres (l2), flsqr, fgmres (l1 unless suffixed) or sd.
struct SolverSpec {
  std::string name;
  Variant variant = Variant::hybrid_flsqr;
  Regularizer regularizer = Regularizer::l1;
  std::optional<std::string> group_tag;  ///< "g1" / "g2" when the suffix names a tree strategy
  bool gmres_family() const { return variant == Variant::fgmres || variant == Variant::hybrid_fgmres; }
};

SolverSpec parse_solver_name(const std::string& name);

std::string to_string(Variant v);
std::string to_string(Regularizer r);

}  // namespace flexikry

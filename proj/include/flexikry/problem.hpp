#pragma once

#include <map>
#include <optional>
#include <string>

#include "flexikry/groups.hpp"
#include "flexikry/linops.hpp"

namespace flexikry {

/// Gaussian priors of the solution-decomposition model: xi ~ N(0, Q), e ~ N(0, R).
struct SdPriors {
  SpdOperator q;
  SpdOperator r;
};

/// A linear inverse problem b = A x_true + e with its regularization structure.
///
/// `psi` / `psi_inv` are the sparsifying transform and its inverse; when absent
/// the identity is used. For solution-decomposition problems `noise_norm` is
/// measured in the R^{-1} norm.
struct TestProblem {
  std::string name;
  LinearOperator a;
  std::optional<LinearOperator> psi;
  std::optional<LinearOperator> psi_inv;
  Vector x_true;
  Vector b;
  double noise_norm = 0.0;
  GroupStructure groups;
  std::optional<SdPriors> priors;
  Vector xi_true;
  Vector s_true;
  std::map<std::string, std::string> metadata;

  Index n() const { return a.cols(); }
  Index m() const { return a.rows(); }
  LinearOperator transform() const { return psi ? *psi : LinearOperator::identity(n()); }
  LinearOperator transform_inverse() const {
    return psi_inv ? *psi_inv : LinearOperator::identity(n());
  }
};

}  // namespace flexikry

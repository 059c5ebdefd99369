#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "flexikry/linops.hpp"
#include "flexikry/transforms.hpp"

namespace flexikry {

/// Possibly overlapping index groups over a coefficient space of dimension n.
///
/// Every index must belong to at least one group; the inverse membership map
/// (which groups contain index j) is built once at construction.
class GroupStructure {
 public:
  GroupStructure(Index n, std::vector<std::vector<Index>> groups);

  Index n() const { return n_; }
  Index size() const { return static_cast<Index>(groups_.size()); }
  const std::vector<std::vector<Index>>& groups() const { return groups_; }
  const std::vector<Index>& group(Index i) const { return groups_[static_cast<std::size_t>(i)]; }
  /// Groups containing index j.
  const std::vector<Index>& membership(Index j) const {
    return membership_[static_cast<std::size_t>(j)];
  }
  bool overlapping() const { return overlapping_; }

  /// Euclidean norm of z restricted to each group.
  Vector group_norms(const Vector& z) const;

 private:
  Index n_;
  std::vector<std::vector<Index>> groups_;
  std::vector<std::vector<Index>> membership_;
  bool overlapping_ = false;
};

/// Diagonal of a reweighting matrix W (or D) with the smoothing parameter used.
struct WeightVector {
  Vector diag;
  double tau = 0.0;
};

inline constexpr double kDefaultTau = 1e-10;

GroupStructure singleton_groups(Index n);

/// One group per spatial location: {p + t * n_space : t in [0, n_time)}.
GroupStructure temporal_groups(Index n_space, Index n_time);

enum class TreeStrategy {
  G1,  ///< one {parent, child} group per parent-child pair
  G2,  ///< one {parent, 4 children} group per parent
};

/// Parent-child groups on the wavelet tree. Coefficients not covered by any
/// tree group (the coarsest LL block) become singleton groups.
GroupStructure wavelet_tree_groups(const WaveletLayout& layout, TreeStrategy strategy);

/// Mixed l2,1 norm: sum of group 2-norms.
double group_norm(const GroupStructure& gs, const Vector& z);

/// Smoothed reweighting diagonal:
///   diag_j = sqrt( sum_{i in G_j} 1 / sqrt(||z_{g_i}||^2 + tau^2) ).
WeightVector compute_weights(const GroupStructure& gs, const Vector& z, double tau = kDefaultTau);

/// Column norms of the stacked diagonal [W1; tau_lambda W2], i.e. the diagonal
/// R factor of its QR decomposition.
WeightVector combined_weights(const WeightVector& w1, const WeightVector& w2, double tau_lambda);

/// Line format: one group per line, `id: i1 i2 ...`, ids consecutive from 0.
/// Lines starting with '#' are comments; an optional `# n = <n>` comment fixes
/// the dimension (otherwise it is the largest index + 1).
void write_groups(std::ostream& out, const GroupStructure& gs);
GroupStructure read_groups(std::istream& in);

std::string to_string(TreeStrategy s);
TreeStrategy parse_tree_strategy(const std::string& s);

}  // namespace flexikry

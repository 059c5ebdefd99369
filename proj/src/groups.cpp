#include "flexikry/groups.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace flexikry {

GroupStructure::GroupStructure(Index n, std::vector<std::vector<Index>> groups)
    : n_(n), groups_(std::move(groups)), membership_(static_cast<std::size_t>(std::max<Index>(n, 0))) {
  if (n <= 0) throw std::invalid_argument("GroupStructure: dimension must be positive");
  for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
    const auto& g = groups_[gi];
    if (g.empty()) throw std::invalid_argument("GroupStructure: empty group " + std::to_string(gi));
    for (Index j : g) {
      if (j < 0 || j >= n) {
        throw std::invalid_argument("GroupStructure: index " + std::to_string(j) +
                                    " out of range in group " + std::to_string(gi));
      }
      auto& m = membership_[static_cast<std::size_t>(j)];
      if (!m.empty() && m.back() == static_cast<Index>(gi)) {
        throw std::invalid_argument("GroupStructure: duplicate index in group " + std::to_string(gi));
      }
      m.push_back(static_cast<Index>(gi));
    }
  }
  for (Index j = 0; j < n; ++j) {
    const auto count = membership_[static_cast<std::size_t>(j)].size();
    if (count == 0) {
      throw std::invalid_argument("GroupStructure: index " + std::to_string(j) +
                                  " belongs to no group");
    }
    if (count > 1) overlapping_ = true;
  }
}

Vector GroupStructure::group_norms(const Vector& z) const {
  if (z.size() != n_) throw std::invalid_argument("group_norms: length mismatch");
  Vector norms(size());
  for (Index i = 0; i < size(); ++i) {
    double acc = 0.0;
    for (Index j : group(i)) acc += z[j] * z[j];
    norms[i] = std::sqrt(acc);
  }
  return norms;
}

GroupStructure singleton_groups(Index n) {
  if (n < 1) throw std::invalid_argument("singleton_groups: n must be >= 1");
  std::vector<std::vector<Index>> g(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = {i};
  return GroupStructure(n, std::move(g));
}

GroupStructure temporal_groups(Index n_space, Index n_time) {
  if (n_space < 1 || n_time < 1) throw std::invalid_argument("temporal_groups: empty grid");
  std::vector<std::vector<Index>> g(static_cast<std::size_t>(n_space));
  for (Index p = 0; p < n_space; ++p) {
    auto& grp = g[static_cast<std::size_t>(p)];
    grp.reserve(static_cast<std::size_t>(n_time));
    for (Index t = 0; t < n_time; ++t) grp.push_back(p + t * n_space);
  }
  return GroupStructure(n_space * n_time, std::move(g));
}

GroupStructure wavelet_tree_groups(const WaveletLayout& layout, TreeStrategy strategy) {
  if (layout.levels() < 2) {
    throw std::invalid_argument("wavelet_tree_groups: at least 2 levels are needed for parent-child pairs");
  }
  std::vector<std::vector<Index>> groups;
  std::vector<bool> covered(static_cast<std::size_t>(layout.size()), false);
  const Orientation details[] = {Orientation::LH, Orientation::HL, Orientation::HH};
  for (int level = layout.levels(); level >= 2; --level) {
    for (Orientation o : details) {
      for (Index r = 0; r < layout.band_rows(level); ++r) {
        for (Index c = 0; c < layout.band_cols(level); ++c) {
          const Index parent = layout.index(level, o, r, c);
          std::vector<Index> family{parent};
          for (Index dr = 0; dr < 2; ++dr) {
            for (Index dc = 0; dc < 2; ++dc) {
              const Index child = layout.index(level - 1, o, 2 * r + dr, 2 * c + dc);
              family.push_back(child);
              if (strategy == TreeStrategy::G1) groups.push_back({parent, child});
            }
          }
          if (strategy == TreeStrategy::G2) groups.push_back(family);
          for (Index j : family) covered[static_cast<std::size_t>(j)] = true;
        }
      }
    }
  }
  for (Index j = 0; j < layout.size(); ++j) {
    if (!covered[static_cast<std::size_t>(j)]) groups.push_back({j});
  }
  return GroupStructure(layout.size(), std::move(groups));
}

double group_norm(const GroupStructure& gs, const Vector& z) {
  return gs.group_norms(z).sum();
}

WeightVector compute_weights(const GroupStructure& gs, const Vector& z, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("compute_weights: tau must be positive");
  const Vector norms = gs.group_norms(z);
  Vector inv(norms.size());
  for (Index i = 0; i < norms.size(); ++i) {
    inv[i] = 1.0 / std::sqrt(norms[i] * norms[i] + tau * tau);
  }
  Vector diag(gs.n());
  for (Index j = 0; j < gs.n(); ++j) {
    double acc = 0.0;
    for (Index i : gs.membership(j)) acc += inv[i];
    diag[j] = std::sqrt(acc);
  }
  return {std::move(diag), tau};
}

WeightVector combined_weights(const WeightVector& w1, const WeightVector& w2, double tau_lambda) {
  if (w1.diag.size() != w2.diag.size()) {
    throw std::invalid_argument("combined_weights: weight vectors differ in length");
  }
  if (!(tau_lambda > 0.0)) throw std::invalid_argument("combined_weights: tau_lambda must be positive");
  Vector d = (w1.diag.array().square() + tau_lambda * tau_lambda * w2.diag.array().square()).sqrt();
  return {std::move(d), std::max(w1.tau, w2.tau)};
}

void write_groups(std::ostream& out, const GroupStructure& gs) {
  out << "# n = " << gs.n() << '\n';
  for (Index i = 0; i < gs.size(); ++i) {
    out << i << ':';
    for (Index j : gs.group(i)) out << ' ' << j;
    out << '\n';
  }
}

GroupStructure read_groups(std::istream& in) {
  std::vector<std::vector<Index>> groups;
  Index n = -1;
  Index max_index = -1;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream c(line.substr(first + 1));
      std::string key, eq;
      Index value = 0;
      if (c >> key >> eq >> value && key == "n" && eq == "=") n = value;
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("read_groups: line " + std::to_string(lineno) + " has no ':'");
    }
    Index id = -1;
    try {
      id = std::stol(line.substr(0, colon));
    } catch (const std::exception&) {
      throw std::invalid_argument("read_groups: bad group id on line " + std::to_string(lineno));
    }
    if (id != static_cast<Index>(groups.size())) {
      throw std::invalid_argument("read_groups: group ids must be consecutive from 0 (line " +
                                  std::to_string(lineno) + ")");
    }
    std::istringstream s(line.substr(colon + 1));
    std::vector<Index> g;
    std::string tok;
    while (s >> tok) {
      std::size_t used = 0;
      Index j = -1;
      try {
        j = std::stol(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw std::invalid_argument("read_groups: bad index '" + tok + "' on line " +
                                    std::to_string(lineno));
      }
      g.push_back(j);
      max_index = std::max(max_index, j);
    }
    groups.push_back(std::move(g));
  }
  if (n < 0) n = max_index + 1;
  return GroupStructure(n, std::move(groups));
}

std::string to_string(TreeStrategy s) { return s == TreeStrategy::G1 ? "G1" : "G2"; }

TreeStrategy parse_tree_strategy(const std::string& s) {
  if (s == "G1" || s == "g1") return TreeStrategy::G1;
  if (s == "G2" || s == "g2") return TreeStrategy::G2;
  throw std::invalid_argument("unknown group strategy '" + s + "' (expected G1 or G2)");
}

}  // namespace flexikry

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "flexikry/groups.hpp"
#include "oracles.hpp"

using namespace flexikry;

TEST_SUITE("groups") {

TEST_CASE("singleton groups give the l1 norm") {
  const GroupStructure gs = singleton_groups(3);
  CHECK(gs.size() == 3);
  for (Index i = 0; i < 3; ++i) CHECK(gs.group(i) == std::vector<Index>{i});
  CHECK_FALSE(gs.overlapping());
  CHECK(group_norm(gs, Vector::Map(std::vector<double>{3, -4, 0}.data(), 3)) == 7.0);

  Vector z(3);
  z << 4, 0, 0;
  const WeightVector w = compute_weights(gs, z, 1e-12);
  CHECK(w.diag[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w.diag[1] > 1e5);
  CHECK(w.diag[2] > 1e5);
}

TEST_CASE("temporal groups stride through time") {
  const GroupStructure gs = temporal_groups(2, 3);
  CHECK(gs.size() == 2);
  CHECK(gs.group(0) == std::vector<Index>{0, 2, 4});
  CHECK(gs.group(1) == std::vector<Index>{1, 3, 5});
  CHECK_FALSE(gs.overlapping());
  CHECK(group_norm(gs, Vector::Unit(6, 3)) == 1.0);
}

TEST_CASE("wavelet tree group counts on a 4x4 layout") {
  const WaveletLayout layout(4, 4, 2);
  const GroupStructure g1 = wavelet_tree_groups(layout, TreeStrategy::G1);
  CHECK(g1.size() == 13);
  CHECK(g1.overlapping());
  Index pairs = 0;
  for (const auto& g : g1.groups()) pairs += g.size() == 2;
  CHECK(pairs == 12);

  const GroupStructure g2 = wavelet_tree_groups(layout, TreeStrategy::G2);
  CHECK(g2.size() == 4);
  CHECK_FALSE(g2.overlapping());
  Index fives = 0;
  for (const auto& g : g2.groups()) fives += g.size() == 5;
  CHECK(fives == 3);

  CHECK_THROWS_AS(wavelet_tree_groups(WaveletLayout(4, 4, 1), TreeStrategy::G1), std::invalid_argument);
}

TEST_CASE("membership is the exact inverse of the groups") {
  const GroupStructure gs = wavelet_tree_groups(WaveletLayout(16, 16, 3), TreeStrategy::G1);
  Index total = 0;
  for (Index j = 0; j < gs.n(); ++j) {
    CHECK_FALSE(gs.membership(j).empty());
    for (Index gi : gs.membership(j)) {
      const auto& g = gs.group(gi);
      CHECK(std::find(g.begin(), g.end(), j) != g.end());
    }
    total += static_cast<Index>(gs.membership(j).size());
  }
  Index sizes = 0;
  for (const auto& g : gs.groups()) sizes += static_cast<Index>(g.size());
  CHECK(total == sizes);
}

TEST_CASE("group norm by hand") {
  const GroupStructure a(3, {{0}, {1, 2}});
  CHECK(group_norm(a, Vector::Map(std::vector<double>{3, 4, 0}.data(), 3)) == 7.0);
  const GroupStructure b(2, {{0, 1}});
  CHECK(group_norm(b, Vector::Map(std::vector<double>{3, 4}.data(), 2)) == 5.0);
  CHECK(group_norm(b, Vector::Zero(2)) == 0.0);
}

TEST_CASE("overlapping weights by hand") {
  const GroupStructure gs(3, {{0, 1}, {1, 2}});
  Vector z(3);
  z << 3, 4, 0;
  const WeightVector w = compute_weights(gs, z, 1e-14);
  CHECK(w.diag[0] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(w.diag[1] == doctest::Approx(std::sqrt(0.2 + 0.25)).epsilon(1e-12));
  CHECK(w.diag[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(w.diag.cwiseProduct(z).squaredNorm() == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(group_norm(gs, z) == 9.0);
}

TEST_CASE("weights of a zero vector count the memberships") {
  const GroupStructure gs(3, {{0, 1}, {1, 2}, {1}});
  const WeightVector w = compute_weights(gs, Vector::Zero(3), 1.0);
  CHECK(w.diag[0] == doctest::Approx(1.0));
  CHECK(w.diag[1] == doctest::Approx(std::sqrt(3.0)));
  CHECK(w.diag[2] == doctest::Approx(1.0));
  CHECK(w.tau == 1.0);
  CHECK_THROWS_AS(compute_weights(gs, Vector::Zero(3), 0.0), std::invalid_argument);
}

TEST_CASE("combined weights are column norms of the stacked diagonals") {
  const WeightVector ones{Vector::Ones(4), 1e-10};
  CHECK((combined_weights(ones, ones, 1.0).diag.array() - std::sqrt(2.0)).abs().maxCoeff() < 1e-15);
  const WeightVector w1{Vector::Constant(1, 3.0), 1e-10}, w2{Vector::Constant(1, 4.0), 1e-10};
  CHECK(combined_weights(w1, w2, 1.0).diag[0] == doctest::Approx(5.0));
  oracle::Rng rng(4);
  const WeightVector a{rng.positive(6, 0.1, 3.0), 1e-10}, b{rng.positive(6, 0.1, 3.0), 1e-10};
  CHECK(oracle::rel_diff(combined_weights(a, b, 1e-8).diag, a.diag) < 1e-14);
  Matrix stacked(12, 6);
  stacked.topRows(6) = a.diag.asDiagonal();
  stacked.bottomRows(6) = 0.7 * b.diag.asDiagonal();
  const Matrix r = stacked.householderQr().matrixQR().topRows(6).triangularView<Eigen::Upper>();
  CHECK(oracle::rel_diff(Vector(r.diagonal().cwiseAbs()), combined_weights(a, b, 0.7).diag) < 1e-14);
  CHECK_THROWS_AS(combined_weights(a, WeightVector{Vector::Ones(5), 1e-10}, 1.0), std::invalid_argument);
}

TEST_CASE("reweighting identity on random vectors") {
  oracle::Rng rng(8);
  const std::vector<GroupStructure> structures{
      singleton_groups(50), temporal_groups(20, 6),
      wavelet_tree_groups(WaveletLayout(16, 16, 2), TreeStrategy::G1),
      wavelet_tree_groups(WaveletLayout(16, 16, 3), TreeStrategy::G2)};
  for (const auto& gs : structures) {
    for (int t = 0; t < 10; ++t) {
      const Vector z = rng.vector(gs.n());
      const double tau = 1e-14 * gs.group_norms(z).minCoeff();
      const double lhs = compute_weights(gs, z, tau).diag.cwiseProduct(z).squaredNorm();
      CHECK(std::abs(lhs - group_norm(gs, z)) <= 1e-10 * group_norm(gs, z));
    }
  }
}

TEST_CASE("weights give a quadratic majorant of the smoothed norm") {
  oracle::Rng rng(12);
  const GroupStructure gs = wavelet_tree_groups(WaveletLayout(8, 8, 2), TreeStrategy::G1);
  const double tau = 1e-3;
  auto smoothed = [&](const Vector& z) {
    return (gs.group_norms(z).array().square() + tau * tau).sqrt().sum();
  };
  for (int t = 0; t < 50; ++t) {
    const Vector zbar = rng.vector(64), z = rng.vector(64) * rng.uniform(0.1, 3.0);
    const Vector w = compute_weights(gs, zbar, tau).diag;
    const double majorant =
        smoothed(zbar) + 0.5 * (w.cwiseProduct(z).squaredNorm() - w.cwiseProduct(zbar).squaredNorm());
    CHECK(majorant >= smoothed(z) - 1e-12 * smoothed(z));
  }
}

TEST_CASE("inflating a group lowers exactly its weights") {
  oracle::Rng rng(13);
  const GroupStructure gs = temporal_groups(10, 4);
  const Vector z = rng.vector(40);
  Vector inflated = z;
  for (Index j : gs.group(3)) inflated[j] *= 2.5;
  const Vector w0 = compute_weights(gs, z, 1e-10).diag, w1 = compute_weights(gs, inflated, 1e-10).diag;
  for (Index j = 0; j < 40; ++j) {
    if (j % 10 == 3) {
      CHECK(w1[j] < w0[j]);
    } else {
      CHECK(w1[j] == w0[j]);
    }
  }
}

TEST_CASE("group files round-trip") {
  const GroupStructure gs = wavelet_tree_groups(WaveletLayout(8, 8, 2), TreeStrategy::G2);
  std::stringstream s;
  write_groups(s, gs);
  const GroupStructure back = read_groups(s);
  CHECK(back.n() == gs.n());
  CHECK(back.groups() == gs.groups());

  std::istringstream bad("0: 1 2\n2: 3\n");
  CHECK_THROWS_AS(read_groups(bad), std::invalid_argument);
  std::istringstream uncovered("# n = 4\n0: 0 1\n");
  CHECK_THROWS_AS(read_groups(uncovered), std::invalid_argument);
}

TEST_CASE("strategy names") {
  CHECK(parse_tree_strategy("g1") == TreeStrategy::G1);
  CHECK(parse_tree_strategy("G2") == TreeStrategy::G2);
  CHECK(to_string(TreeStrategy::G2) == "G2");
  CHECK_THROWS_AS(parse_tree_strategy("G3"), std::invalid_argument);
}

}  // TEST_SUITE

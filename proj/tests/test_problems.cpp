#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "flexikry/problems.hpp"
#include "oracles.hpp"

using namespace flexikry;
namespace fs = std::filesystem;

namespace {

// b = A x_true + e with the requested relative noise level; `r_sigma` rescales
// the noise norm for problems that measure it in the R^{-1} norm.
void check_invariants(const TestProblem& p, double level, double r_sigma = 1.0) {
  const Vector exact = p.a.apply(p.x_true);
  const Vector e = p.b - exact;
  CHECK(p.b.size() == p.m());
  CHECK(p.x_true.size() == p.n());
  CHECK(p.groups.n() == p.n());
  CHECK(std::abs(e.norm() / exact.norm() - level) <= 1e-12);
  CHECK(std::abs(e.norm() / r_sigma - p.noise_norm) <= 1e-12 * p.noise_norm);
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("flexikry_problems_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("problems") {

TEST_CASE("noise hits the requested level exactly") {
  oracle::Rng rng(1);
  const Vector b = rng.vector(50);
  NoisyData d = add_noise(b, 0.0, 3);
  CHECK(d.b == b);
  CHECK(d.noise_norm == 0.0);
  for (double level : {0.01, 0.05, 1.0}) {
    d = add_noise(b, level, 3);
    CHECK(std::abs((d.b - b).norm() / b.norm() - level) <= 1e-14);
    CHECK(d.noise_norm == doctest::Approx(level * b.norm()).epsilon(1e-14));
    CHECK(add_noise(b, level, 3).b == d.b);
  }
  CHECK(add_noise(b, 0.05, 4).b != add_noise(b, 0.05, 3).b);
  CHECK_THROWS_AS(add_noise(b, -0.1, 0), std::invalid_argument);
}

TEST_CASE("wavelet deblurring problem") {
  const TestProblem p = gen_wavelet_deblur({});
  CHECK(p.n() == 64 * 64);
  check_invariants(p, 0.05);
  Index zeros = 0;
  for (Index i = 0; i < p.n(); ++i) zeros += p.x_true[i] == 0.0;
  CHECK(zeros >= p.n() / 2);
  CHECK(p.metadata.at("strategy") == "G1");
  CHECK(p.groups.overlapping());
  const auto [sigma, bw] = medium_blur_parameters(256);
  CHECK(sigma == 4.0);
  CHECK(bw == 16);
  CHECK_THROWS_AS(gen_wavelet_deblur({.size = 36, .levels = 3}), std::invalid_argument);
}

TEST_CASE("noise-free small deblurring inverts exactly") {
  const TestProblem p = gen_wavelet_deblur({.size = 16, .noise_level = 0.0});
  const Matrix a = p.a.to_dense();
  const Vector x = a.fullPivLu().solve(p.b);
  CHECK(oracle::rel_diff(x, p.x_true) <= 1e-6);
}

TEST_CASE("generators are pure functions of their arguments") {
  const TestProblem a = gen_wavelet_deblur({.size = 32, .seed = 5});
  const TestProblem b = gen_wavelet_deblur({.size = 32, .seed = 5});
  CHECK(a.b == b.b);
  CHECK(a.x_true == b.x_true);
  const TestProblem c = gen_anomaly({.seed = 9});
  const TestProblem d = gen_anomaly({.seed = 9});
  CHECK(c.b == d.b);
  CHECK(c.s_true == d.s_true);
  CHECK(gen_anomaly({.seed = 10}).b != c.b);
}

TEST_CASE("dynamic deblurring problem at full desk scale") {
  const TestProblem p = gen_dynamic_deblur({});
  CHECK(p.m() == 22500);
  CHECK(p.n() == 22500);
  CHECK(p.groups.size() == 2500);
  for (const auto& g : p.groups.groups()) CHECK(g.size() == 9);
  check_invariants(p, 0.02);

  // Zero regions persist over time.
  const Vector& x = p.x_true;
  Index persistent = 0;
  for (Index s = 0; s < 2500; ++s) {
    bool zero = true;
    for (Index t = 0; t < 9; ++t) zero = zero && x[t * 2500 + s] == 0.0;
    persistent += zero;
  }
  CHECK(persistent >= 1250);
}

TEST_CASE("dynamic deblurring operator is the Kronecker product of the blurs") {
  const TestProblem p = gen_dynamic_deblur({.size = 6, .frames = 4, .observed_frames = 4});
  const Matrix expect = oracle::dense_kron(oracle::dense_blur_1d(4, 1.0, 3),
                                           oracle::dense_kron(oracle::dense_blur_1d(6, 1.0, 4),
                                                              oracle::dense_blur_1d(6, 1.0, 4)));
  CHECK(oracle::rel_diff(p.a.to_dense(), expect) <= 1e-14);
  const TestProblem part = gen_dynamic_deblur({.size = 6, .frames = 4, .observed_frames = 2});
  CHECK(part.m() == 72);
  CHECK_FALSE(part.a.is_square());
}

TEST_CASE("anomaly problem") {
  const AnomalyOptions o;
  const TestProblem p = gen_anomaly(o);
  CHECK(p.n() == 100 * 8);
  CHECK(p.m() == o.n_obs);
  const double sigma = std::stod(p.metadata.at("noise_sigma"));
  check_invariants(p, o.noise_level, sigma);
  CHECK(p.noise_norm == doctest::Approx(std::sqrt(double(o.n_obs))));
  CHECK(oracle::rel_diff(Vector(p.xi_true + p.s_true), p.x_true) == 0.0);

  std::set<Index> active;
  for (Index s = 0; s < 100; ++s) {
    Index nonzero = 0;
    for (Index t = 0; t < 8; ++t) nonzero += p.s_true[t * 100 + s] != 0.0;
    CHECK((nonzero == 0 || nonzero == 8));
    if (nonzero == 8) active.insert(s);
  }
  CHECK(static_cast<Index>(active.size()) == o.n_anomalies);

  // The prior covariance passes a factorization check.
  const Matrix q = p.priors->q.as_linear_operator().to_dense();
  CHECK((q - q.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(q.llt().info() == Eigen::Success);
  CHECK(p.priors->r.apply(Vector::Ones(o.n_obs))[0] == doctest::Approx(sigma * sigma));
  CHECK(std::stod(p.metadata.at("reference_theta_s")) == 555.42);
}

TEST_CASE("problem directories round-trip") {
  const fs::path dir = scratch("roundtrip");
  const TestProblem p = gen_anomaly({.grid = 5, .n_time = 3, .n_obs = 40, .n_anomalies = 2});
  save_problem(dir, p);
  for (const char* f : {"metadata.json", "groups.txt", "x_true.txt", "b.txt"}) CHECK(fs::exists(dir / f));
  const TestProblem back = load_problem(dir);
  CHECK(back.b == p.b);
  CHECK(back.groups.groups() == p.groups.groups());

  std::ofstream(dir / "b.txt") << "1\n2\n";
  CHECK_THROWS_AS(load_problem(dir), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("PGM round trip") {
  Image img{3, 4, Vector::LinSpaced(12, 0.0, 11.0)};
  std::stringstream s;
  write_pgm(s, img);
  const Image back = read_pgm(s);
  CHECK(back.rows == 3);
  CHECK(back.cols == 4);
  CHECK(back.pixels[0] == 0.0);
  CHECK(back.pixels[11] == 1.0);
  CHECK(oracle::rel_diff(back.pixels, Vector(img.pixels / 11.0)) < 1e-2);

  std::istringstream binary(std::string("P5\n# comment\n2 1\n255\n") + char(0) + char(255));
  const Image b = read_pgm(binary);
  CHECK(b.pixels[1] == 1.0);
  std::istringstream junk("P3\n1 1\n255\n0 0 0\n");
  CHECK_THROWS_AS(read_pgm(junk), std::runtime_error);
}

TEST_CASE("custom images replace the synthetic one") {
  Image img{16, 16, Vector::Zero(256)};
  img.pixels.segment(40, 10).setOnes();
  const TestProblem p = gen_wavelet_deblur({.size = 16, .image = img});
  CHECK(p.x_true == img.pixels);
  const fs::path dir = scratch("custom");
  save_problem(dir, p);
  CHECK(load_problem(dir).x_true == img.pixels);
  fs::remove_all(dir);
}

}  // TEST_SUITE

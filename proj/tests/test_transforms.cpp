#include <set>

#include "doctest.h"
#include "flexikry/transforms.hpp"
#include "oracles.hpp"

using namespace flexikry;

TEST_SUITE("transforms") {

TEST_CASE("layout index maps are bijective with equal band sizes") {
  for (int levels = 1; levels <= 3; ++levels) {
    const WaveletLayout layout(16, 8, levels);
    std::set<Index> seen;
    auto visit = [&](int l, Orientation o) {
      for (Index r = 0; r < layout.band_rows(l); ++r)
        for (Index c = 0; c < layout.band_cols(l); ++c) {
          const Index flat = layout.index(l, o, r, c);
          seen.insert(flat);
          const auto p = layout.locate(flat);
          CHECK(p.level == l);
          CHECK(p.orientation == o);
          CHECK(p.row == r);
          CHECK(p.col == c);
        }
    };
    for (int l = 1; l <= levels; ++l) {
      CHECK(layout.band_rows(l) * layout.band_cols(l) == (16 >> l) * (8 >> l));
      visit(l, Orientation::LH);
      visit(l, Orientation::HL);
      visit(l, Orientation::HH);
    }
    visit(levels, Orientation::LL);
    CHECK(static_cast<Index>(seen.size()) == 128);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 127);
  }
}

TEST_CASE("non-divisible sizes are rejected") {
  CHECK_THROWS_AS(WaveletLayout(12, 12, 3), std::invalid_argument);
  CHECK_THROWS_AS(haar_inverse(Vector::Zero(10), WaveletLayout(4, 4, 1)), std::invalid_argument);
}

TEST_CASE("constant image keeps only the coarsest average") {
  const WaveletLayout layout(16, 16, 2);
  const Vector z = haar_forward(Vector::Constant(256, 3.0), layout);
  for (Index i = 0; i < z.size(); ++i) {
    const auto p = layout.locate(i);
    if (p.orientation == Orientation::LL) {
      CHECK(z[i] == doctest::Approx(3.0 * 4.0).epsilon(1e-14));
    } else {
      CHECK(std::abs(z[i]) < 1e-13);
    }
  }
}

TEST_CASE("2x2 Haar by hand") {
  const double a = 1.0, b = 2.0, c = 5.0, d = 7.0;
  Vector x(4);
  x << a, b, c, d;
  const WaveletLayout layout(2, 2, 1);
  const Vector z = haar_forward(x, layout);
  CHECK(z[layout.index(1, Orientation::LL, 0, 0)] == doctest::Approx((a + b + c + d) / 2));
  // LH: high-pass along the rows, HL: high-pass down the columns.
  CHECK(z[layout.index(1, Orientation::LH, 0, 0)] == doctest::Approx((a - b + c - d) / 2));
  CHECK(z[layout.index(1, Orientation::HL, 0, 0)] == doctest::Approx((a + b - c - d) / 2));
  CHECK(z[layout.index(1, Orientation::HH, 0, 0)] == doctest::Approx((a - b - c + d) / 2));
}

TEST_CASE("orthogonality across sizes and levels") {
  oracle::Rng rng(17);
  for (Index size : {8, 16, 32, 64}) {
    for (int levels = 1; levels <= 3; ++levels) {
      const WaveletLayout layout(size, size, levels);
      const Vector x = rng.vector(size * size);
      const Vector z = haar_forward(x, layout);
      CHECK(std::abs(z.norm() - x.norm()) <= 1e-13 * x.norm());
      CHECK(oracle::rel_diff(haar_inverse(z, layout), x) <= 1e-13);
      const Vector y = rng.vector(size * size);
      CHECK(std::abs(z.dot(y) - x.dot(haar_inverse(y, layout))) <= 1e-12 * z.norm() * y.norm());
    }
  }
  CHECK(haar_inverse(Vector::Zero(64), WaveletLayout(8, 8, 2)).norm() == 0.0);
}

TEST_CASE("operators expose the transform and its inverse") {
  const WaveletLayout layout(8, 8, 2);
  const Matrix psi = haar_operator(layout).to_dense();
  const Matrix inv = haar_inverse_operator(layout).to_dense();
  CHECK((psi * inv - Matrix::Identity(64, 64)).norm() < 1e-13);
  CHECK((psi.transpose() - inv).norm() < 1e-13);
  CHECK((haar_operator(layout).transpose().to_dense() - inv).norm() < 1e-13);
}

TEST_CASE("children cover exactly the support of their parent") {
  const WaveletLayout layout(16, 16, 3);
  auto support = [&](Index flat) {
    const Vector img = haar_inverse(Vector::Unit(layout.size(), flat), layout);
    std::set<Index> s;
    for (Index i = 0; i < img.size(); ++i)
      if (std::abs(img[i]) > 1e-12) s.insert(i);
    return s;
  };
  for (int l = 2; l <= 3; ++l) {
    for (Orientation o : {Orientation::LH, Orientation::HL, Orientation::HH}) {
      for (Index r = 0; r < layout.band_rows(l); ++r) {
        for (Index c = 0; c < layout.band_cols(l); ++c) {
          const auto parent = support(layout.index(l, o, r, c));
          std::set<Index> children;
          for (Index dr = 0; dr < 2; ++dr)
            for (Index dc = 0; dc < 2; ++dc) {
              const auto s = support(layout.index(l - 1, o, 2 * r + dr, 2 * c + dc));
              children.insert(s.begin(), s.end());
            }
          CHECK(parent == children);
        }
      }
    }
  }
}

}  // TEST_SUITE

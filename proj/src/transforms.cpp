#include "flexikry/transforms.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace flexikry {

WaveletLayout::WaveletLayout(Index rows, Index cols, int levels)
    : rows_(rows), cols_(cols), levels_(levels) {
  if (levels < 1) throw std::invalid_argument("WaveletLayout: levels must be >= 1");
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("WaveletLayout: empty image");
  const Index block = Index{1} << levels;
  if (rows % block != 0 || cols % block != 0) {
    throw std::invalid_argument("WaveletLayout: " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " is not divisible by 2^" +
                                std::to_string(levels));
  }
}

Index WaveletLayout::index(int level, Orientation o, Index r, Index c) const {
  if (level < 1 || level > levels_) throw std::out_of_range("WaveletLayout::index: bad level");
  const Index h = band_rows(level), w = band_cols(level);
  if (r < 0 || r >= h || c < 0 || c >= w) {
    throw std::out_of_range("WaveletLayout::index: position outside band");
  }
  switch (o) {
    case Orientation::LL:
      if (level != levels_) throw std::out_of_range("WaveletLayout::index: LL only at coarsest level");
      return r * cols_ + c;
    case Orientation::LH:
      return r * cols_ + (w + c);
    case Orientation::HL:
      return (h + r) * cols_ + c;
    case Orientation::HH:
      return (h + r) * cols_ + (w + c);
  }
  throw std::out_of_range("WaveletLayout::index: bad orientation");
}

WaveletLayout::Position WaveletLayout::locate(Index flat) const {
  if (flat < 0 || flat >= size()) throw std::out_of_range("WaveletLayout::locate: bad index");
  const Index r = flat / cols_, c = flat % cols_;
  for (int level = 1; level <= levels_; ++level) {
    const Index h = band_rows(level), w = band_cols(level);
    const bool top = r < h, left = c < w;
    if (top && left) continue;
    if (top) return {level, Orientation::LH, r, c - w};
    if (left) return {level, Orientation::HL, r - h, c};
    return {level, Orientation::HH, r - h, c - w};
  }
  return {levels_, Orientation::LL, r, c};
}

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// One analysis level on the top-left (2h x 2w) region of a row-major array.
void analyze_level(Vector& x, Index cols, Index h, Index w) {
  Vector tmp(2 * std::max(h, w));
  for (Index i = 0; i < 2 * h; ++i) {
    double* row = x.data() + i * cols;
    for (Index j = 0; j < w; ++j) {
      tmp[j] = (row[2 * j] + row[2 * j + 1]) * kInvSqrt2;
      tmp[w + j] = (row[2 * j] - row[2 * j + 1]) * kInvSqrt2;
    }
    for (Index j = 0; j < 2 * w; ++j) row[j] = tmp[j];
  }
  for (Index j = 0; j < 2 * w; ++j) {
    for (Index i = 0; i < h; ++i) {
      const double a = x[(2 * i) * cols + j], b = x[(2 * i + 1) * cols + j];
      tmp[i] = (a + b) * kInvSqrt2;
      tmp[h + i] = (a - b) * kInvSqrt2;
    }
    for (Index i = 0; i < 2 * h; ++i) x[i * cols + j] = tmp[i];
  }
}

void synthesize_level(Vector& x, Index cols, Index h, Index w) {
  Vector tmp(2 * std::max(h, w));
  for (Index j = 0; j < 2 * w; ++j) {
    for (Index i = 0; i < h; ++i) {
      const double lo = x[i * cols + j], hi = x[(h + i) * cols + j];
      tmp[2 * i] = (lo + hi) * kInvSqrt2;
      tmp[2 * i + 1] = (lo - hi) * kInvSqrt2;
    }
    for (Index i = 0; i < 2 * h; ++i) x[i * cols + j] = tmp[i];
  }
  for (Index i = 0; i < 2 * h; ++i) {
    double* row = x.data() + i * cols;
    for (Index j = 0; j < w; ++j) {
      tmp[2 * j] = (row[j] + row[w + j]) * kInvSqrt2;
      tmp[2 * j + 1] = (row[j] - row[w + j]) * kInvSqrt2;
    }
    for (Index j = 0; j < 2 * w; ++j) row[j] = tmp[j];
  }
}

void check_length(const Vector& v, const WaveletLayout& layout, const char* who) {
  if (v.size() != layout.size()) {
    throw std::invalid_argument(std::string(who) + ": length " + std::to_string(v.size()) +
                                " does not match layout size " + std::to_string(layout.size()));
  }
}

}  // namespace

Vector haar_forward(const Vector& image, const WaveletLayout& layout) {
  check_length(image, layout, "haar_forward");
  Vector x = image;
  for (int level = 1; level <= layout.levels(); ++level) {
    analyze_level(x, layout.cols(), layout.band_rows(level), layout.band_cols(level));
  }
  return x;
}

Vector haar_inverse(const Vector& coeffs, const WaveletLayout& layout) {
  check_length(coeffs, layout, "haar_inverse");
  Vector x = coeffs;
  for (int level = layout.levels(); level >= 1; --level) {
    synthesize_level(x, layout.cols(), layout.band_rows(level), layout.band_cols(level));
  }
  return x;
}

LinearOperator haar_operator(const WaveletLayout& layout) {
  return LinearOperator(
      layout.size(), layout.size(), [layout](const Vector& x) { return haar_forward(x, layout); },
      [layout](const Vector& c) { return haar_inverse(c, layout); });
}

LinearOperator haar_inverse_operator(const WaveletLayout& layout) {
  return haar_operator(layout).transpose();
}

}  // namespace flexikry

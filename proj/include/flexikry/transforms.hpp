#pragma once

#include "flexikry/linops.hpp"

namespace flexikry {

enum class Orientation { LL, LH, HL, HH };

/// Mallat layout of a multi-level 2D wavelet decomposition stored row-major in
/// an array of the same shape as the image.
///
/// Level 1 is the finest scale. At level l the detail blocks have size
/// (rows / 2^l) x (cols / 2^l) and sit at
///   LH: top-right     (low-pass down the columns, high-pass along the rows)
///   HL: bottom-left   (high-pass down the columns, low-pass along the rows)
///   HH: bottom-right
/// of the top-left (2 rows/2^l) x (2 cols/2^l) region. The single LL block of
/// the coarsest level occupies the top-left corner.
class WaveletLayout {
 public:
  WaveletLayout(Index rows, Index cols, int levels);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  int levels() const { return levels_; }
  Index size() const { return rows_ * cols_; }

  Index band_rows(int level) const { return rows_ >> level; }
  Index band_cols(int level) const { return cols_ >> level; }

  /// Flat coefficient index of (level, orientation, r, c). LL is only valid at
  /// the coarsest level.
  Index index(int level, Orientation o, Index r, Index c) const;

  struct Position {
    int level;
    Orientation orientation;
    Index row;
    Index col;
  };
  /// Inverse of index().
  Position locate(Index flat) const;

 private:
  Index rows_;
  Index cols_;
  int levels_;
};

/// Multi-level orthonormal Haar analysis with filters [1, 1]/sqrt(2) and
/// [1, -1]/sqrt(2).
Vector haar_forward(const Vector& image, const WaveletLayout& layout);

/// Exact inverse (and adjoint) of haar_forward.
Vector haar_inverse(const Vector& coeffs, const WaveletLayout& layout);

/// Psi as an operator: forward = analysis, adjoint = synthesis.
LinearOperator haar_operator(const WaveletLayout& layout);

/// Psi^{-1} as an operator: forward = synthesis, adjoint = analysis.
LinearOperator haar_inverse_operator(const WaveletLayout& layout);

}  // namespace flexikry

#pragma once

#include "emomap/lexicon.hpp"

namespace emomap {

/// Affine map target = W * source + b fitted by ordinary least squares.
struct LinearModel {
  Matrix weights;  // |t| x |s|
  Vector bias;     // |t|
  EmotionFormat source_format;
  EmotionFormat target_format;

  Matrix predict(const Matrix& x) const;
};

/// Solves the bias-augmented normal equations with Cholesky; falls back to
/// an SVD pseudo-inverse when the system is not (numerically) positive
/// definite.
LinearModel fit_linear(const Matrix& x, const Matrix& y, EmotionFormat source_format,
                       EmotionFormat target_format);
LinearModel fit_linear(const AlignedLexicon& train);

Matrix predict_linear(const LinearModel& model, const Matrix& x);

}  // namespace emomap

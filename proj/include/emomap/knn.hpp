#pragma once

#include <cstddef>
#include <vector>

#include "emomap/lexicon.hpp"

namespace emomap {

inline constexpr int kDefaultNeighbors = 20;

/// Lazy learner: stores the training matrices and averages the targets of
/// the nearest stored rows at prediction time.
struct KnnModel {
  int k = kDefaultNeighbors;
  Matrix source;
  Matrix target;
  EmotionFormat source_format;
  EmotionFormat target_format;

  /// k actually used at prediction time: min(k, stored rows).
  int effective_k() const;
  Matrix predict(const Matrix& x) const;
};

KnnModel fit_knn(const Matrix& x, const Matrix& y, int k, EmotionFormat source_format,
                 EmotionFormat target_format);
KnnModel fit_knn(const AlignedLexicon& train, int k = kDefaultNeighbors);

Matrix predict_knn(const KnnModel& model, const Matrix& x);

/// Indices of the k stored rows closest to `query` by Euclidean distance,
/// nearest first, equal distances ordered by ascending row index.
std::vector<std::size_t> nearest_rows(const Matrix& stored, const Eigen::RowVectorXd& query,
                                      std::size_t k);

}  // namespace emomap

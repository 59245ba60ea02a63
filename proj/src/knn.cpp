#include "emomap/knn.hpp"

#include <algorithm>
#include <numeric>

#include "emomap/error.hpp"

namespace emomap {

KnnModel fit_knn(const Matrix& x, const Matrix& y, int k, EmotionFormat source_format,
                 EmotionFormat target_format) {
  require(k >= 1, "k-NN needs k >= 1, got " + std::to_string(k));
  require(x.rows() >= 1, "k-NN needs a non-empty training set");
  require(x.rows() == y.rows(), "k-NN: source and target row counts differ");
  return KnnModel{k, x, y, std::move(source_format), std::move(target_format)};
}

KnnModel fit_knn(const AlignedLexicon& train, int k) {
  return fit_knn(train.source, train.target, k, train.source_format, train.target_format);
}

int KnnModel::effective_k() const {
  return static_cast<int>(std::min<Eigen::Index>(k, source.rows()));
}

std::vector<std::size_t> nearest_rows(const Matrix& stored, const Eigen::RowVectorXd& query,
                                      std::size_t k) {
  const auto n = static_cast<std::size_t>(stored.rows());
  k = std::min(k, n);
  // Squared distances order rows exactly like Euclidean distances.
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = (stored.row(static_cast<Eigen::Index>(i)) - query).squaredNorm();
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                    });
  idx.resize(k);
  return idx;
}

Matrix KnnModel::predict(const Matrix& x) const {
  if (x.cols() != source.cols()) {
    fail(ErrorKind::Contract, "k-NN model expects " + std::to_string(source.cols()) +
                                  " input columns, got " + std::to_string(x.cols()));
  }
  const auto k_used = static_cast<std::size_t>(effective_k());
  Matrix out(x.rows(), target.cols());
  for (Eigen::Index q = 0; q < x.rows(); ++q) {
    const auto rows = nearest_rows(source, x.row(q), k_used);
    Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(target.cols());
    for (auto r : rows) sum += target.row(static_cast<Eigen::Index>(r));
    out.row(q) = sum / static_cast<double>(rows.size());
  }
  return out;
}

Matrix predict_knn(const KnnModel& model, const Matrix& x) { return model.predict(x); }

}  // namespace emomap

#include "emomap/linear.hpp"

#include "emomap/error.hpp"

namespace emomap {

LinearModel fit_linear(const Matrix& x, const Matrix& y, EmotionFormat source_format,
                       EmotionFormat target_format) {
  require(x.rows() >= 1, "linear regression needs a non-empty training set");
  require(x.rows() == y.rows(), "linear regression: source and target row counts differ");
  const auto n = x.rows();
  const auto s = x.cols();

  Eigen::MatrixXd design(n, s + 1);
  design.leftCols(s) = x;
  design.col(s).setOnes();
  const Eigen::MatrixXd gram = design.transpose() * design;
  const Eigen::MatrixXd rhs = design.transpose() * y;

  Eigen::MatrixXd coef;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    // LLT accepts nearly singular systems; treat a collapsed pivot as failure.
    const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
    ok = diag.minCoeff() > 1e-7 * diag.maxCoeff();
  }
  if (ok) {
    coef = llt.solve(rhs);
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    coef = svd.solve(Eigen::MatrixXd(y));
  }

  LinearModel model;
  model.weights = coef.topRows(s).transpose();
  model.bias = coef.row(s).transpose();
  model.source_format = std::move(source_format);
  model.target_format = std::move(target_format);
  return model;
}

LinearModel fit_linear(const AlignedLexicon& train) {
  return fit_linear(train.source, train.target, train.source_format, train.target_format);
}

Matrix LinearModel::predict(const Matrix& x) const {
  if (x.cols() != weights.cols()) {
    fail(ErrorKind::Contract, "linear model expects " + std::to_string(weights.cols()) +
                                  " input columns, got " + std::to_string(x.cols()));
  }
  Matrix out = x * weights.transpose();
  out.rowwise() += bias.transpose();
  return out;
}

Matrix predict_linear(const LinearModel& model, const Matrix& x) { return model.predict(x); }

}  // namespace emomap

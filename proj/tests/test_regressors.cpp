#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "emomap/boosted.hpp"
#include "emomap/error.hpp"
#include "emomap/knn.hpp"
#include "emomap/linear.hpp"
#include "emomap/model.hpp"
#include "emomap/stats.hpp"
#include "emomap/synthetic.hpp"
#include "oracles.hpp"

using namespace emomap;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an emomap::Error");
  return ErrorKind::Io;
}

const EmotionFormat kOneIn = EmotionFormat::make("IN", {"x"}, -100, 100);
const EmotionFormat kOneOut = EmotionFormat::make("OUT", {"y"}, -100, 100);

Matrix column(std::initializer_list<double> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

double min_r(const Matrix& pred, const Matrix& gold) {
  double lo = 1.0;
  for (Eigen::Index j = 0; j < gold.cols(); ++j) {
    lo = std::min(lo, pearson(Vector(pred.col(j)), Vector(gold.col(j))));
  }
  return lo;
}

std::pair<AlignedLexicon, AlignedLexicon> split(const AlignedLexicon& all, std::size_t n_train) {
  std::vector<std::size_t> tr(n_train), te(all.size() - n_train);
  std::iota(tr.begin(), tr.end(), std::size_t{0});
  std::iota(te.begin(), te.end(), n_train);
  return {all.rows(tr), all.rows(te)};
}

}  // namespace

TEST_CASE("linear regression recovers a noise-free affine map") {
  Matrix x(10, 1), y(10, 1);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = 0.7 * i - 2.0;
    y(i, 0) = 2.0 * x(i, 0) + 1.0;
  }
  const auto m = fit_linear(x, y, kOneIn, kOneOut);
  CHECK(std::abs(m.weights(0, 0) - 2.0) < 1e-10);
  CHECK(std::abs(m.bias(0) - 1.0) < 1e-10);
  CHECK((m.predict(x) - y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("linear regression: three points by hand") {
  // Normal equations [[5,3],[3,3]] [w,b] = [13,9] give w = 2, b = 1.
  const auto m = fit_linear(column({0, 1, 2}), column({1, 3, 5}), kOneIn, kOneOut);
  CHECK(std::abs(m.weights(0, 0) - 2.0) < 1e-12);
  CHECK(std::abs(m.bias(0) - 1.0) < 1e-12);
  CHECK(std::abs(predict_linear(m, column({4}))(0, 0) - 9.0) < 1e-12);
  CHECK(predict_linear(m, Matrix(0, 1)).rows() == 0);
}

TEST_CASE("linear regression: identity map and multi-output shapes") {
  auto data = synthetic::affine(40, 3);
  data.target = data.source;
  data.target_format = EmotionFormat::make("VAD2", EmotionFormat::vad().variables, 1, 9);
  const auto m = fit_linear(data);
  CHECK((m.weights - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(m.bias.cwiseAbs().maxCoeff() < 1e-9);

  const auto be = fit_linear(synthetic::affine(50, 4));
  CHECK(be.weights.rows() == 5);
  CHECK(be.weights.cols() == 3);
  CHECK(kind_of([&] { be.predict(Matrix::Zero(2, 4)); }) == ErrorKind::Contract);
  CHECK(kind_of([&] { fit_linear(Matrix(0, 1), Matrix(0, 1), kOneIn, kOneOut); }) ==
        ErrorKind::Contract);
}

TEST_CASE("linear regression: zero weights output the bias") {
  LinearModel m{Matrix::Zero(2, 3), Vector::Constant(2, 5.0), EmotionFormat::vad(), EmotionFormat::va()};
  const Matrix out = m.predict(Matrix::Random(4, 3));
  CHECK((out.array() == 5.0).all());
}

TEST_CASE("linear regression: rank-deficient design uses the pseudo-inverse") {
  // Second column duplicates the first.
  Matrix x(6, 2), y(6, 1);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = x(i, 1) = i;
    y(i, 0) = 3.0 * i + 2.0;
  }
  const auto m = fit_linear(x, y, EmotionFormat::make("X2", {"a", "b"}, -10, 10), kOneOut);
  CHECK(m.weights.allFinite());
  CHECK((m.predict(x) - y).cwiseAbs().maxCoeff() < 1e-8);
  // Minimum-norm solution splits the slope evenly.
  CHECK(std::abs(m.weights(0, 0) - 1.5) < 1e-8);
  CHECK(std::abs(m.weights(0, 1) - 1.5) < 1e-8);

  const auto single = fit_linear(column({4}), column({7}), kOneIn, kOneOut);
  CHECK(std::abs(single.predict(column({4}))(0, 0) - 7.0) < 1e-9);
}

TEST_CASE("linear prediction is exactly linear when the bias is zero") {
  Rng rng(8);
  LinearModel m{Matrix::Random(5, 3), Vector::Zero(5), EmotionFormat::vad(), EmotionFormat::be5()};
  for (int t = 0; t < 50; ++t) {
    const Matrix a = Matrix::Random(1, 3), b = Matrix::Random(1, 3);
    const double alpha = rng.uniform(-3, 3), beta = rng.uniform(-3, 3);
    const Matrix lhs = m.predict(alpha * a + beta * b);
    const Matrix rhs = alpha * m.predict(a) + beta * m.predict(b);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("k-NN stores its training data verbatim") {
  const auto data = synthetic::affine(30, 1);
  const auto m = fit_knn(data, 20);
  CHECK(m.source == data.source);
  CHECK(m.target == data.target);
  CHECK(kind_of([&] { fit_knn(data, 0); }) == ErrorKind::Contract);
  const auto small = fit_knn(column({1, 2, 3, 4, 5}), column({1, 2, 3, 4, 5}), 20, kOneIn, kOneOut);
  CHECK(small.effective_k() == 5);
  CHECK(std::abs(small.predict(column({100}))(0, 0) - 3.0) < 1e-15);
}

TEST_CASE("k-NN hand examples") {
  const auto two = [](int k) {
    return fit_knn(column({0, 10}), column({1, 3}), k, kOneIn, kOneOut);
  };
  CHECK(two(1).predict(column({1}))(0, 0) == 1.0);
  CHECK(two(2).predict(column({1}))(0, 0) == 2.0);

  // Query 2: row 1 at distance 0, rows 0 and 2 tie at distance 2; the lower
  // index wins, so the neighbours are rows 1 and 0 -> mean(4, 0) = 2.
  const auto tie = fit_knn(column({0, 2, 4}), column({0, 4, 8}), 2, kOneIn, kOneOut);
  CHECK(tie.predict(column({2}))(0, 0) == 2.0);
  CHECK(nearest_rows(tie.source, Eigen::RowVectorXd::Constant(1, 2.0), 2) ==
        std::vector<std::size_t>{1, 0});
  CHECK(kind_of([&] { tie.predict(Matrix::Zero(1, 2)); }) == ErrorKind::Contract);
}

TEST_CASE("k-NN matches exhaustive search and stays within the target range") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix xs(40, 2), ys(40, 3);
    for (Eigen::Index i = 0; i < xs.size(); ++i) xs.data()[i] = static_cast<double>(rng.below(5));
    for (Eigen::Index i = 0; i < ys.size(); ++i) ys.data()[i] = rng.uniform(1, 5);
    const int k = 1 + static_cast<int>(rng.below(45));
    const auto m = fit_knn(xs, ys, k, EmotionFormat::make("G", {"a", "b"}, 0, 4),
                           EmotionFormat::make("T", {"p", "q", "r"}, 1, 5));
    for (int q = 0; q < 10; ++q) {
      const std::vector<double> query{rng.uniform(-1, 5), rng.uniform(-1, 5)};
      Matrix qm(1, 2);
      qm << query[0], query[1];
      const Matrix got = m.predict(qm);
      const auto want = oracle::brute_knn(xs, ys, query, static_cast<std::size_t>(k));
      for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(got(0, j) == want[static_cast<std::size_t>(j)]);
        CHECK(got(0, j) >= ys.col(j).minCoeff());
        CHECK(got(0, j) <= ys.col(j).maxCoeff());
      }
    }
  }
}

TEST_CASE("weighted median") {
  const std::vector<double> v{1, 2, 9}, w{1, 1, 1};
  CHECK(weighted_median(v, w) == 2.0);
  CHECK(weighted_median(std::vector<double>{5}, std::vector<double>{0.3}) == 5.0);
  CHECK(weighted_median(std::vector<double>{1, 2, 9}, std::vector<double>{0.1, 0.1, 5}) == 9.0);
  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const auto n = 1 + rng.below(12);
    std::vector<double> vals(n), wts(n);
    for (std::size_t i = 0; i < n; ++i) {
      vals[i] = static_cast<double>(rng.below(6));
      wts[i] = rng.uniform(0.01, 2.0);
    }
    CHECK(weighted_median(vals, wts) == oracle::brute_weighted_median(vals, wts));
  }
}

TEST_CASE("feature table parsing") {
  const auto t = parse_feature_table("good\t0.5\t-1\nbad\t1e-3\t2\n");
  CHECK(t.words.size() == 2);
  CHECK(t.dimension() == 2);
  CHECK(t.find("bad")[1] == 2.0);
  CHECK(t.find("ugly") == nullptr);
  CHECK(kind_of([] { parse_feature_table("a\t1\t2\nb\t1\n"); }) == ErrorKind::Validation);
  CHECK(kind_of([] { parse_feature_table("a\tx\n"); }) == ErrorKind::Parse);
}

namespace {

BoostConfig small_boost(int stages, std::uint64_t seed) {
  BoostConfig cfg;
  cfg.max_stages = stages;
  cfg.seed = seed;
  cfg.base.hidden_sizes = {16};
  cfg.base.iterations = 300;
  cfg.base.adam.step_size = 1e-2;
  return cfg;
}

// Word features: 4-d embedding-like vectors, two targets nonlinear in them.
struct FeatureTask {
  Matrix x_train, y_train, x_test, y_test;
};

FeatureTask feature_task(std::uint64_t seed) {
  Rng rng(seed);
  auto make = [&](Eigen::Index n, Matrix& x, Matrix& y) {
    x.resize(n, 4);
    y.resize(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int j = 0; j < 4; ++j) x(i, j) = rng.uniform(-1, 1);
      y(i, 0) = 3 + x(i, 0) + 0.5 * std::abs(x(i, 1)) + 0.1 * rng.normal();
      y(i, 1) = 3 - 0.7 * x(i, 2) * x(i, 3) + x(i, 1) + 0.1 * rng.normal();
    }
  };
  FeatureTask t;
  make(150, t.x_train, t.y_train);
  make(100, t.x_test, t.y_test);
  return t;
}

}  // namespace

TEST_CASE("boosting with one stage is the base learner") {
  const auto task = feature_task(1);
  const auto cfg = small_boost(1, 9);
  const auto ens = fit_boosted(task.x_train, task.y_train, cfg);
  REQUIRE(ens.ensembles.size() == 2);
  for (const auto& e : ens.ensembles) {
    REQUIRE(e.size() == 1);
    CHECK(e[0].weight > 0.0);
  }
  const Matrix pred = ens.predict(task.x_test);
  for (int j = 0; j < 2; ++j) {
    const Matrix single = forward(ens.ensembles[static_cast<std::size_t>(j)][0].network, task.x_test,
                                  Mode::Eval, 0.0);
    CHECK(pred.col(j) == single.col(0));
  }
}

TEST_CASE("boosting is deterministic and keeps positive stage weights") {
  const auto task = feature_task(2);
  const auto a = fit_boosted(task.x_train, task.y_train, small_boost(5, 4));
  const auto b = fit_boosted(task.x_train, task.y_train, small_boost(5, 4));
  CHECK(a.predict(task.x_test) == b.predict(task.x_test));
  for (const auto& e : a.ensembles) {
    CHECK(!e.empty());
    CHECK(e.size() <= 5);
    for (const auto& s : e) CHECK(s.weight > 0.0);
  }
}

TEST_CASE("boosting does not hurt the base learner") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto task = feature_task(100 + seed);
    const auto single = fit_boosted(task.x_train, task.y_train, small_boost(1, seed));
    const auto boosted = fit_boosted(task.x_train, task.y_train, small_boost(10, seed));
    const double r_single = min_r(single.predict(task.x_test), task.y_test);
    const double r_boost = min_r(boosted.predict(task.x_test), task.y_test);
    CHECK(r_boost >= r_single - 0.02);
  }
}

TEST_CASE("boosting from a feature table and a lexicon") {
  Rng rng(3);
  std::string tsv;
  Lexicon targets(EmotionFormat::va(), "en", "va");
  for (int i = 0; i < 60; ++i) {
    const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1);
    tsv += "w" + std::to_string(i) + "\t" + std::to_string(a) + "\t" + std::to_string(b) + "\n";
    if (i % 3 != 0) targets.add("w" + std::to_string(i), {5 + 3 * a, 5 + 2 * b * b});
  }
  const auto table = parse_feature_table(tsv);
  const auto ens = fit_boosted(table, targets, 3, 11, small_boost(3, 0));
  CHECK(ens.target_variables == EmotionFormat::va().variables);
  const Matrix all = predict_boosted(ens, table);
  CHECK(all.rows() == 60);
  CHECK(all.cols() == 2);

  Lexicon stranger(EmotionFormat::va(), "en", "x");
  stranger.add("nobody", {5, 5});
  CHECK(kind_of([&] { fit_boosted(table, stranger, 2, 1); }) == ErrorKind::Contract);
}

TEST_CASE("all models share the fit/predict contract") {
  const auto [train, test] = split(synthetic::affine(120, 21), 80);
  for (auto spec : {ModelSpec::linear(), ModelSpec::knn(), ModelSpec::ffnn_default(), ModelSpec::boosted()}) {
    spec.ffnn.iterations = 50;
    spec.boost.max_stages = 2;
    spec.boost.base.iterations = 50;
    spec.boost.base.hidden_sizes = {8};
    const auto model = MappingModel::fit(spec, train, 3);
    const Matrix pred = model.predict(test.source);
    CHECK(pred.rows() == static_cast<Eigen::Index>(test.size()));
    CHECK(pred.cols() == 5);
    CHECK(model.input_size() == 3);
    CHECK(model.output_size() == 5);
    CHECK(kind_of([&] { model.predict(Matrix::Zero(1, 2)); }) == ErrorKind::Contract);
  }
}

TEST_CASE("linear and k-NN reach high held-out correlation on affine data") {
  const auto [train, test] = split(synthetic::affine(1100, 12), 1000);
  CHECK(min_r(fit_linear(train).predict(test.source), test.target) > 0.9999);
  CHECK(min_r(fit_knn(train).predict(test.source), test.target) > 0.99);
}

TEST_CASE("model specs read from JSON") {
  const auto spec = model_spec_from_json(
      nlohmann::json::parse(R"({"name":"net","kind":"ffnn","iterations":30,"hidden_sizes":[4]})"));
  CHECK(spec.kind == ModelKind::Ffnn);
  CHECK(spec.ffnn.iterations == 30);
  CHECK(spec.ffnn.hidden_sizes == std::vector<int>{4});
  CHECK(spec.ffnn.dropout_hidden == 0.2);
  CHECK(model_spec_from_json(model_spec_to_json(spec)).ffnn.hidden_sizes == spec.ffnn.hidden_sizes);
  CHECK(kind_of([] { model_spec_from_json(nlohmann::json::parse(R"({"kind":"svm"})")); }) ==
        ErrorKind::Configuration);
  CHECK(kind_of([] { model_spec_from_json(nlohmann::json::parse(R"({"kind":"knn","k":0})")); }) ==
        ErrorKind::Configuration);
  CHECK(kind_of([] {
          model_spec_from_json(nlohmann::json::parse(R"({"kind":"ffnn","dropout_hidden":1.0})"));
        }) == ErrorKind::Configuration);
}

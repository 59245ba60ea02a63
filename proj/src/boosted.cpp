#include "emomap/boosted.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "emomap/error.hpp"

namespace emomap {

const double* FeatureTable::find(std::string_view word) const {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] == word) return vectors.row(static_cast<Eigen::Index>(i)).data();
  }
  return nullptr;
}

FeatureTable parse_feature_table(std::string_view tsv, bool lowercase) {
  std::vector<std::string> words;
  std::vector<std::vector<double>> rows;
  std::unordered_map<std::string, std::size_t> seen;
  long line_no = 0;
  while (!tsv.empty()) {
    const auto pos = tsv.find('\n');
    std::string_view line = tsv.substr(0, pos);
    tsv.remove_prefix(pos == std::string_view::npos ? tsv.size() : pos + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      fail(ErrorKind::Parse, "feature row " + std::to_string(line_no) + ": no values");
    }
    std::string word = canonicalize_word(line.substr(0, tab), lowercase);
    std::vector<double> values;
    std::string_view rest = line.substr(tab + 1);
    while (true) {
      const auto next = rest.find('\t');
      const auto cell = rest.substr(0, next);
      double v = 0.0;
      const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || p != cell.data() + cell.size() || !std::isfinite(v)) {
        fail(ErrorKind::Parse, "feature row " + std::to_string(line_no) + ": bad value '" +
                                   std::string(cell) + "'");
      }
      values.push_back(v);
      if (next == std::string_view::npos) break;
      rest.remove_prefix(next + 1);
    }
    if (!rows.empty() && values.size() != rows.front().size()) {
      fail(ErrorKind::Validation, "feature row " + std::to_string(line_no) + ": expected " +
                                      std::to_string(rows.front().size()) + " values, found " +
                                      std::to_string(values.size()));
    }
    if (seen.contains(word)) {
      fail(ErrorKind::Validation, "feature row " + std::to_string(line_no) + ": duplicate word '" +
                                      word + "'");
    }
    seen.emplace(word, rows.size());
    words.push_back(std::move(word));
    rows.push_back(std::move(values));
  }
  FeatureTable table;
  table.words = std::move(words);
  const auto dim = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  table.vectors.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      table.vectors(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    }
  }
  return table;
}

double weighted_median(std::span<const double> values, std::span<const double> weights) {
  require(!values.empty() && values.size() == weights.size(),
          "weighted median needs equally many values and weights");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (double w : weights) total += w;
  double cumulative = 0.0;
  for (auto i : order) {
    cumulative += weights[i];
    if (cumulative >= 0.5 * total) return values[i];
  }
  return values[order.back()];
}

namespace {

std::vector<std::size_t> weighted_resample(std::span<const double> weights, Rng& rng) {
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  const double total = cdf.back();
  std::vector<std::size_t> picks(weights.size());
  for (auto& p : picks) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    p = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), weights.size() - 1);
  }
  return picks;
}

std::vector<BoostStage> fit_one_target(const Matrix& x, const Vector& y, const BoostConfig& cfg,
                                       std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> sample_weight(n, 1.0 / static_cast<double>(n));
  Rng rng(seed);
  std::vector<BoostStage> stages;
  for (int stage = 0; stage < cfg.max_stages; ++stage) {
    const auto picks = weighted_resample(sample_weight, rng);
    Matrix xs(static_cast<Eigen::Index>(n), x.cols());
    Matrix ys(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) {
      xs.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(picks[i]));
      ys(static_cast<Eigen::Index>(i), 0) = y(static_cast<Eigen::Index>(picks[i]));
    }
    FfnnConfig base = cfg.base;
    base.seed = mix_seed(seed, static_cast<std::uint64_t>(stage));
    Network net = train_network(base, xs, ys).network;
    const Matrix pred = forward(net, x, Mode::Eval, 0.0);

    std::vector<double> err(n);
    double err_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = std::fabs(pred(static_cast<Eigen::Index>(i), 0) - y(static_cast<Eigen::Index>(i)));
      err_max = std::max(err_max, err[i]);
    }
    if (err_max > 0.0) {
      for (auto& e : err) e /= err_max;
    }
    double avg_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) avg_loss += sample_weight[i] * err[i];

    if (avg_loss <= 0.0) {
      // Perfect fit: this learner alone decides.
      stages.push_back({std::move(net), 1.0});
      break;
    }
    if (avg_loss >= 0.5) {
      // Too weak to contribute; keep it only when nothing else exists.
      if (stages.empty()) stages.push_back({std::move(net), 1.0});
      break;
    }
    const double beta = avg_loss / (1.0 - avg_loss);
    stages.push_back({std::move(net), std::log(1.0 / beta)});
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sample_weight[i] *= std::pow(beta, 1.0 - err[i]);
      total += sample_weight[i];
    }
    if (!(total > 0.0)) break;
    for (auto& w : sample_weight) w /= total;
  }
  return stages;
}

}  // namespace

BoostedEnsemble fit_boosted(const Matrix& x, const Matrix& y, const BoostConfig& cfg,
                            std::vector<std::string> target_variables) {
  require(x.rows() >= 1, "boosting needs at least one training row");
  require(x.rows() == y.rows(), "boosting: feature and target row counts differ");
  require(cfg.max_stages >= 1, "boosting needs at least one stage");
  for (int h : cfg.base.hidden_sizes) require(h >= 1, "hidden layer sizes must be positive");
  if (target_variables.empty()) {
    for (Eigen::Index j = 0; j < y.cols(); ++j) target_variables.push_back("y" + std::to_string(j));
  }
  require(static_cast<Eigen::Index>(target_variables.size()) == y.cols(),
          "boosting: target variable names do not match target columns");
  BoostedEnsemble ensemble;
  ensemble.config = cfg;
  ensemble.input_size = x.cols();
  ensemble.target_variables = std::move(target_variables);
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    ensemble.ensembles.push_back(fit_one_target(x, y.col(j), cfg,
                                                mix_seed(cfg.seed, static_cast<std::uint64_t>(j))));
  }
  return ensemble;
}

BoostedEnsemble fit_boosted(const FeatureTable& features, const Lexicon& targets, int stages,
                            std::uint64_t seed, BoostConfig cfg) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < features.words.size(); ++i) index.emplace(features.words[i], i);
  std::vector<std::size_t> feature_rows;
  std::vector<const std::vector<double>*> target_rows;
  for (const auto& e : targets.entries()) {
    const auto it = index.find(e.word);
    if (it == index.end()) continue;
    feature_rows.push_back(it->second);
    target_rows.push_back(&e.ratings);
  }
  require(!feature_rows.empty(), "boosting: features and targets share no words");
  const auto n = static_cast<Eigen::Index>(feature_rows.size());
  Matrix x(n, features.dimension());
  Matrix y(n, static_cast<Eigen::Index>(targets.format().size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = features.vectors.row(static_cast<Eigen::Index>(feature_rows[static_cast<std::size_t>(i)]));
    const auto& r = *target_rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < r.size(); ++j) y(i, static_cast<Eigen::Index>(j)) = r[j];
  }
  cfg.max_stages = stages;
  cfg.seed = seed;
  return fit_boosted(x, y, cfg, targets.format().variables);
}

Matrix BoostedEnsemble::predict(const Matrix& x) const {
  if (x.cols() != input_size) {
    fail(ErrorKind::Contract, "boosted ensemble expects " + std::to_string(input_size) +
                                  " input columns, got " + std::to_string(x.cols()));
  }
  Matrix out(x.rows(), static_cast<Eigen::Index>(ensembles.size()));
  for (std::size_t j = 0; j < ensembles.size(); ++j) {
    const auto& stages = ensembles[j];
    std::vector<Matrix> preds;
    std::vector<double> weights;
    for (const auto& s : stages) {
      preds.push_back(forward(s.network, x, Mode::Eval, 0.0));
      weights.push_back(s.weight);
    }
    std::vector<double> values(stages.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (std::size_t s = 0; s < stages.size(); ++s) values[s] = preds[s](i, 0);
      out(i, static_cast<Eigen::Index>(j)) = weighted_median(values, weights);
    }
  }
  return out;
}

Matrix predict_boosted(const BoostedEnsemble& ensemble, const Matrix& x) {
  return ensemble.predict(x);
}

Matrix predict_boosted(const BoostedEnsemble& ensemble, const FeatureTable& features) {
  return ensemble.predict(features.vectors);
}

}  // namespace emomap

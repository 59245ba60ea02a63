#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emomap/ffnn.hpp"

namespace emomap {

/// Word feature vectors (e.g. converted embeddings), one row per word.
struct FeatureTable {
  std::vector<std::string> words;
  Matrix vectors;

  const double* find(std::string_view word) const;
  Eigen::Index dimension() const { return vectors.cols(); }
};

/// TSV `word<TAB>v1<TAB>...<TAB>vD`, no header. Rows must share one length.
FeatureTable parse_feature_table(std::string_view tsv, bool lowercase = false);

struct BoostConfig {
  int max_stages = 50;
  FfnnConfig base = default_base();
  std::uint64_t seed = 0;

  static FfnnConfig default_base() {
    FfnnConfig cfg;
    cfg.hidden_sizes = {100};
    cfg.dropout_hidden = 0.0;
    cfg.iterations = 500;
    return cfg;
  }
};

struct BoostStage {
  Network network;
  double weight = 1.0;
};

/// One AdaBoost.R2 ensemble per target variable.
struct BoostedEnsemble {
  BoostConfig config;
  Eigen::Index input_size = 0;
  std::vector<std::string> target_variables;
  std::vector<std::vector<BoostStage>> ensembles;

  Matrix predict(const Matrix& x) const;
};

/// Weighted median: the smallest value whose cumulative weight (values in
/// ascending order, ties kept in input order) reaches half the total.
double weighted_median(std::span<const double> values, std::span<const double> weights);

/// AdaBoost.R2 with linear loss on every target column of `y`.
BoostedEnsemble fit_boosted(const Matrix& x, const Matrix& y, const BoostConfig& cfg,
                            std::vector<std::string> target_variables = {});

/// Trains on the words present in both `features` and `targets`.
BoostedEnsemble fit_boosted(const FeatureTable& features, const Lexicon& targets, int stages,
                            std::uint64_t seed, BoostConfig cfg = {});

Matrix predict_boosted(const BoostedEnsemble& ensemble, const Matrix& x);
/// Ratings for every word of `features`, as a lexicon-ordered matrix.
Matrix predict_boosted(const BoostedEnsemble& ensemble, const FeatureTable& features);

}  // namespace emomap

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emomap/boosted.hpp"
#include "emomap/lexicon.hpp"
#include "emomap/model.hpp"
#include "emomap/stats.hpp"

namespace emomap {

/// Assignment of item indices to k folds.
struct FoldSplit {
  std::size_t n_items = 0;
  int k_folds = 0;
  std::uint64_t seed = 0;
  std::vector<int> assignment;  // item index -> fold index

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
  std::vector<std::size_t> fold_sizes() const;
};

/// Shuffles 0..n-1 with the seeded generator and deals the result into k
/// contiguous blocks; the n % k leftover items go one each to folds 0, 1, ...
FoldSplit make_folds(std::size_t n, int k = 10, std::uint64_t seed = 0);

/// Datasets are held as dimensional (VA/VAD) source, categorical (BE5)
/// target; cat2dim swaps the roles.
enum class Direction { Cat2Dim, Dim2Cat };

std::string_view to_string(Direction d);
Direction parse_direction(std::string_view name);
AlignedLexicon oriented(const AlignedLexicon& data, Direction d);

/// Trains on `train` and returns predictions for `test.source`.
using Learner =
    std::function<Matrix(const AlignedLexicon& train, const AlignedLexicon& test, std::uint64_t seed)>;

/// With `features`, a boosted spec reads each word's feature vector instead
/// of its source ratings; words without a vector get zeros.
Learner learner_for(const ModelSpec& spec, const FeatureTable* features = nullptr);

struct CrossValidation {
  std::vector<std::string> variables;
  Matrix fold_r;       // k x |t|, NaN where the fold was degenerate
  Matrix predictions;  // n x |t| out-of-fold predictions
  std::vector<std::pair<int, int>> degenerate;  // (fold, variable) cells
};

/// Seed of one training call inside a run.
std::uint64_t cell_seed(std::uint64_t base_seed, std::string_view dataset_id, Direction direction,
                        std::string_view spec_name, int fold);

/// `fold_seed(f)` gives the training seed of fold f.
CrossValidation cross_validate(const Learner& learner, const AlignedLexicon& data,
                               const FoldSplit& folds,
                               const std::function<std::uint64_t(int)>& fold_seed);
CrossValidation cross_validate(const ModelSpec& spec, const AlignedLexicon& data,
                               const FoldSplit& folds, std::uint64_t seed);

enum class ShrFlag { Above, Below, Unreported };
std::string_view to_string(ShrFlag flag);

struct Significance {
  std::string competitor;
  bool degenerate = false;  // no usable difference series; reported as n.s.
  double t = 0.0;
  double p = 1.0;
  int df = 0;
  int stars = 0;
};

struct EvalReport {
  std::string dataset_id;
  Direction direction = Direction::Dim2Cat;
  std::string model;
  std::vector<std::string> variables;
  Matrix fold_r;                 // folds x variables, NaN for degenerate cells
  std::vector<std::pair<int, int>> degenerate;
  Vector mean_r;                 // per variable over non-degenerate folds
  double format_average = 0.0;  // mean of mean_r
  Vector pooled_r;               // r of the pooled out-of-fold predictions
  int rank = 0;                  // 1 = best format average within its (dataset, direction)
  std::optional<Significance> significance;  // best report only, against the runner-up
  std::vector<ShrFlag> shr_flags;
  std::size_t train_size = 0;
  std::vector<std::string> training_ids;

  /// Per-fold mean over variables; NaN where any variable is degenerate.
  std::vector<double> fold_averages() const;
};

/// Summarizes per-fold correlations into an EvalReport (means, averages,
/// pooled r). Ranking, significance and SHR flags are left empty.
EvalReport summarize(std::string dataset_id, Direction direction, std::string model,
                     const CrossValidation& cv, const AlignedLexicon& data);

/// Paired two-tailed t-test on per-fold format averages; folds that are
/// degenerate in either system are dropped.
Significance compare_reports(const EvalReport& best, const EvalReport& runner_up);

/// Flags each target variable against the participant-normalized SHR of
/// the same dataset. Records without normalized_r are normalized here.
EvalReport compare_to_shr(EvalReport report, std::span<const ReliabilityRecord> records);

struct RunOptions {
  std::uint64_t seed = 0;
  int folds = 10;
  int jobs = 1;
  /// Word features per dataset id; required for boosted (WEI) specs.
  const std::map<std::string, FeatureTable>* features = nullptr;
};

/// 10-fold CV for every dataset x direction x spec on folds shared per
/// dataset. Reports are ordered by (dataset, direction, spec).
std::vector<EvalReport> run_monolingual(std::span<const AlignedLexicon> datasets,
                                        std::span<const ModelSpec> specs, const RunOptions& options,
                                        std::span<const ReliabilityRecord> records = {});

struct AblationReport {
  Direction direction = Direction::Dim2Cat;
  std::vector<std::string> variables;  // source variables, each left out once
  std::vector<std::string> dataset_ids;
  std::vector<double> full_average;  // per dataset
  Matrix per_dataset_drop;           // datasets x variables
  Vector drop;                       // mean over datasets
};

/// Leave-one-source-variable-out linear regression on shared folds.
AblationReport run_ablation(std::span<const AlignedLexicon> datasets, Direction direction,
                            const RunOptions& options);

/// Trains on the VA/BE5 projection of every dataset in another language and
/// evaluates once on the whole dataset. Both directions per dataset.
std::vector<EvalReport> run_crosslingual(std::span<const AlignedLexicon> datasets,
                                         const ModelSpec& spec, const RunOptions& options,
                                         std::span<const ReliabilityRecord> records = {});

nlohmann::json report_to_json(const EvalReport& report);
nlohmann::json reports_to_json(std::span<const EvalReport> reports, std::string_view task);
nlohmann::json ablation_to_json(const AblationReport& report);

/// Rows = datasets, column groups = direction x model; format averages with
/// stars; the best cell of each group is wrapped in brackets.
std::string format_average_table(std::span<const EvalReport> reports);
/// Rows = datasets, columns = variables of the best model per direction;
/// SHR flags appended as "+" (above) or "-" (below).
std::string per_variable_table(std::span<const EvalReport> reports);
std::string ablation_table(const AblationReport& report);

/// ".843" style: three decimals, no leading zero; "nan" for NaN.
std::string format_r(double r);

}  // namespace emomap

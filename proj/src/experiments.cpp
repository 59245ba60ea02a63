#include "emomap/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include "emomap/error.hpp"
#include "emomap/rng.hpp"

namespace emomap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(0..count-1) on up to `jobs` threads. Results must be written to
// per-index slots; the first failure by index is rethrown after the join.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::uint64_t fold_split_seed(std::uint64_t seed, std::string_view dataset_id) {
  return mix_seed(mix_seed(seed, dataset_id), "folds");
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double pearson_or_nan(const Matrix& a, const Matrix& b, Eigen::Index col) {
  if (a.rows() < 2) return kNaN;
  try {
    return pearson(Vector(a.col(col)), Vector(b.col(col)));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    return kNaN;
  }
}

void check_unique_ids(std::span<const AlignedLexicon> datasets) {
  std::set<std::string> seen;
  for (const auto& d : datasets) {
    if (!seen.insert(d.id).second) fail(ErrorKind::Configuration, "duplicate dataset id '" + d.id + "'");
  }
}

}  // namespace

std::vector<std::size_t> FoldSplit::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldSplit::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldSplit::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k_folds), 0);
  for (int f : assignment) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldSplit make_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) fail(ErrorKind::Contract, "cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(k) > n) {
    fail(ErrorKind::Contract, "cannot split " + std::to_string(n) + " items into " + std::to_string(k) + " folds");
  }
  FoldSplit split{n, k, seed, std::vector<int>(n, 0)};
  Rng rng(seed);
  const auto order = rng.permutation(n);
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) split.assignment[order[pos++]] = f;
  }
  return split;
}

std::string_view to_string(Direction d) { return d == Direction::Cat2Dim ? "cat2dim" : "dim2cat"; }

Direction parse_direction(std::string_view name) {
  if (name == "cat2dim") return Direction::Cat2Dim;
  if (name == "dim2cat") return Direction::Dim2Cat;
  fail(ErrorKind::Configuration, "unknown direction '" + std::string(name) + "'");
}

AlignedLexicon oriented(const AlignedLexicon& data, Direction d) {
  return d == Direction::Dim2Cat ? data : swap_roles(data);
}

namespace {

Matrix feature_rows(const FeatureTable& table, const std::vector<std::string>& words) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(words.size()), table.dimension());
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (const double* v = table.find(words[i])) {
      x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(v, table.dimension());
    }
  }
  return x;
}

}  // namespace

Learner learner_for(const ModelSpec& spec, const FeatureTable* features) {
  if (spec.kind == ModelKind::Boosted && features != nullptr) {
    return [spec, features](const AlignedLexicon& train, const AlignedLexicon& test, std::uint64_t seed) {
      BoostConfig cfg = spec.boost;
      cfg.seed = seed;
      const auto ensemble = fit_boosted(feature_rows(*features, train.words), train.target, cfg,
                                        train.target_format.variables);
      return ensemble.predict(feature_rows(*features, test.words));
    };
  }
  return [spec](const AlignedLexicon& train, const AlignedLexicon& test, std::uint64_t seed) {
    return MappingModel::fit(spec, train, seed).predict(test.source);
  };
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::string_view dataset_id, Direction direction,
                        std::string_view spec_name, int fold) {
  std::uint64_t s = mix_seed(base_seed, dataset_id);
  s = mix_seed(s, to_string(direction));
  s = mix_seed(s, spec_name);
  return mix_seed(s, static_cast<std::uint64_t>(fold));
}

CrossValidation cross_validate(const Learner& learner, const AlignedLexicon& data,
                               const FoldSplit& folds,
                               const std::function<std::uint64_t(int)>& fold_seed) {
  if (folds.n_items != data.size()) {
    fail(ErrorKind::Contract, "fold split covers " + std::to_string(folds.n_items) +
                                  " items but the dataset has " + std::to_string(data.size()));
  }
  const auto t = static_cast<Eigen::Index>(data.target_format.size());
  CrossValidation cv;
  cv.variables = data.target_format.variables;
  cv.fold_r = Matrix::Constant(folds.k_folds, t, kNaN);
  cv.predictions = Matrix::Zero(static_cast<Eigen::Index>(data.size()), t);
  for (int f = 0; f < folds.k_folds; ++f) {
    const auto test_idx = folds.test_indices(f);
    const auto train = data.rows(folds.train_indices(f));
    const auto test = data.rows(test_idx);
    const Matrix pred = learner(train, test, fold_seed(f));
    if (pred.rows() != static_cast<Eigen::Index>(test.size()) || pred.cols() != t) {
      fail(ErrorKind::Contract, "learner returned a prediction matrix of the wrong shape");
    }
    for (std::size_t i = 0; i < test_idx.size(); ++i) {
      cv.predictions.row(static_cast<Eigen::Index>(test_idx[i])) = pred.row(static_cast<Eigen::Index>(i));
    }
    for (Eigen::Index j = 0; j < t; ++j) {
      cv.fold_r(f, j) = pearson_or_nan(pred, test.target, j);
      if (std::isnan(cv.fold_r(f, j))) cv.degenerate.emplace_back(f, static_cast<int>(j));
    }
  }
  return cv;
}

CrossValidation cross_validate(const ModelSpec& spec, const AlignedLexicon& data,
                               const FoldSplit& folds, std::uint64_t seed) {
  return cross_validate(learner_for(spec), data, folds,
                        [&](int f) { return mix_seed(seed, static_cast<std::uint64_t>(f)); });
}

std::string_view to_string(ShrFlag flag) {
  switch (flag) {
    case ShrFlag::Above: return "above";
    case ShrFlag::Below: return "below";
    default: return "unreported";
  }
}

std::vector<double> EvalReport::fold_averages() const {
  std::vector<double> out;
  for (Eigen::Index f = 0; f < fold_r.rows(); ++f) out.push_back(fold_r.row(f).mean());
  return out;
}

EvalReport summarize(std::string dataset_id, Direction direction, std::string model,
                     const CrossValidation& cv, const AlignedLexicon& data) {
  EvalReport r;
  r.dataset_id = std::move(dataset_id);
  r.direction = direction;
  r.model = std::move(model);
  r.variables = cv.variables;
  r.fold_r = cv.fold_r;
  r.degenerate = cv.degenerate;
  const auto t = cv.fold_r.cols();
  r.mean_r.resize(t);
  r.pooled_r.resize(t);
  for (Eigen::Index j = 0; j < t; ++j) {
    double sum = 0.0;
    int used = 0;
    for (Eigen::Index f = 0; f < cv.fold_r.rows(); ++f) {
      if (std::isnan(cv.fold_r(f, j))) continue;
      sum += cv.fold_r(f, j);
      ++used;
    }
    r.mean_r(j) = used > 0 ? sum / used : kNaN;
    r.pooled_r(j) = pearson_or_nan(cv.predictions, data.target, j);
  }
  r.format_average = r.mean_r.mean();
  r.shr_flags.assign(static_cast<std::size_t>(t), ShrFlag::Unreported);
  return r;
}

Significance compare_reports(const EvalReport& best, const EvalReport& runner_up) {
  Significance s;
  s.competitor = runner_up.model;
  const auto a = best.fold_averages();
  const auto b = runner_up.fold_averages();
  std::vector<double> x, y;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    x.push_back(a[i]);
    y.push_back(b[i]);
  }
  if (x.size() < 2) {
    s.degenerate = true;
    return s;
  }
  try {
    const auto res = paired_t_test(x, y);
    s.t = res.t;
    s.p = res.p_two_tailed;
    s.df = res.df;
    s.stars = res.stars;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    s.degenerate = true;
  }
  return s;
}

EvalReport compare_to_shr(EvalReport report, std::span<const ReliabilityRecord> records) {
  report.shr_flags.assign(report.variables.size(), ShrFlag::Unreported);
  for (std::size_t j = 0; j < report.variables.size(); ++j) {
    const auto var = lower(report.variables[j]);
    for (const auto& rec : records) {
      if (rec.dataset_id != report.dataset_id || lower(rec.variable) != var) continue;
      const double shr = rec.normalized_r ? *rec.normalized_r : *normalize_shr(rec).normalized_r;
      report.shr_flags[j] =
          report.mean_r(static_cast<Eigen::Index>(j)) > shr ? ShrFlag::Above : ShrFlag::Below;
      break;
    }
  }
  return report;
}

namespace {

// Assigns ranks and the best-vs-runner-up test inside each consecutive
// (dataset, direction) group of reports.
void rank_groups(std::vector<EvalReport>& reports, std::size_t group_size) {
  for (std::size_t start = 0; start < reports.size(); start += group_size) {
    std::vector<std::size_t> order(group_size);
    for (std::size_t i = 0; i < group_size; ++i) order[i] = start + i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double x = reports[a].format_average, y = reports[b].format_average;
      if (std::isnan(x) || std::isnan(y)) return !std::isnan(x) && std::isnan(y);
      return x > y;
    });
    for (std::size_t r = 0; r < order.size(); ++r) reports[order[r]].rank = static_cast<int>(r + 1);
    if (group_size >= 2) {
      reports[order[0]].significance = compare_reports(reports[order[0]], reports[order[1]]);
    }
  }
}

constexpr Direction kDirections[] = {Direction::Cat2Dim, Direction::Dim2Cat};

const FeatureTable* features_for(const RunOptions& options, const ModelSpec& spec, const std::string& id) {
  if (spec.kind != ModelKind::Boosted) return nullptr;
  if (options.features) {
    const auto it = options.features->find(id);
    if (it != options.features->end()) return &it->second;
  }
  fail(ErrorKind::Configuration, "model " + spec.name + " needs word features for dataset '" + id + "'");
}

}  // namespace

std::vector<EvalReport> run_monolingual(std::span<const AlignedLexicon> datasets,
                                        std::span<const ModelSpec> specs, const RunOptions& options,
                                        std::span<const ReliabilityRecord> records) {
  if (datasets.empty()) fail(ErrorKind::Configuration, "monolingual run needs at least one dataset");
  if (specs.empty()) fail(ErrorKind::Configuration, "monolingual run needs at least one model spec");
  check_unique_ids(datasets);
  std::set<std::string> names;
  for (const auto& s : specs) {
    if (!names.insert(s.name).second) fail(ErrorKind::Configuration, "duplicate model name '" + s.name + "'");
  }

  std::vector<FoldSplit> folds;
  for (const auto& d : datasets) folds.push_back(make_folds(d.size(), options.folds, fold_split_seed(options.seed, d.id)));

  const std::size_t per_dataset = 2 * specs.size();
  std::vector<EvalReport> reports(datasets.size() * per_dataset);
  parallel_for(reports.size(), options.jobs, [&](std::size_t cell) {
    const std::size_t d = cell / per_dataset;
    const Direction dir = kDirections[(cell % per_dataset) / specs.size()];
    const ModelSpec& spec = specs[cell % specs.size()];
    const auto data = oriented(datasets[d], dir);
    const auto cv = cross_validate(learner_for(spec, features_for(options, spec, data.id)), data, folds[d], [&](int f) {
      return cell_seed(options.seed, data.id, dir, spec.name, f);
    });
    reports[cell] = compare_to_shr(summarize(data.id, dir, spec.name, cv, data), records);
  });
  rank_groups(reports, specs.size());
  return reports;
}

AblationReport run_ablation(std::span<const AlignedLexicon> datasets, Direction direction,
                            const RunOptions& options) {
  if (datasets.empty()) fail(ErrorKind::Configuration, "ablation needs at least one dataset");
  const std::string dominance = EmotionFormat::vad().variables[2];
  std::vector<AlignedLexicon> data;
  for (const auto& d : datasets) {
    if (!d.source_format.index_of(dominance)) {
      fail(ErrorKind::Configuration, "ablation dataset '" + d.id + "' has no dominance ratings");
    }
    data.push_back(oriented(d, direction));
    if (data.back().source_format.variables != data.front().source_format.variables) {
      fail(ErrorKind::Configuration, "ablation datasets must share their source variables");
    }
  }
  AblationReport report;
  report.direction = direction;
  report.variables = data.front().source_format.variables;
  if (report.variables.size() < 2) fail(ErrorKind::Configuration, "ablation needs at least two source variables");
  for (const auto& d : data) report.dataset_ids.push_back(d.id);

  const std::size_t variants = report.variables.size() + 1;  // full model first
  const ModelSpec lr = ModelSpec::linear();
  std::vector<double> averages(data.size() * variants);
  parallel_for(averages.size(), options.jobs, [&](std::size_t cell) {
    const std::size_t d = cell / variants;
    const std::size_t v = cell % variants;
    AlignedLexicon input = data[d];
    std::string name = "full";
    if (v > 0) {
      std::vector<std::string> keep;
      for (std::size_t j = 0; j < report.variables.size(); ++j) {
        if (j != v - 1) keep.push_back(report.variables[j]);
      }
      input = project_source(input, keep);
      name = "without-" + report.variables[v - 1];
    }
    const auto folds = make_folds(input.size(), options.folds, fold_split_seed(options.seed, input.id));
    const auto cv = cross_validate(learner_for(lr), input, folds, [&](int f) {
      return cell_seed(options.seed, input.id, direction, name, f);
    });
    averages[cell] = summarize(input.id, direction, name, cv, input).format_average;
  });

  report.per_dataset_drop.resize(static_cast<Eigen::Index>(data.size()),
                                 static_cast<Eigen::Index>(report.variables.size()));
  for (std::size_t d = 0; d < data.size(); ++d) {
    const double full = averages[d * variants];
    report.full_average.push_back(full);
    for (std::size_t v = 1; v < variants; ++v) {
      report.per_dataset_drop(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(v - 1)) =
          full - averages[d * variants + v];
    }
  }
  report.drop = report.per_dataset_drop.colwise().mean().transpose();
  return report;
}

namespace {

// VA/BE5 view of a dimensional->categorical dataset.
AlignedLexicon without_dominance(const AlignedLexicon& d) {
  const auto& va = EmotionFormat::va().variables;
  for (const auto& v : va) {
    if (!d.source_format.index_of(v)) {
      fail(ErrorKind::Configuration, "dataset '" + d.id + "' lacks the " + v + " variable");
    }
  }
  return project_source(d, va);
}

}  // namespace

std::vector<EvalReport> run_crosslingual(std::span<const AlignedLexicon> datasets,
                                         const ModelSpec& spec, const RunOptions& options,
                                         std::span<const ReliabilityRecord> records) {
  check_unique_ids(datasets);
  std::vector<AlignedLexicon> projected;
  std::set<std::string> languages;
  for (const auto& d : datasets) {
    projected.push_back(without_dominance(d));
    languages.insert(d.language);
  }
  if (languages.size() < 2) {
    fail(ErrorKind::Configuration, "cross-lingual evaluation needs datasets in at least two languages");
  }

  std::vector<EvalReport> reports(datasets.size() * 2);
  parallel_for(reports.size(), options.jobs, [&](std::size_t cell) {
    const std::size_t d = cell / 2;
    const Direction dir = kDirections[cell % 2];
    const auto& eval_lang = projected[d].language;
    std::vector<AlignedLexicon> parts;
    std::vector<std::string> ids;
    for (const auto& other : projected) {
      if (other.language == eval_lang) continue;
      parts.push_back(other);
      ids.push_back(other.id);
    }
    if (parts.empty()) {
      fail(ErrorKind::Configuration, "no out-of-language training data for dataset '" + projected[d].id + "'");
    }
    const auto train = oriented(concat(parts), dir);
    for (const auto& origin : train.origins) {
      require(origin.language != eval_lang, "cross-lingual training set contains an in-language row");
    }
    const auto test = oriented(projected[d], dir);
    const auto model = MappingModel::fit(spec, train, cell_seed(options.seed, test.id, dir, spec.name, 0));
    CrossValidation cv;
    cv.variables = test.target_format.variables;
    cv.predictions = model.predict(test.source);
    cv.fold_r.resize(1, static_cast<Eigen::Index>(cv.variables.size()));
    for (Eigen::Index j = 0; j < cv.fold_r.cols(); ++j) {
      cv.fold_r(0, j) = pearson_or_nan(cv.predictions, test.target, j);
      if (std::isnan(cv.fold_r(0, j))) cv.degenerate.emplace_back(0, static_cast<int>(j));
    }
    auto report = compare_to_shr(summarize(test.id, dir, spec.name, cv, test), records);
    report.rank = 1;
    report.train_size = train.size();
    report.training_ids = std::move(ids);
    reports[cell] = std::move(report);
  });
  return reports;
}

namespace {

nlohmann::json number(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

nlohmann::json vector_json(const Vector& v) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["dataset"] = r.dataset_id;
  j["direction"] = std::string(to_string(r.direction));
  j["model"] = r.model;
  j["variables"] = r.variables;
  auto folds = nlohmann::json::array();
  for (Eigen::Index f = 0; f < r.fold_r.rows(); ++f) folds.push_back(vector_json(r.fold_r.row(f).transpose()));
  j["fold_r"] = folds;
  auto degenerate = nlohmann::json::array();
  for (const auto& [f, v] : r.degenerate) {
    degenerate.push_back({{"fold", f}, {"variable", r.variables[static_cast<std::size_t>(v)]}});
  }
  j["degenerate_folds"] = degenerate;
  j["mean_r"] = vector_json(r.mean_r);
  j["format_average"] = number(r.format_average);
  j["pooled_r"] = vector_json(r.pooled_r);
  j["rank"] = r.rank;
  if (r.significance) {
    const auto& s = *r.significance;
    j["significance"] = {{"competitor", s.competitor},
                         {"label", s.degenerate ? std::string("n.s.") : std::string(format_stars(s.stars))},
                         {"t", s.degenerate ? nlohmann::json(nullptr) : number(s.t)},
                         {"p", s.degenerate ? nlohmann::json(nullptr) : number(s.p)},
                         {"df", s.df},
                         {"stars", s.stars}};
  } else {
    j["significance"] = nullptr;
  }
  auto flags = nlohmann::json::array();
  for (auto f : r.shr_flags) flags.push_back(std::string(to_string(f)));
  j["shr_flags"] = flags;
  if (!r.training_ids.empty()) {
    j["train_size"] = r.train_size;
    j["training_ids"] = r.training_ids;
  }
  return j;
}

nlohmann::json reports_to_json(std::span<const EvalReport> reports, std::string_view task) {
  nlohmann::json j;
  j["task"] = std::string(task);
  j["headline"] = "mean of per-fold r";
  j["t_test"] = "paired two-tailed, per-fold format-average r";
  auto list = nlohmann::json::array();
  for (const auto& r : reports) list.push_back(report_to_json(r));
  j["reports"] = list;
  return j;
}

nlohmann::json ablation_to_json(const AblationReport& a) {
  nlohmann::json j;
  j["direction"] = std::string(to_string(a.direction));
  j["variables"] = a.variables;
  j["datasets"] = a.dataset_ids;
  auto full = nlohmann::json::array();
  for (double v : a.full_average) full.push_back(number(v));
  j["full_average"] = full;
  auto rows = nlohmann::json::array();
  for (Eigen::Index d = 0; d < a.per_dataset_drop.rows(); ++d) {
    rows.push_back(vector_json(a.per_dataset_drop.row(d).transpose()));
  }
  j["per_dataset_drop"] = rows;
  j["drop"] = vector_json(a.drop);
  return j;
}

std::string format_r(double r) {
  if (std::isnan(r)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, r, std::chars_format::fixed, 3);
  std::string s(buf, res.ptr);
  if (s == "-0.000") s = "0.000";
  if (s.starts_with("0.")) s.erase(0, 1);
  if (s.starts_with("-0.")) s.erase(1, 1);
  return s;
}

namespace {

template <typename T>
std::size_t index_in(std::vector<T>& list, const T& value) {
  const auto it = std::find(list.begin(), list.end(), value);
  if (it != list.end()) return static_cast<std::size_t>(it - list.begin());
  list.push_back(value);
  return list.size() - 1;
}

}  // namespace

std::string format_average_table(std::span<const EvalReport> reports) {
  std::vector<std::string> datasets;
  std::vector<std::pair<Direction, std::string>> groups;
  std::map<Direction, std::set<std::string>> models_per_direction;
  std::map<std::pair<std::size_t, std::size_t>, const EvalReport*> cells;
  for (const auto& r : reports) {
    const auto d = index_in(datasets, r.dataset_id);
    const auto g = index_in(groups, {r.direction, r.model});
    models_per_direction[r.direction].insert(r.model);
    cells[{d, g}] = &r;
  }
  std::string out = "dataset";
  for (const auto& [dir, model] : groups) out += "\t" + std::string(to_string(dir)) + ":" + model;
  out += "\n";
  std::vector<double> sums(groups.size(), 0.0);
  std::vector<int> counts(groups.size(), 0);
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    out += datasets[d];
    for (std::size_t g = 0; g < groups.size(); ++g) {
      out += "\t";
      const auto it = cells.find({d, g});
      if (it == cells.end()) {
        out += "---";
        continue;
      }
      const auto& r = *it->second;
      std::string cell = format_r(r.format_average);
      if (r.rank == 1 && models_per_direction[r.direction].size() > 1) cell = "[" + cell + "]";
      if (r.significance && !r.significance->degenerate) cell += format_stars(r.significance->stars);
      out += cell;
      if (!std::isnan(r.format_average)) {
        sums[g] += r.format_average;
        ++counts[g];
      }
    }
    out += "\n";
  }
  std::vector<double> avg(groups.size(), kNaN);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (counts[g] > 0) avg[g] = sums[g] / counts[g];
  }
  out += "Avg.";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::string cell = format_r(avg[g]);
    bool best = models_per_direction[groups[g].first].size() > 1 && !std::isnan(avg[g]);
    for (std::size_t h = 0; best && h < groups.size(); ++h) {
      if (h != g && groups[h].first == groups[g].first && !std::isnan(avg[h]) && avg[h] > avg[g]) best = false;
    }
    out += "\t" + (best ? "[" + cell + "]" : cell);
  }
  return out + "\n";
}

std::string per_variable_table(std::span<const EvalReport> reports) {
  std::vector<std::string> datasets;
  std::vector<std::pair<Direction, std::string>> columns;
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, ShrFlag>> cells;
  for (const auto& r : reports) {
    const auto d = index_in(datasets, r.dataset_id);
    if (r.rank != 1) continue;
    for (std::size_t j = 0; j < r.variables.size(); ++j) {
      const auto c = index_in(columns, {r.direction, r.variables[j]});
      cells[{d, c}] = {r.mean_r(static_cast<Eigen::Index>(j)), r.shr_flags[j]};
    }
  }
  std::string out = "dataset";
  for (const auto& [dir, var] : columns) out += "\t" + std::string(to_string(dir)) + ":" + var;
  out += "\n";
  std::vector<double> sums(columns.size(), 0.0);
  std::vector<int> counts(columns.size(), 0);
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    out += datasets[d];
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto it = cells.find({d, c});
      if (it == cells.end()) {
        out += "\t---";
        continue;
      }
      const auto [r, flag] = it->second;
      out += "\t" + format_r(r) + (flag == ShrFlag::Above ? "+" : flag == ShrFlag::Below ? "-" : "");
      if (!std::isnan(r)) {
        sums[c] += r;
        ++counts[c];
      }
    }
    out += "\n";
  }
  out += "Avg.";
  for (std::size_t c = 0; c < columns.size(); ++c) out += "\t" + format_r(counts[c] ? sums[c] / counts[c] : kNaN);
  return out + "\n";
}

std::string ablation_table(const AblationReport& a) {
  std::string out = "left_out\tdrop";
  for (const auto& id : a.dataset_ids) out += "\t" + id;
  out += "\n";
  for (std::size_t v = 0; v < a.variables.size(); ++v) {
    out += a.variables[v] + "\t" + format_r(a.drop(static_cast<Eigen::Index>(v)));
    for (Eigen::Index d = 0; d < a.per_dataset_drop.rows(); ++d) {
      out += "\t" + format_r(a.per_dataset_drop(d, static_cast<Eigen::Index>(v)));
    }
    out += "\n";
  }
  return out;
}

}  // namespace emomap

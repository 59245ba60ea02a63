#include "emomap_cli.hpp"

#include <algorithm>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "emomap/experiments.hpp"
#include "emomap/gradient_check.hpp"
#include "emomap/lexgen.hpp"
#include "emomap/manifest.hpp"
#include "emomap/model.hpp"
#include "emomap/rng.hpp"

#ifndef EMOMAP_VERSION
#define EMOMAP_VERSION "0.0.0"
#endif

namespace emomap::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Divergence: return kExitDivergence;
    default: return kExitValidation;
  }
}

namespace {

void report_error(std::ostream& err, const Error& e) {
  json j{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
  if (const auto* d = dynamic_cast<const DivergenceError*>(&e)) j["iteration"] = d->iteration();
  err << j.dump() << "\n";
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    report_error(err, e);
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return kExitIo;
  }
}

// Outputs of one task, keyed by file name; written in name order.
class RunWriter {
public:
  explicit RunWriter(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string text) { files_[name] = std::move(text); }
  void add_json(const std::string& name, const json& j) { add(name, j.dump(2) + "\n"); }

  void commit(json metadata) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory " + dir_.string() + ": " + ec.message());
    json outputs = json::object();
    for (const auto& [name, text] : files_) {
      write_text(dir_ / name, text);
      outputs[name] = sha256_hex(text);
    }
    metadata["outputs"] = outputs;
    write_text(dir_ / (metadata.at("task").get<std::string>() + "_run_metadata.json"), metadata.dump(2) + "\n");
  }

private:
  fs::path dir_;
  std::map<std::string, std::string> files_;
};

std::uint64_t effective_seed(const ManifestArgs& args, const ExperimentManifest& m) {
  if (args.seed) return *args.seed;
  if (m.seed) return *m.seed;
  fail(ErrorKind::Configuration, "no seed: set 'seed' in the manifest or pass --seed");
}

void emit_diagnostics(std::ostream& err, const LoadedInputs& in) {
  for (std::size_t i = 0; i < in.diagnostics.size(); ++i) {
    const auto& d = in.diagnostics[i];
    err << json{{"warning", d.kind},
                {"source", in.diagnostic_sources[i]},
                {"row", d.row},
                {"word", d.word},
                {"message", d.message}}
               .dump()
        << "\n";
  }
}

const ModelSpec& crosslingual_spec(const ExperimentManifest& m) {
  if (m.crosslingual_model) return *m.crosslingual_model;
  for (const auto& s : m.models) {
    if (s.kind == ModelKind::Ffnn) return s;
  }
  fail(ErrorKind::Configuration, "crosslingual run needs 'crosslingual_model' or an ffnn entry in 'models'");
}

std::vector<AlignedLexicon> selected(const LoadedInputs& in, const std::vector<std::string>& ids) {
  if (ids.empty()) return in.datasets;
  std::vector<AlignedLexicon> out;
  for (const auto& id : ids) out.push_back(in.dataset(id));
  return out;
}

void write_report_set(RunWriter& w, const std::string& task, std::span<const EvalReport> reports) {
  w.add_json(task + ".json", reports_to_json(reports, task));
  w.add(task + "_average.tsv", format_average_table(reports));
  w.add(task + "_per_variable.tsv", per_variable_table(reports));
}

AlignedLexicon build_training(const BuildSource& b, const LoadedInputs& in) {
  std::vector<AlignedLexicon> parts;
  for (const auto& id : b.training) {
    auto d = in.dataset(id);
    if (b.mode == BuildMode::Crosslingual) d = project_source(d, EmotionFormat::va().variables);
    parts.push_back(oriented(d, b.direction));
  }
  return parts.size() == 1 ? parts.front() : concat(parts);
}

void run_task(const std::string& task, const ExperimentManifest& m, const LoadedInputs& in,
              std::uint64_t seed, int jobs, RunWriter& w) {
  RunOptions opts{seed, m.folds, jobs, &in.features};
  if (task == "monolingual") {
    write_report_set(w, task, run_monolingual(in.datasets, m.models, opts, in.reliability));
  } else if (task == "crosslingual") {
    write_report_set(w, task, run_crosslingual(in.datasets, crosslingual_spec(m), opts, in.reliability));
  } else if (task == "ablation") {
    const auto data = selected(in, m.ablation_datasets);
    json j = json::object();
    for (Direction dir : {Direction::Cat2Dim, Direction::Dim2Cat}) {
      const auto report = run_ablation(data, dir, opts);
      j[std::string(to_string(dir))] = ablation_to_json(report);
      w.add("ablation_" + std::string(to_string(dir)) + ".tsv", ablation_table(report));
    }
    w.add_json("ablation.json", j);
  } else if (task == "shr-normalize") {
    if (!m.reliability) fail(ErrorKind::Configuration, "shr-normalize needs 'reliability' in the manifest");
    std::vector<ReliabilityRecord> out;
    for (const auto& r : in.reliability) out.push_back(normalize_shr(r));
    w.add("reliability_normalized.tsv", format_reliability_records(out));
  } else if (task == "build-lexicon") {
    if (m.builds.empty()) fail(ErrorKind::Configuration, "build-lexicon needs at least one entry in 'builds'");
    for (const auto& b : m.builds) {
      LexiconBuildJob job;
      job.mode = b.mode;
      job.source_lexicon = in.lexicon(b.source);
      job.training = build_training(b, in);
      job.spec = m.model(b.model);
      for (const auto& x : b.exclude) job.exclusion_sets.push_back(in.lexicon(x));
      job.output_id = b.output;
      job.seed = mix_seed(seed, b.id);
      const auto res = build_lexicon(job);
      w.add(b.output + ".tsv", format_lexicon(res.lexicon));
      w.add_json(b.output + ".manifest.json", res.manifest.to_json());
    }
  } else {
    fail(ErrorKind::Configuration, "unknown task '" + task + "'");
  }
}

ExperimentManifest load(const ManifestArgs& args) { return load_manifest(args.manifest, args.overrides); }

// --- gradient-check -------------------------------------------------------

struct GradientArgs {
  std::uint64_t seed = 0;
  int networks = 10;
  std::vector<int> hidden{8, 8};
  double tolerance = 1e-4;
};

int cmd_gradient_check(const GradientArgs& a, std::ostream& out) {
  double worst = 0.0;
  json rows = json::array();
  for (int i = 0; i < a.networks; ++i) {
    GradientCheckConfig cfg;
    cfg.hidden_sizes = a.hidden;
    cfg.seed = mix_seed(a.seed, static_cast<std::uint64_t>(i));
    const auto sample = random_gradient_sample(10, cfg.input_size, cfg.output_size, mix_seed(cfg.seed, "sample"));
    const double e = gradient_check(cfg, sample);
    worst = std::max(worst, e);
    rows.push_back({{"network", i}, {"max_relative_error", e}});
  }
  const bool pass = worst < a.tolerance;
  out << json{{"networks", rows}, {"max_relative_error", worst}, {"tolerance", a.tolerance}, {"pass", pass}}.dump(2)
      << "\n";
  return pass ? kExitOk : kExitDivergence;
}

// --- model save / load / predict -----------------------------------------

struct ModelArgs {
  ManifestArgs manifest;
  std::string dataset;
  std::string direction = "dim2cat";
  std::string model;
  fs::path file;
  fs::path input;
  std::optional<fs::path> output;
};

int cmd_model_save(const ModelArgs& a, std::ostream& out) {
  const auto m = load(a.manifest);
  const auto seed = effective_seed(a.manifest, m);
  const auto in = load_inputs(m);
  const auto data = oriented(in.dataset(a.dataset), parse_direction(a.direction));
  const auto& spec = m.model(a.model);
  const auto model = MappingModel::fit(spec, data, cell_seed(seed, data.id, parse_direction(a.direction), spec.name, 0));
  write_text(a.file, serialize_model(model));
  out << json{{"file", a.file.string()}, {"dataset", data.id}, {"direction", a.direction}, {"model", spec.name},
              {"train_size", data.size()}}
             .dump()
      << "\n";
  return kExitOk;
}

MappingModel read_model(const fs::path& file) { return deserialize_model(read_text(file)); }

json format_json(const EmotionFormat& f) {
  return {{"name", f.name}, {"variables", f.variables}, {"scale", {f.scale_low, f.scale_high}}};
}

int cmd_model_load(const ModelArgs& a, std::ostream& out) {
  const auto model = read_model(a.file);
  out << json{{"kind", std::string(to_string(model.kind()))},
              {"source_format", format_json(model.source_format())},
              {"target_format", format_json(model.target_format())}}
             .dump(2)
      << "\n";
  return kExitOk;
}

int cmd_model_predict(const ModelArgs& a, std::ostream& out) {
  const auto model = read_model(a.file);
  const auto lex = parse_lexicon(read_text(a.input), model.source_format(), {}, {}, nullptr, "und", "input");
  Matrix x(static_cast<Eigen::Index>(lex.size()), static_cast<Eigen::Index>(lex.format().size()));
  for (std::size_t i = 0; i < lex.size(); ++i) {
    for (std::size_t j = 0; j < lex.format().size(); ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lex.entries()[i].ratings[j];
    }
  }
  const auto& t = model.target_format();
  const Matrix pred = model.predict(x).cwiseMax(t.scale_low).cwiseMin(t.scale_high);
  Lexicon result(t, lex.language(), "predicted");
  for (std::size_t i = 0; i < lex.size(); ++i) {
    const auto row = pred.row(static_cast<Eigen::Index>(i));
    result.add(lex.entries()[i].word, std::vector<double>(row.data(), row.data() + row.size()));
  }
  if (a.output) {
    write_lexicon(result, *a.output);
  } else {
    out << format_lexicon(result);
  }
  return kExitOk;
}

void add_manifest_options(CLI::App* cmd, ManifestArgs& a, bool with_run_flags) {
  cmd->add_option("--manifest", a.manifest, "Experiment manifest (JSON)")->required();
  cmd->add_option("--set", a.overrides, "Override a manifest key: key.path=value")->take_all();
  cmd->add_option("--seed", a.seed, "Base seed, overrides the manifest");
  if (with_run_flags) {
    cmd->add_option("--out", a.out, "Output directory");
    cmd->add_option("--jobs", a.jobs, "Worker threads")->check(CLI::PositiveNumber);
  }
}

}  // namespace

int cmd_validate(const ManifestArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto m = load(args);
    const auto report = validate_inputs(m);
    const auto text = report.to_json().dump(2) + "\n";
    out << text;
    if (args.out) {
      std::error_code ec;
      fs::create_directories(*args.out, ec);
      if (ec) fail(ErrorKind::Io, "cannot create output directory " + args.out->string());
      write_text(*args.out / "validation.json", text);
    }
    if (report.ok()) return kExitOk;
    return report.io_failure ? kExitIo : kExitValidation;
  });
}

int cmd_run(const ManifestArgs& args, const std::string& task, std::ostream& out, std::ostream& err) {
  if (std::find(std::begin(kTasks), std::end(kTasks), task) == std::end(kTasks)) {
    err << json{{"error", "usage"}, {"message", "unknown task '" + task + "'"}}.dump() << "\n";
    return kExitUsage;
  }
  return guarded(err, [&] {
    const auto m = load(args);
    const auto seed = effective_seed(args, m);
    const auto report = validate_inputs(m);
    if (!report.ok()) {
      err << report.to_json().dump() << "\n";
      return report.io_failure ? kExitIo : kExitValidation;
    }
    const auto in = load_inputs(m);
    emit_diagnostics(err, in);
    RunWriter writer(args.out ? *args.out : m.resolve(m.output_dir));
    run_task(task, m, in, seed, args.jobs, writer);
    writer.commit({{"tool", "emomap"},
                   {"version", EMOMAP_VERSION},
                   {"task", task},
                   {"manifest_digest", m.digest},
                   {"seed", seed},
                   {"folds", m.folds},
                   {"input_digests", in.digests}});
    out << json{{"task", task}, {"status", "ok"}}.dump() << "\n";
    return kExitOk;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Emotion representation mapping: evaluation and lexicon generation", "emomap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", EMOMAP_VERSION);

  ManifestArgs validate_args;
  auto* validate = app.add_subcommand("validate", "Check every declared input and report problems");
  add_manifest_options(validate, validate_args, false);
  validate->add_option("--out", validate_args.out, "Also write validation.json here");

  ManifestArgs run_args;
  std::string task;
  auto* run = app.add_subcommand("run", "Run an experiment task");
  run->add_option("task", task, "monolingual|crosslingual|ablation|shr-normalize|build-lexicon")
      ->required()
      ->check(CLI::IsMember(std::vector<std::string>(std::begin(kTasks), std::end(kTasks))));
  add_manifest_options(run, run_args, true);

  GradientArgs grad;
  auto* gradient = app.add_subcommand("gradient-check", "Compare analytic and numeric FFNN gradients");
  gradient->add_option("--seed", grad.seed);
  gradient->add_option("--networks", grad.networks)->check(CLI::PositiveNumber);
  gradient->add_option("--hidden", grad.hidden, "Hidden layer sizes")->delimiter(',');
  gradient->add_option("--tolerance", grad.tolerance);

  ModelArgs model_args;
  auto* model = app.add_subcommand("model", "Save, inspect or apply a trained mapping model");
  model->require_subcommand(1);
  auto* save = model->add_subcommand("save", "Train on a whole dataset and save the model");
  add_manifest_options(save, model_args.manifest, false);
  save->add_option("--dataset", model_args.dataset)->required();
  save->add_option("--direction", model_args.direction)->check(CLI::IsMember({"cat2dim", "dim2cat"}));
  save->add_option("--model", model_args.model, "Model name from the manifest")->required();
  save->add_option("--file", model_args.file)->required();
  auto* load_cmd = model->add_subcommand("load", "Print a saved model's description");
  load_cmd->add_option("--file", model_args.file)->required();
  auto* predict = model->add_subcommand("predict", "Rate the words of a lexicon with a saved model");
  predict->add_option("--file", model_args.file)->required();
  predict->add_option("--input", model_args.input, "Lexicon TSV in the model's source format")->required();
  predict->add_option("--output", model_args.output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*validate) return cmd_validate(validate_args, out, err);
  if (*run) return cmd_run(run_args, task, out, err);
  if (*gradient) return guarded(err, [&] { return cmd_gradient_check(grad, out); });
  if (*save) return guarded(err, [&] { return cmd_model_save(model_args, out); });
  if (*load_cmd) return guarded(err, [&] { return cmd_model_load(model_args, out); });
  if (*predict) return guarded(err, [&] { return cmd_model_predict(model_args, out); });
  return kExitUsage;
}

}  // namespace emomap::cli

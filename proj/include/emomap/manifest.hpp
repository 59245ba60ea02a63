#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emomap/boosted.hpp"
#include "emomap/experiments.hpp"
#include "emomap/lexgen.hpp"
#include "emomap/lexicon.hpp"
#include "emomap/model.hpp"
#include "emomap/stats.hpp"

namespace emomap {

/// One lexicon file and how to read it.
struct LexiconSource {
  std::string id;
  std::filesystem::path path;  // relative paths resolve against the manifest directory
  std::string format;          // "VAD", "VA" or "BE5"
  std::string language = "und";
  ColumnMap columns;
  std::optional<std::pair<double, double>> file_scale;  // scale used in the file, if not the built-in one
  bool lowercase = false;
  bool clamp = false;
};

/// A dimensional and a categorical lexicon of one language, aligned on
/// their shared words.
struct DatasetSource {
  std::string id;
  std::string dimensional;  // lexicon id
  std::string categorical;  // lexicon id
  std::optional<std::filesystem::path> features;
};

struct BuildSource {
  std::string id;
  BuildMode mode = BuildMode::Monolingual;
  Direction direction = Direction::Dim2Cat;
  std::string source;                 // lexicon id
  std::vector<std::string> training;  // dataset ids
  std::string model;                  // name in `models`
  std::vector<std::string> exclude;   // lexicon ids
  std::string output;                 // file stem inside the output directory
};

struct ExperimentManifest {
  nlohmann::json document;  // after overrides
  std::filesystem::path base_dir;
  std::string digest;       // SHA-256 of the canonical dump of `document`

  std::optional<std::uint64_t> seed;
  int folds = 10;
  std::filesystem::path output_dir = "out";
  std::vector<LexiconSource> lexicons;
  std::vector<DatasetSource> datasets;
  std::optional<std::filesystem::path> reliability;
  std::vector<ModelSpec> models;
  std::optional<ModelSpec> crosslingual_model;
  std::vector<std::string> ablation_datasets;  // empty = every dataset
  std::vector<BuildSource> builds;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
  const ModelSpec& model(std::string_view name) const;
};

/// `key.path.0=value`: the value is read as JSON when it parses, as a
/// string otherwise. Numeric segments index arrays.
void apply_override(nlohmann::json& document, std::string_view assignment);

ExperimentManifest parse_manifest(nlohmann::json document, std::filesystem::path base_dir);
ExperimentManifest load_manifest(const std::filesystem::path& path,
                                 std::span<const std::string> overrides = {});

struct LoadedInputs {
  std::map<std::string, Lexicon> lexicons;
  std::vector<AlignedLexicon> datasets;  // manifest order
  std::map<std::string, FeatureTable> features;
  std::vector<ReliabilityRecord> reliability;
  std::map<std::string, std::string> digests;  // manifest path -> SHA-256 of the file bytes
  Diagnostics diagnostics;
  std::vector<std::string> diagnostic_sources;  // parallel to diagnostics

  const AlignedLexicon& dataset(std::string_view id) const;
  const Lexicon& lexicon(std::string_view id) const;
};

/// Reads, rescales and aligns everything the manifest declares. Throws on
/// the first error.
LoadedInputs load_inputs(const ExperimentManifest& manifest);

struct ValidationIssue {
  std::string source;
  std::string severity;  // "error" or "warning"
  std::string kind;
  long row = 0;
  std::string word;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool io_failure = false;

  bool ok() const;
  nlohmann::json to_json() const;
};

/// Checks every declared input independently and collects all problems.
ValidationReport validate_inputs(const ExperimentManifest& manifest);

}  // namespace emomap

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emomap/lexicon.hpp"
#include "emomap/model.hpp"

namespace emomap {

enum class BuildMode { Monolingual, Crosslingual };

std::string_view to_string(BuildMode mode);
BuildMode parse_build_mode(std::string_view name);

struct LexiconBuildJob {
  BuildMode mode = BuildMode::Monolingual;
  Lexicon source_lexicon{EmotionFormat::vad(), ""};
  AlignedLexicon training;
  ModelSpec spec = ModelSpec::ffnn_default();
  std::vector<Lexicon> exclusion_sets;  // words already rated in the target format
  std::string output_id = "generated";
  std::uint64_t seed = 0;
};

struct BuildManifest {
  BuildMode mode = BuildMode::Monolingual;
  std::vector<std::string> training_ids;
  std::size_t training_size = 0;
  std::map<std::string, std::size_t> excluded_counts;  // per exclusion set
  std::size_t excluded_total = 0;
  std::size_t output_count = 0;
  nlohmann::json model_config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;
  std::string output_digest;  // SHA-256 of the exported TSV

  nlohmann::json to_json() const;
};

struct BuildResult {
  Lexicon lexicon;
  BuildManifest manifest;
};

/// Trains on job.training and rates every source word absent from all
/// exclusion sets; ratings are clamped to the target scale.
BuildResult build_lexicon(const LexiconBuildJob& job);

/// Three decimals, half away from zero, applied to the shortest decimal
/// form of the value (1.0005 -> "1.001").
std::string format_rating(double value);

/// Header `word<TAB>var...`, rows sorted by word (bytewise).
std::string format_lexicon(const Lexicon& lexicon);
void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
/// Digest of a canonical full-precision dump of the lexicon.
std::string content_digest(const Lexicon& lexicon);
std::string content_digest(const AlignedLexicon& aligned);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace emomap

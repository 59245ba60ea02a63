#include "emomap/lexgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "emomap/error.hpp"

namespace emomap {

std::string_view to_string(BuildMode mode) {
  return mode == BuildMode::Monolingual ? "monolingual" : "crosslingual";
}

BuildMode parse_build_mode(std::string_view name) {
  if (name == "monolingual") return BuildMode::Monolingual;
  if (name == "crosslingual") return BuildMode::Crosslingual;
  fail(ErrorKind::Configuration, "unknown build mode '" + std::string(name) + "'");
}

nlohmann::json BuildManifest::to_json() const {
  return {{"mode", std::string(to_string(mode))},
          {"training_ids", training_ids},
          {"training_size", training_size},
          {"excluded_counts", excluded_counts},
          {"excluded_total", excluded_total},
          {"output_count", output_count},
          {"model_config", model_config},
          {"seed", seed},
          {"input_digests", input_digests},
          {"output_digest", output_digest}};
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Source lexicon restricted to the training source variables.
Lexicon matching_source(const Lexicon& lex, const EmotionFormat& wanted) {
  const auto& have = lex.format();
  if (have.variables == wanted.variables && have.scale_low == wanted.scale_low &&
      have.scale_high == wanted.scale_high) {
    return lex;
  }
  for (const auto& v : wanted.variables) {
    if (!have.index_of(v)) {
      fail(ErrorKind::Contract, "source lexicon lacks the training variable '" + v + "'");
    }
  }
  Lexicon projected = project(lex, wanted.variables);
  if (projected.format().scale_low != wanted.scale_low || projected.format().scale_high != wanted.scale_high) {
    fail(ErrorKind::Contract, "source lexicon and training data use different rating scales");
  }
  return projected;
}

}  // namespace

BuildResult build_lexicon(const LexiconBuildJob& job) {
  require(job.training.size() >= 1, "lexicon build needs a non-empty training set");
  const Lexicon source = matching_source(job.source_lexicon, job.training.source_format);
  const auto& target_format = job.training.target_format;

  BuildManifest manifest;
  manifest.mode = job.mode;
  std::set<std::string> ids;
  for (const auto& o : job.training.origins) {
    if (ids.insert(o.dataset_id).second) manifest.training_ids.push_back(o.dataset_id);
  }
  if (manifest.training_ids.empty()) manifest.training_ids.push_back(job.training.id);
  manifest.training_size = job.training.size();
  manifest.model_config = model_spec_to_json(job.spec);
  manifest.seed = job.seed;
  manifest.input_digests["source:" + job.source_lexicon.source_id()] = content_digest(job.source_lexicon);
  manifest.input_digests["training:" + job.training.id] = content_digest(job.training);

  std::vector<std::string> words;
  std::vector<std::size_t> rows;
  for (const auto& ex : job.exclusion_sets) {
    manifest.excluded_counts[ex.source_id()] = 0;
    manifest.input_digests["exclusion:" + ex.source_id()] = content_digest(ex);
  }
  for (std::size_t i = 0; i < source.entries().size(); ++i) {
    const auto& word = source.entries()[i].word;
    bool excluded = false;
    for (const auto& ex : job.exclusion_sets) {
      if (ex.contains(word)) {
        ++manifest.excluded_counts[ex.source_id()];
        excluded = true;
      }
    }
    if (excluded) {
      ++manifest.excluded_total;
    } else {
      words.push_back(word);
      rows.push_back(i);
    }
  }
  if (words.empty()) fail(ErrorKind::EmptyOutput, "every source word is excluded; nothing to rate");

  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(source.format().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& ratings = source.entries()[rows[r]].ratings;
    for (std::size_t j = 0; j < ratings.size(); ++j) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = ratings[j];
    }
  }
  const auto model = MappingModel::fit(job.spec, job.training, job.seed);
  const Matrix pred = model.predict(x).cwiseMax(target_format.scale_low).cwiseMin(target_format.scale_high);

  Lexicon out(target_format, source.language(), job.output_id);
  for (std::size_t r = 0; r < words.size(); ++r) {
    const auto row = pred.row(static_cast<Eigen::Index>(r));
    out.add(words[r], std::vector<double>(row.data(), row.data() + row.size()));
  }
  manifest.output_count = out.size();
  manifest.output_digest = sha256_hex(format_lexicon(out));
  return {std::move(out), std::move(manifest)};
}

std::string format_rating(double value) {
  require(std::isfinite(value), "cannot format a non-finite rating");
  std::string s = shortest(value);
  if (s.find_first_of("eE") != std::string::npos) {
    // Exponent forms only occur for very large or tiny magnitudes; expand.
    char buf[512];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
    s.assign(buf, res.ptr);
  }
  const bool negative = s.front() == '-';
  if (negative) s.erase(0, 1);
  auto dot = s.find('.');
  std::string int_part = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
  const bool round_up = frac.size() > 3 && frac[3] >= '5';
  frac.resize(3, '0');
  std::string digits = int_part + frac;
  if (round_up) {
    std::size_t i = digits.size();
    while (i > 0) {
      --i;
      if (digits[i] == '9') {
        digits[i] = '0';
      } else {
        ++digits[i];
        break;
      }
      if (i == 0) digits.insert(digits.begin(), '1');
    }
  }
  std::string out = digits.substr(0, digits.size() - 3) + "." + digits.substr(digits.size() - 3);
  const bool zero = out.find_first_not_of("0.") == std::string::npos;
  return (negative && !zero ? "-" : "") + out;
}

std::string format_lexicon(const Lexicon& lexicon) {
  std::vector<const LexiconEntry*> rows;
  for (const auto& e : lexicon.entries()) rows.push_back(&e);
  std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return a->word < b->word; });
  std::string out = "word";
  for (const auto& v : lexicon.format().variables) out += "\t" + v;
  out += "\n";
  for (const auto* e : rows) {
    out += e->word;
    for (double r : e->ratings) out += "\t" + format_rating(r);
    out += "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  write_text(path, format_lexicon(lexicon));
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    fail(ErrorKind::Io, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string content_digest(const Lexicon& lexicon) {
  std::string text = lexicon.format().name + "\t" + shortest(lexicon.format().scale_low) + "\t" +
                     shortest(lexicon.format().scale_high) + "\n";
  for (const auto& e : lexicon.entries()) {
    text += e.word;
    for (double r : e.ratings) text += "\t" + shortest(r);
    text += "\n";
  }
  return sha256_hex(text);
}

std::string content_digest(const AlignedLexicon& aligned) {
  std::string text = aligned.source_format.name + "\t" + aligned.target_format.name + "\n";
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    text += aligned.words[i];
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < aligned.source.cols(); ++j) text += "\t" + shortest(aligned.source(r, j));
    for (Eigen::Index j = 0; j < aligned.target.cols(); ++j) text += "\t" + shortest(aligned.target(r, j));
    text += "\n";
  }
  return sha256_hex(text);
}

}  // namespace emomap

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace emomap {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// A named set of affective variables sharing one rating interval.
struct EmotionFormat {
  std::string name;
  std::vector<std::string> variables;
  double scale_low = 0.0;
  double scale_high = 1.0;

  /// Validated constructor: non-empty, duplicate-free variables and
  /// scale_low < scale_high.
  static EmotionFormat make(std::string name, std::vector<std::string> variables,
                            double scale_low, double scale_high);

  static const EmotionFormat& vad();
  static const EmotionFormat& va();
  static const EmotionFormat& be5();
  /// Looks up "VAD", "VA" or "BE5"; configuration error otherwise.
  static const EmotionFormat& builtin(std::string_view name);

  std::size_t size() const { return variables.size(); }
  std::optional<std::size_t> index_of(std::string_view variable) const;
  bool contains(double value) const { return value >= scale_low && value <= scale_high; }

  /// Same variables, new bounds.
  EmotionFormat with_scale(double low, double high) const;

  bool operator==(const EmotionFormat&) const = default;
};

/// Structured warning record, emitted on a diagnostics channel rather than
/// mixed into data output.
struct Diagnostic {
  long row = 0;  // 1-based line number in the source file, 0 when not applicable
  std::string word;
  std::string kind;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

struct LexiconEntry {
  std::string word;
  std::vector<double> ratings;
};

/// Word to rating-vector map in a single format, kept in insertion order.
class Lexicon {
public:
  Lexicon(EmotionFormat format, std::string language, std::string source_id = {});

  const EmotionFormat& format() const { return format_; }
  const std::string& language() const { return language_; }
  const std::string& source_id() const { return source_id_; }
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Appends an entry. The word is expected to be canonical already.
  /// Rejects duplicates, wrong arity and out-of-scale values.
  void add(std::string word, std::vector<double> ratings);

  const std::vector<double>* find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) != nullptr; }

private:
  EmotionFormat format_;
  std::string language_;
  std::string source_id_;
  std::vector<LexiconEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Identifies which dataset a row of an aligned lexicon came from.
struct RowOrigin {
  std::string dataset_id;
  std::string language;
};

/// Paired source/target rating matrices over a shared word list.
struct AlignedLexicon {
  std::string id;
  std::vector<std::string> words;
  EmotionFormat source_format;
  EmotionFormat target_format;
  Matrix source;
  Matrix target;
  std::string language;
  std::vector<RowOrigin> origins;

  std::size_t size() const { return words.size(); }

  /// Checks row alignment, format distinctness and scale bounds.
  void validate() const;

  /// Sub-lexicon restricted to the given rows, in the given order.
  AlignedLexicon rows(std::span<const std::size_t> indices) const;
};

// Maps every format variable (and the word key, under "word") to a column header.
using ColumnMap = std::map<std::string, std::string>;

struct ParseOptions {
  bool lowercase = false;
  bool clamp = false;
};

/// NFC normalization plus whitespace trim; optional lowercasing.
std::string canonicalize_word(std::string_view word, bool lowercase = false);

/// Parses a UTF-8 TSV lexicon. `format` carries the scale the file is
/// written in; callers rescale afterwards when the file uses another scale.
/// Duplicate words are averaged and reported in `diagnostics`.
Lexicon parse_lexicon(std::string_view tsv, const EmotionFormat& format,
                      const ColumnMap& column_map, const ParseOptions& options = {},
                      Diagnostics* diagnostics = nullptr, std::string language = "und",
                      std::string source_id = {});

Lexicon rescale(const Lexicon& lexicon, double target_low, double target_high);

/// Rows for the canonical-word intersection of `a` and `b` in the entry
/// order of `a`. Throws EmptyAlignment when nothing overlaps.
AlignedLexicon align(const Lexicon& a, const Lexicon& b, bool allow_language_mismatch = false);

/// Restricts a format to `keep`, in that order. Dropping dominance from VAD
/// yields the built-in VA format.
EmotionFormat project(const EmotionFormat& format, std::span<const std::string> keep);
Lexicon project(const Lexicon& lexicon, std::span<const std::string> keep);

/// Projects whichever side of the alignment owns every variable in `keep`.
AlignedLexicon project(const AlignedLexicon& aligned, std::span<const std::string> keep);
AlignedLexicon project_source(const AlignedLexicon& aligned, std::span<const std::string> keep);
AlignedLexicon project_target(const AlignedLexicon& aligned, std::span<const std::string> keep);

/// Exchanges source and target roles.
AlignedLexicon swap_roles(const AlignedLexicon& aligned);

AlignedLexicon concat(std::span<const AlignedLexicon> parts);

}  // namespace emomap

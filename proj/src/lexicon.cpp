#include "emomap/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include <unicode/normalizer2.h>
#include <unicode/locid.h>
#include <unicode/unistr.h>

#include "emomap/error.hpp"

namespace emomap {

namespace {

std::string join(std::span<const std::string> items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string_view trim_ascii(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_real(std::string_view cell) {
  cell = trim_ascii(cell);
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value,
                                         std::chars_format::general);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string format_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Names a projected format after a built-in when the projection matches one.
std::string projected_name(const EmotionFormat& from, std::span<const std::string> keep) {
  for (const auto* candidate : {&EmotionFormat::vad(), &EmotionFormat::va(), &EmotionFormat::be5()}) {
    if (candidate->scale_low == from.scale_low && candidate->scale_high == from.scale_high &&
        std::equal(candidate->variables.begin(), candidate->variables.end(), keep.begin(),
                   keep.end())) {
      return candidate->name;
    }
  }
  if (std::equal(from.variables.begin(), from.variables.end(), keep.begin(), keep.end())) {
    return from.name;
  }
  return from.name + "[" + join(keep, ",") + "]";
}

std::vector<std::size_t> column_indices(const EmotionFormat& format,
                                        std::span<const std::string> keep) {
  if (keep.empty()) fail(ErrorKind::Configuration, "projection must keep at least one variable");
  std::vector<std::size_t> idx;
  std::set<std::string> seen;
  for (const auto& name : keep) {
    const auto i = format.index_of(name);
    if (!i) {
      fail(ErrorKind::Configuration,
           "unknown variable '" + name + "' for format " + format.name);
    }
    if (!seen.insert(name).second) {
      fail(ErrorKind::Configuration, "variable '" + name + "' listed twice in projection");
    }
    idx.push_back(*i);
  }
  return idx;
}

Matrix select_columns(const Matrix& m, const std::vector<std::size_t>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// EmotionFormat

EmotionFormat EmotionFormat::make(std::string name, std::vector<std::string> variables,
                                  double scale_low, double scale_high) {
  if (variables.empty()) {
    fail(ErrorKind::Configuration, "format " + name + " has no variables");
  }
  std::unordered_set<std::string> seen;
  for (const auto& v : variables) {
    if (!seen.insert(v).second) {
      fail(ErrorKind::Configuration, "format " + name + " repeats variable " + v);
    }
  }
  if (!(scale_low < scale_high)) {
    fail(ErrorKind::Configuration, "format " + name + " needs scale_low < scale_high");
  }
  return EmotionFormat{std::move(name), std::move(variables), scale_low, scale_high};
}

const EmotionFormat& EmotionFormat::vad() {
  static const EmotionFormat f = make("VAD", {"valence", "arousal", "dominance"}, 1.0, 9.0);
  return f;
}

const EmotionFormat& EmotionFormat::va() {
  static const EmotionFormat f = make("VA", {"valence", "arousal"}, 1.0, 9.0);
  return f;
}

const EmotionFormat& EmotionFormat::be5() {
  static const EmotionFormat f =
      make("BE5", {"joy", "anger", "sadness", "fear", "disgust"}, 1.0, 5.0);
  return f;
}

const EmotionFormat& EmotionFormat::builtin(std::string_view name) {
  if (name == "VAD") return vad();
  if (name == "VA") return va();
  if (name == "BE5") return be5();
  fail(ErrorKind::Configuration, "unknown emotion format '" + std::string(name) + "'");
}

std::optional<std::size_t> EmotionFormat::index_of(std::string_view variable) const {
  const auto it = std::find(variables.begin(), variables.end(), variable);
  if (it == variables.end()) return std::nullopt;
  return static_cast<std::size_t>(it - variables.begin());
}

EmotionFormat EmotionFormat::with_scale(double low, double high) const {
  return make(name, variables, low, high);
}

// ---------------------------------------------------------------------------
// Lexicon

Lexicon::Lexicon(EmotionFormat format, std::string language, std::string source_id)
    : format_(std::move(format)), language_(std::move(language)), source_id_(std::move(source_id)) {}

void Lexicon::add(std::string word, std::vector<double> ratings) {
  if (ratings.size() != format_.size()) {
    fail(ErrorKind::Validation, "entry '" + word + "' has " + std::to_string(ratings.size()) +
                                    " ratings, format " + format_.name + " needs " +
                                    std::to_string(format_.size()));
  }
  for (std::size_t j = 0; j < ratings.size(); ++j) {
    if (!format_.contains(ratings[j])) {
      fail(ErrorKind::Validation, "entry '" + word + "' " + format_.variables[j] + "=" +
                                      format_value(ratings[j]) + " outside [" +
                                      format_value(format_.scale_low) + ", " +
                                      format_value(format_.scale_high) + "]");
    }
  }
  if (index_.contains(word)) {
    fail(ErrorKind::Validation, "duplicate word '" + word + "'");
  }
  index_.emplace(word, entries_.size());
  entries_.push_back({std::move(word), std::move(ratings)});
}

const std::vector<double>* Lexicon::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? nullptr : &entries_[it->second].ratings;
}

// ---------------------------------------------------------------------------
// AlignedLexicon

void AlignedLexicon::validate() const {
  const auto n = static_cast<Eigen::Index>(words.size());
  if (source.rows() != n || target.rows() != n || origins.size() != words.size()) {
    fail(ErrorKind::Contract, "aligned lexicon " + id + ": row counts disagree");
  }
  if (source.cols() != static_cast<Eigen::Index>(source_format.size()) ||
      target.cols() != static_cast<Eigen::Index>(target_format.size())) {
    fail(ErrorKind::Contract, "aligned lexicon " + id + ": column counts disagree with formats");
  }
  if (source_format.name == target_format.name) {
    fail(ErrorKind::Configuration, "aligned lexicon " + id + ": source and target format are both " +
                                       source_format.name);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < source.cols(); ++j) {
      if (!source_format.contains(source(i, j))) {
        fail(ErrorKind::Validation, "aligned lexicon " + id + ": source value out of range for '" +
                                        words[static_cast<std::size_t>(i)] + "'");
      }
    }
    for (Eigen::Index j = 0; j < target.cols(); ++j) {
      if (!target_format.contains(target(i, j))) {
        fail(ErrorKind::Validation, "aligned lexicon " + id + ": target value out of range for '" +
                                        words[static_cast<std::size_t>(i)] + "'");
      }
    }
  }
}

AlignedLexicon AlignedLexicon::rows(std::span<const std::size_t> indices) const {
  AlignedLexicon out;
  out.id = id;
  out.source_format = source_format;
  out.target_format = target_format;
  out.language = language;
  out.source.resize(static_cast<Eigen::Index>(indices.size()), source.cols());
  out.target.resize(static_cast<Eigen::Index>(indices.size()), target.cols());
  out.words.reserve(indices.size());
  out.origins.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto i = indices[r];
    require(i < words.size(), "row index out of range");
    out.words.push_back(words[i]);
    out.origins.push_back(origins[i]);
    out.source.row(static_cast<Eigen::Index>(r)) = source.row(static_cast<Eigen::Index>(i));
    out.target.row(static_cast<Eigen::Index>(r)) = target.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

std::string canonicalize_word(std::string_view word, bool lowercase) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) fail(ErrorKind::Configuration, "ICU NFC normalizer unavailable");
  icu::UnicodeString text = icu::UnicodeString::fromUTF8(
      icu::StringPiece(word.data(), static_cast<int32_t>(word.size())));
  icu::UnicodeString normalized = nfc->normalize(text, status);
  if (U_FAILURE(status)) fail(ErrorKind::Parse, "cannot normalize word '" + std::string(word) + "'");
  normalized.trim();
  if (lowercase) {
    normalized.toLower(icu::Locale::getRoot());
    normalized = nfc->normalize(normalized, status);
  }
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

Lexicon parse_lexicon(std::string_view tsv, const EmotionFormat& format,
                      const ColumnMap& column_map, const ParseOptions& options,
                      Diagnostics* diagnostics, std::string language, std::string source_id) {
  std::string text(tsv);
  // CRLF and lone CR both become LF.
  std::string normalized;
  normalized.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\r') {
      normalized.push_back('\n');
      if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
    } else {
      normalized.push_back(text[i]);
    }
  }
  if (normalized.starts_with("\xEF\xBB\xBF")) normalized.erase(0, 3);

  std::vector<std::string_view> lines;
  {
    std::string_view rest(normalized);
    while (!rest.empty()) {
      const auto pos = rest.find('\n');
      lines.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
  }
  if (lines.empty()) fail(ErrorKind::Parse, "lexicon " + source_id + ": missing header row");

  const auto header = split_tabs(lines[0]);
  auto find_column = [&](const std::string& key) -> std::size_t {
    const auto it = column_map.find(key);
    const std::string wanted = it == column_map.end() ? key : it->second;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (trim_ascii(header[c]) == wanted) return c;
    }
    fail(ErrorKind::Configuration,
         "lexicon " + source_id + ": missing column '" + wanted + "'");
  };
  for (const auto& var : format.variables) {
    if (!column_map.empty() && !column_map.contains(var)) {
      fail(ErrorKind::Configuration,
           "lexicon " + source_id + ": column map has no binding for '" + var + "'");
    }
  }
  const std::size_t word_col = find_column("word");
  std::vector<std::size_t> value_cols;
  for (const auto& var : format.variables) value_cols.push_back(find_column(var));

  struct Accumulator {
    std::string word;
    std::vector<double> sums;
    int count = 0;
  };
  std::vector<Accumulator> acc;
  std::unordered_map<std::string, std::size_t> seen;

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const long row = static_cast<long>(li) + 1;
    if (trim_ascii(lines[li]).empty()) continue;
    const auto cells = split_tabs(lines[li]);
    if (cells.size() != header.size()) {
      fail(ErrorKind::Parse, "lexicon " + source_id + " row " + std::to_string(row) + ": expected " +
                                 std::to_string(header.size()) + " fields, found " +
                                 std::to_string(cells.size()));
    }
    std::string word = canonicalize_word(cells[word_col], options.lowercase);
    if (word.empty()) {
      fail(ErrorKind::Parse, "lexicon " + source_id + " row " + std::to_string(row) + ": empty word");
    }
    std::vector<double> values;
    values.reserve(value_cols.size());
    for (std::size_t j = 0; j < value_cols.size(); ++j) {
      const auto cell = cells[value_cols[j]];
      const auto v = parse_real(cell);
      if (!v) {
        fail(ErrorKind::Parse, "lexicon " + source_id + " row " + std::to_string(row) + " word '" +
                                   word + "': non-numeric " + format.variables[j] + " value '" +
                                   std::string(cell) + "'");
      }
      double value = *v;
      if (!format.contains(value)) {
        if (!options.clamp) {
          fail(ErrorKind::Validation,
               "lexicon " + source_id + " row " + std::to_string(row) + " word '" + word + "': " +
                   format.variables[j] + "=" + format_value(value) + " outside [" +
                   format_value(format.scale_low) + ", " + format_value(format.scale_high) + "]");
        }
        value = std::clamp(value, format.scale_low, format.scale_high);
        if (diagnostics) {
          diagnostics->push_back({row, word, "clamped",
                                  format.variables[j] + " value " + std::string(trim_ascii(cell)) +
                                      " clamped to " + format_value(value)});
        }
      }
      values.push_back(value);
    }
    const auto it = seen.find(word);
    if (it == seen.end()) {
      seen.emplace(word, acc.size());
      acc.push_back({std::move(word), std::move(values), 1});
    } else {
      auto& a = acc[it->second];
      for (std::size_t j = 0; j < values.size(); ++j) a.sums[j] += values[j];
      ++a.count;
      if (diagnostics) {
        diagnostics->push_back({row, a.word, "duplicate",
                                "repeated word averaged with earlier occurrence"});
      }
    }
  }

  Lexicon lex(format, std::move(language), std::move(source_id));
  for (auto& a : acc) {
    if (a.count > 1) {
      for (auto& s : a.sums) s = std::clamp(s / a.count, format.scale_low, format.scale_high);
    }
    lex.add(std::move(a.word), std::move(a.sums));
  }
  return lex;
}

// ---------------------------------------------------------------------------
// Transformations

Lexicon rescale(const Lexicon& lexicon, double target_low, double target_high) {
  if (!(target_low < target_high)) {
    fail(ErrorKind::Configuration, "rescale needs target_low < target_high");
  }
  const auto& from = lexicon.format();
  const double factor = (target_high - target_low) / (from.scale_high - from.scale_low);
  Lexicon out(from.with_scale(target_low, target_high), lexicon.language(), lexicon.source_id());
  for (const auto& e : lexicon.entries()) {
    std::vector<double> mapped(e.ratings.size());
    for (std::size_t j = 0; j < mapped.size(); ++j) {
      // The clamp only absorbs rounding at the interval ends.
      mapped[j] = std::clamp(target_low + (e.ratings[j] - from.scale_low) * factor, target_low,
                             target_high);
    }
    out.add(e.word, std::move(mapped));
  }
  return out;
}

AlignedLexicon align(const Lexicon& a, const Lexicon& b, bool allow_language_mismatch) {
  if (a.format().name == b.format().name) {
    fail(ErrorKind::Configuration, "cannot align two lexicons of format " + a.format().name);
  }
  if (a.language() != b.language() && !allow_language_mismatch) {
    fail(ErrorKind::Configuration, "cannot align " + a.source_id() + " (" + a.language() +
                                       ") with " + b.source_id() + " (" + b.language() + ")");
  }
  std::vector<std::size_t> rows_a;
  std::vector<const std::vector<double>*> rows_b;
  for (std::size_t i = 0; i < a.entries().size(); ++i) {
    if (const auto* rb = b.find(a.entries()[i].word)) {
      rows_a.push_back(i);
      rows_b.push_back(rb);
    }
  }
  if (rows_a.empty()) {
    fail(ErrorKind::EmptyAlignment,
         "lexicons " + a.source_id() + " and " + b.source_id() + " share no words");
  }
  AlignedLexicon out;
  out.id = a.source_id() + "+" + b.source_id();
  out.source_format = a.format();
  out.target_format = b.format();
  out.language = a.language() == b.language() ? a.language() : "multi";
  const auto n = static_cast<Eigen::Index>(rows_a.size());
  out.source.resize(n, static_cast<Eigen::Index>(a.format().size()));
  out.target.resize(n, static_cast<Eigen::Index>(b.format().size()));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& ea = a.entries()[rows_a[static_cast<std::size_t>(r)]];
    const auto& rb = *rows_b[static_cast<std::size_t>(r)];
    out.words.push_back(ea.word);
    out.origins.push_back({out.id, a.language()});
    for (std::size_t j = 0; j < ea.ratings.size(); ++j) {
      out.source(r, static_cast<Eigen::Index>(j)) = ea.ratings[j];
    }
    for (std::size_t j = 0; j < rb.size(); ++j) out.target(r, static_cast<Eigen::Index>(j)) = rb[j];
  }
  return out;
}

EmotionFormat project(const EmotionFormat& format, std::span<const std::string> keep) {
  (void)column_indices(format, keep);
  return EmotionFormat::make(projected_name(format, keep),
                             std::vector<std::string>(keep.begin(), keep.end()),
                             format.scale_low, format.scale_high);
}

Lexicon project(const Lexicon& lexicon, std::span<const std::string> keep) {
  const auto cols = column_indices(lexicon.format(), keep);
  Lexicon out(project(lexicon.format(), keep), lexicon.language(), lexicon.source_id());
  for (const auto& e : lexicon.entries()) {
    std::vector<double> kept;
    kept.reserve(cols.size());
    for (auto c : cols) kept.push_back(e.ratings[c]);
    out.add(e.word, std::move(kept));
  }
  return out;
}

AlignedLexicon project_source(const AlignedLexicon& aligned, std::span<const std::string> keep) {
  const auto cols = column_indices(aligned.source_format, keep);
  AlignedLexicon out = aligned;
  out.source_format = project(aligned.source_format, keep);
  out.source = select_columns(aligned.source, cols);
  return out;
}

AlignedLexicon project_target(const AlignedLexicon& aligned, std::span<const std::string> keep) {
  const auto cols = column_indices(aligned.target_format, keep);
  AlignedLexicon out = aligned;
  out.target_format = project(aligned.target_format, keep);
  out.target = select_columns(aligned.target, cols);
  return out;
}

AlignedLexicon project(const AlignedLexicon& aligned, std::span<const std::string> keep) {
  const auto owns_all = [&](const EmotionFormat& f) {
    return !keep.empty() && std::all_of(keep.begin(), keep.end(), [&](const std::string& v) {
      return f.index_of(v).has_value();
    });
  };
  if (owns_all(aligned.source_format)) return project_source(aligned, keep);
  if (owns_all(aligned.target_format)) return project_target(aligned, keep);
  fail(ErrorKind::Configuration, "projection [" + join(keep, ",") + "] matches neither " +
                                     aligned.source_format.name + " nor " +
                                     aligned.target_format.name);
}

AlignedLexicon swap_roles(const AlignedLexicon& aligned) {
  AlignedLexicon out = aligned;
  std::swap(out.source_format, out.target_format);
  std::swap(out.source, out.target);
  return out;
}

AlignedLexicon concat(std::span<const AlignedLexicon> parts) {
  if (parts.empty()) fail(ErrorKind::Configuration, "concat needs at least one part");
  const auto& first = parts.front();
  Eigen::Index rows = 0;
  std::set<std::string> languages;
  for (const auto& p : parts) {
    if (!(p.source_format == first.source_format) || !(p.target_format == first.target_format)) {
      fail(ErrorKind::Configuration, "cannot concatenate " + p.id + " (" + p.source_format.name +
                                         "->" + p.target_format.name + ") with " + first.id + " (" +
                                         first.source_format.name + "->" +
                                         first.target_format.name + "); project first");
    }
    rows += static_cast<Eigen::Index>(p.size());
    languages.insert(p.language);
  }
  AlignedLexicon out;
  out.source_format = first.source_format;
  out.target_format = first.target_format;
  out.language = languages.size() == 1 ? *languages.begin() : "multi";
  out.source.resize(rows, first.source.cols());
  out.target.resize(rows, first.target.cols());
  std::vector<std::string> ids;
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    ids.push_back(p.id);
    const auto n = static_cast<Eigen::Index>(p.size());
    out.source.middleRows(r, n) = p.source;
    out.target.middleRows(r, n) = p.target;
    out.words.insert(out.words.end(), p.words.begin(), p.words.end());
    out.origins.insert(out.origins.end(), p.origins.begin(), p.origins.end());
    r += n;
  }
  out.id = join(ids, "+");
  return out;
}

}  // namespace emomap

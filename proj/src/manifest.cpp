#include "emomap/manifest.hpp"

#include <charconv>
#include <regex>
#include <set>

#include "emomap/error.hpp"

namespace emomap {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& message) {
  fail(ErrorKind::Configuration, "manifest: " + message);
}

std::optional<std::size_t> as_index(std::string_view s) {
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = s.find(sep);
    out.emplace_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

std::string get_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) config_error(where + ": '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

std::vector<std::string> string_list(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return {};
  const auto& v = j.at(key);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) config_error(where + ": '" + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) config_error(where + ": '" + key + "' must be a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

LexiconSource parse_lexicon_source(const json& j) {
  if (!j.is_object()) config_error("lexicon entries must be objects");
  LexiconSource src;
  src.id = get_string(j, "id", "lexicon");
  const std::string where = "lexicon '" + src.id + "'";
  src.path = get_string(j, "path", where);
  src.format = get_string(j, "format", where);
  EmotionFormat::builtin(src.format);
  src.language = j.value("language", std::string("und"));
  if (j.contains("columns")) {
    if (!j.at("columns").is_object()) config_error(where + ": 'columns' must be an object");
    for (const auto& [k, v] : j.at("columns").items()) {
      if (!v.is_string()) config_error(where + ": column bindings must be strings");
      src.columns[k] = v.get<std::string>();
    }
  }
  if (j.contains("scale")) {
    const auto& s = j.at("scale");
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
      config_error(where + ": 'scale' must be [low, high]");
    }
    src.file_scale = std::pair{s[0].get<double>(), s[1].get<double>()};
  }
  src.lowercase = j.value("lowercase", false);
  src.clamp = j.value("clamp", false);
  return src;
}

DatasetSource parse_dataset_source(const json& j) {
  if (!j.is_object()) config_error("dataset entries must be objects");
  DatasetSource d;
  d.id = get_string(j, "id", "dataset");
  const std::string where = "dataset '" + d.id + "'";
  d.dimensional = get_string(j, "dimensional", where);
  d.categorical = get_string(j, "categorical", where);
  if (j.contains("features")) d.features = fs::path(get_string(j, "features", where));
  return d;
}

BuildSource parse_build_source(const json& j) {
  if (!j.is_object()) config_error("build entries must be objects");
  BuildSource b;
  b.id = get_string(j, "id", "build");
  const std::string where = "build '" + b.id + "'";
  b.mode = parse_build_mode(j.value("mode", std::string("monolingual")));
  b.direction = parse_direction(j.value("direction", std::string("dim2cat")));
  b.source = get_string(j, "source", where);
  b.training = string_list(j, "training", where);
  if (b.training.empty()) config_error(where + ": 'training' names no dataset");
  b.model = get_string(j, "model", where);
  b.exclude = string_list(j, "exclude", where);
  b.output = j.value("output", b.id);
  return b;
}

template <class T>
void check_unique(const std::vector<T>& items, const char* what) {
  std::set<std::string> seen;
  for (const auto& i : items) {
    if (!seen.insert(i.id).second) config_error(std::string("duplicate ") + what + " id '" + i.id + "'");
  }
}

}  // namespace

fs::path ExperimentManifest::resolve(const fs::path& p) const {
  return p.is_absolute() ? p : base_dir / p;
}

const ModelSpec& ExperimentManifest::model(std::string_view name) const {
  for (const auto& m : models) {
    if (m.name == name) return m;
  }
  config_error("no model named '" + std::string(name) + "'");
}

void apply_override(json& document, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    config_error("override '" + std::string(assignment) + "' is not key=value");
  }
  const auto keys = split(assignment.substr(0, eq), '.');
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &document;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& key = keys[i];
    if (key.empty()) config_error("override '" + std::string(assignment) + "' has an empty key");
    json* child = nullptr;
    if (node->is_array()) {
      const auto idx = as_index(key);
      if (!idx || *idx >= node->size()) {
        config_error("override '" + std::string(assignment) + "': no element '" + key + "'");
      }
      child = &(*node)[*idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) {
        config_error("override '" + std::string(assignment) + "': '" + key + "' is below a scalar");
      }
      child = &(*node)[key];
    }
    node = child;
  }
  *node = std::move(value);
}

ExperimentManifest parse_manifest(json document, fs::path base_dir) {
  if (!document.is_object()) config_error("top level must be an object");
  ExperimentManifest m;
  m.base_dir = std::move(base_dir);
  try {
    const auto& d = document;
    if (d.contains("seed") && !d.at("seed").is_null()) {
      if (!d.at("seed").is_number_unsigned()) config_error("'seed' must be a non-negative integer");
      m.seed = d.at("seed").get<std::uint64_t>();
    }
    m.folds = d.value("folds", 10);
    if (m.folds < 2) config_error("'folds' must be at least 2");
    m.output_dir = d.value("output_dir", std::string("out"));
    for (const auto& j : d.value("lexicons", json::array())) m.lexicons.push_back(parse_lexicon_source(j));
    for (const auto& j : d.value("datasets", json::array())) m.datasets.push_back(parse_dataset_source(j));
    if (d.contains("reliability")) m.reliability = fs::path(get_string(d, "reliability", "manifest"));
    if (d.contains("models")) {
      for (const auto& j : d.at("models")) m.models.push_back(model_spec_from_json(j));
    } else {
      m.models = {ModelSpec::linear(), ModelSpec::knn(), ModelSpec::ffnn_default()};
    }
    if (d.contains("crosslingual_model")) {
      const auto& c = d.at("crosslingual_model");
      m.crosslingual_model = c.is_string() ? m.model(c.get<std::string>()) : model_spec_from_json(c);
    }
    m.ablation_datasets = string_list(d, "ablation_datasets", "manifest");
    for (const auto& j : d.value("builds", json::array())) m.builds.push_back(parse_build_source(j));
  } catch (const json::exception& e) {
    config_error(e.what());
  }

  check_unique(m.lexicons, "lexicon");
  check_unique(m.datasets, "dataset");
  check_unique(m.builds, "build");
  std::set<std::string> names;
  for (const auto& s : m.models) {
    if (!names.insert(s.name).second) config_error("duplicate model name '" + s.name + "'");
  }
  std::set<std::string> lexicon_ids, dataset_ids;
  for (const auto& l : m.lexicons) lexicon_ids.insert(l.id);
  for (const auto& ds : m.datasets) {
    dataset_ids.insert(ds.id);
    for (const auto* ref : {&ds.dimensional, &ds.categorical}) {
      if (!lexicon_ids.contains(*ref)) {
        config_error("dataset '" + ds.id + "' refers to unknown lexicon '" + *ref + "'");
      }
    }
  }
  for (const auto& id : m.ablation_datasets) {
    if (!dataset_ids.contains(id)) config_error("ablation refers to unknown dataset '" + id + "'");
  }
  for (const auto& b : m.builds) {
    if (!lexicon_ids.contains(b.source)) config_error("build '" + b.id + "' refers to unknown lexicon '" + b.source + "'");
    for (const auto& t : b.training) {
      if (!dataset_ids.contains(t)) config_error("build '" + b.id + "' refers to unknown dataset '" + t + "'");
    }
    for (const auto& x : b.exclude) {
      if (!lexicon_ids.contains(x)) config_error("build '" + b.id + "' refers to unknown lexicon '" + x + "'");
    }
    m.model(b.model);
  }
  m.digest = sha256_hex(document.dump());
  m.document = std::move(document);
  return m;
}

ExperimentManifest load_manifest(const fs::path& path, std::span<const std::string> overrides) {
  const std::string text = read_text(path);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorKind::Configuration, "manifest " + path.string() + " is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_manifest(std::move(doc), path.parent_path());
}

const AlignedLexicon& LoadedInputs::dataset(std::string_view id) const {
  for (const auto& d : datasets) {
    if (d.id == id) return d;
  }
  fail(ErrorKind::Configuration, "no dataset '" + std::string(id) + "'");
}

const Lexicon& LoadedInputs::lexicon(std::string_view id) const {
  const auto it = lexicons.find(std::string(id));
  if (it == lexicons.end()) fail(ErrorKind::Configuration, "no lexicon '" + std::string(id) + "'");
  return it->second;
}

namespace {

Lexicon read_lexicon(const ExperimentManifest& m, const LexiconSource& src, LoadedInputs& in,
                     Diagnostics* diagnostics) {
  const auto text = read_text(m.resolve(src.path));
  in.digests[src.path.generic_string()] = sha256_hex(text);
  const auto& builtin = EmotionFormat::builtin(src.format);
  const auto file_format =
      src.file_scale ? builtin.with_scale(src.file_scale->first, src.file_scale->second) : builtin;
  auto lex = parse_lexicon(text, file_format, src.columns, {.lowercase = src.lowercase, .clamp = src.clamp},
                           diagnostics, src.language, src.id);
  if (src.file_scale) lex = rescale(lex, builtin.scale_low, builtin.scale_high);
  return lex;
}

AlignedLexicon align_dataset(const DatasetSource& ds, const Lexicon& dim, const Lexicon& cat) {
  if (dim.format().name == "BE5" || cat.format().name != "BE5") {
    fail(ErrorKind::Configuration, "dataset '" + ds.id + "' needs a VAD/VA 'dimensional' and a BE5 'categorical' lexicon");
  }
  auto aligned = align(dim, cat);
  aligned.id = ds.id;
  for (auto& o : aligned.origins) o.dataset_id = ds.id;
  return aligned;
}

}  // namespace

LoadedInputs load_inputs(const ExperimentManifest& m) {
  LoadedInputs in;
  for (const auto& src : m.lexicons) {
    Diagnostics diags;
    auto lex = read_lexicon(m, src, in, &diags);
    for (auto& d : diags) {
      in.diagnostics.push_back(std::move(d));
      in.diagnostic_sources.push_back(src.id);
    }
    in.lexicons.emplace(src.id, std::move(lex));
  }
  for (const auto& ds : m.datasets) {
    in.datasets.push_back(align_dataset(ds, in.lexicon(ds.dimensional), in.lexicon(ds.categorical)));
    if (ds.features) {
      const auto text = read_text(m.resolve(*ds.features));
      in.digests[ds.features->generic_string()] = sha256_hex(text);
      in.features.emplace(ds.id, parse_feature_table(text));
    }
  }
  if (m.reliability) {
    const auto text = read_text(m.resolve(*m.reliability));
    in.digests[m.reliability->generic_string()] = sha256_hex(text);
    in.reliability = parse_reliability_records(text);
  }
  return in;
}

bool ValidationReport::ok() const {
  for (const auto& i : issues) {
    if (i.severity == "error") return false;
  }
  return true;
}

json ValidationReport::to_json() const {
  json list = json::array();
  std::size_t errors = 0;
  for (const auto& i : issues) {
    if (i.severity == "error") ++errors;
    list.push_back({{"source", i.source},
                    {"severity", i.severity},
                    {"kind", i.kind},
                    {"row", i.row},
                    {"word", i.word},
                    {"message", i.message}});
  }
  return {{"ok", ok()}, {"errors", errors}, {"warnings", issues.size() - errors}, {"issues", list}};
}

ValidationReport validate_inputs(const ExperimentManifest& m) {
  ValidationReport report;
  static const std::regex kRow(R"(row (\d+))");
  static const std::regex kWord(R"(word '([^']*)')");
  auto record_error = [&](const std::string& source, const Error& e) {
    ValidationIssue issue{source, "error", std::string(to_string(e.kind())), 0, {}, e.what()};
    std::smatch match;
    const std::string msg = e.what();
    if (std::regex_search(msg, match, kRow)) issue.row = std::stol(match[1]);
    if (std::regex_search(msg, match, kWord)) issue.word = match[1];
    if (e.kind() == ErrorKind::Io) report.io_failure = true;
    report.issues.push_back(std::move(issue));
  };

  LoadedInputs in;
  for (const auto& src : m.lexicons) {
    Diagnostics diags;
    try {
      auto lex = read_lexicon(m, src, in, &diags);
      if (lex.empty()) {
        report.issues.push_back({src.id, "error", "validation", 0, {}, "lexicon " + src.id + " has no entries"});
      }
      in.lexicons.emplace(src.id, std::move(lex));
    } catch (const Error& e) {
      record_error(src.id, e);
    }
    for (const auto& d : diags) report.issues.push_back({src.id, "warning", d.kind, d.row, d.word, d.message});
  }
  for (const auto& ds : m.datasets) {
    if (!in.lexicons.contains(ds.dimensional) || !in.lexicons.contains(ds.categorical)) continue;
    try {
      const auto aligned = align_dataset(ds, in.lexicon(ds.dimensional), in.lexicon(ds.categorical));
      aligned.validate();
      if (aligned.size() < static_cast<std::size_t>(m.folds)) {
        report.issues.push_back({ds.id, "error", "validation", 0, {},
                                 "dataset " + ds.id + " has " + std::to_string(aligned.size()) +
                                     " shared words, fewer than " + std::to_string(m.folds) + " folds"});
      }
    } catch (const Error& e) {
      record_error(ds.id, e);
    }
    if (ds.features) {
      try {
        parse_feature_table(read_text(m.resolve(*ds.features)));
      } catch (const Error& e) {
        record_error(ds.id, e);
      }
    }
  }
  if (m.reliability) {
    try {
      parse_reliability_records(read_text(m.resolve(*m.reliability)));
    } catch (const Error& e) {
      record_error("reliability", e);
    }
  }
  return report;
}

}  // namespace emomap

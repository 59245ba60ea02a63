#include "emomap/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "emomap/error.hpp"

namespace emomap {

using nlohmann::json;

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Linear: return "linear";
    case ModelKind::Knn: return "knn";
    case ModelKind::Ffnn: return "ffnn";
    case ModelKind::Boosted: return "boosted";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "linear" || name == "lr") return ModelKind::Linear;
  if (name == "knn") return ModelKind::Knn;
  if (name == "ffnn") return ModelKind::Ffnn;
  if (name == "boosted" || name == "wei") return ModelKind::Boosted;
  fail(ErrorKind::Configuration, "unknown model kind '" + std::string(name) + "'");
}

ModelSpec ModelSpec::linear(std::string name) {
  ModelSpec s;
  s.name = std::move(name);
  s.kind = ModelKind::Linear;
  return s;
}

ModelSpec ModelSpec::knn(int k, std::string name) {
  ModelSpec s;
  s.name = std::move(name);
  s.kind = ModelKind::Knn;
  s.knn_k = k;
  return s;
}

ModelSpec ModelSpec::ffnn_default(std::string name) {
  ModelSpec s;
  s.name = std::move(name);
  s.kind = ModelKind::Ffnn;
  return s;
}

ModelSpec ModelSpec::boosted(std::string name) {
  ModelSpec s;
  s.name = std::move(name);
  s.kind = ModelKind::Boosted;
  return s;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json ffnn_config_to_json(const FfnnConfig& c) {
  return json{{"hidden_sizes", c.hidden_sizes},
              {"dropout_hidden", c.dropout_hidden},
              {"iterations", c.iterations},
              {"step_size", c.adam.step_size},
              {"beta1", c.adam.beta1},
              {"beta2", c.adam.beta2},
              {"epsilon", c.adam.epsilon},
              {"seed", c.seed}};
}

void ffnn_config_update(FfnnConfig& c, const json& j) {
  if (j.contains("hidden_sizes")) c.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();
  if (j.contains("dropout_hidden")) c.dropout_hidden = j.at("dropout_hidden").get<double>();
  if (j.contains("iterations")) c.iterations = j.at("iterations").get<long>();
  if (j.contains("step_size")) c.adam.step_size = j.at("step_size").get<double>();
  if (j.contains("beta1")) c.adam.beta1 = j.at("beta1").get<double>();
  if (j.contains("beta2")) c.adam.beta2 = j.at("beta2").get<double>();
  if (j.contains("epsilon")) c.adam.epsilon = j.at("epsilon").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
}

json boost_config_to_json(const BoostConfig& c) {
  return json{{"max_stages", c.max_stages}, {"seed", c.seed}, {"base", ffnn_config_to_json(c.base)}};
}

void boost_config_update(BoostConfig& c, const json& j) {
  if (j.contains("max_stages")) c.max_stages = j.at("max_stages").get<int>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("base")) ffnn_config_update(c.base, j.at("base"));
}

}  // namespace

json format_to_json(const EmotionFormat& f) {
  return json{{"name", f.name},
              {"variables", f.variables},
              {"scale_low", f.scale_low},
              {"scale_high", f.scale_high}};
}

EmotionFormat format_from_json(const json& j) {
  return EmotionFormat::make(j.at("name").get<std::string>(),
                             j.at("variables").get<std::vector<std::string>>(),
                             j.at("scale_low").get<double>(), j.at("scale_high").get<double>());
}

ModelSpec model_spec_from_json(const json& j) {
  try {
    ModelSpec spec;
    spec.kind = parse_model_kind(j.at("kind").get<std::string>());
    spec.name = j.value("name", std::string(to_string(spec.kind)));
    if (j.contains("k")) spec.knn_k = j.at("k").get<int>();
    ffnn_config_update(spec.ffnn, j);
    if (j.contains("max_stages")) spec.boost.max_stages = j.at("max_stages").get<int>();
    if (j.contains("base")) ffnn_config_update(spec.boost.base, j.at("base"));
    if (spec.kind == ModelKind::Ffnn) spec.ffnn.validate();
    if (spec.kind == ModelKind::Knn && spec.knn_k < 1) {
      fail(ErrorKind::Configuration, "model spec " + spec.name + ": k must be >= 1");
    }
    if (spec.kind == ModelKind::Boosted && spec.boost.max_stages < 1) {
      fail(ErrorKind::Configuration, "model spec " + spec.name + ": max_stages must be >= 1");
    }
    return spec;
  } catch (const json::exception& e) {
    fail(ErrorKind::Configuration, std::string("invalid model spec: ") + e.what());
  }
}

json model_spec_to_json(const ModelSpec& spec) {
  json j{{"name", spec.name}, {"kind", std::string(to_string(spec.kind))}};
  switch (spec.kind) {
    case ModelKind::Linear: break;
    case ModelKind::Knn: j["k"] = spec.knn_k; break;
    case ModelKind::Ffnn: {
      auto c = ffnn_config_to_json(spec.ffnn);
      c.erase("seed");
      j.update(c);
      break;
    }
    case ModelKind::Boosted: {
      j["max_stages"] = spec.boost.max_stages;
      auto base = ffnn_config_to_json(spec.boost.base);
      base.erase("seed");
      j["base"] = base;
      break;
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Fit / predict

MappingModel MappingModel::fit(const ModelSpec& spec, const Matrix& x, const Matrix& y,
                               const EmotionFormat& source_format,
                               const EmotionFormat& target_format, std::uint64_t seed) {
  switch (spec.kind) {
    case ModelKind::Linear:
      return MappingModel(fit_linear(x, y, source_format, target_format), source_format,
                          target_format);
    case ModelKind::Knn:
      return MappingModel(fit_knn(x, y, spec.knn_k, source_format, target_format), source_format,
                          target_format);
    case ModelKind::Ffnn: {
      FfnnConfig cfg = spec.ffnn;
      cfg.seed = seed;
      cfg.validate();
      auto result = train_network(cfg, x, y);
      return MappingModel(FfnnModel(std::move(result.network), cfg, source_format, target_format,
                                    std::move(result.loss_trace)),
                          source_format, target_format);
    }
    case ModelKind::Boosted: {
      BoostConfig cfg = spec.boost;
      cfg.seed = seed;
      return MappingModel(fit_boosted(x, y, cfg, target_format.variables), source_format,
                          target_format);
    }
  }
  fail(ErrorKind::Configuration, "unknown model kind");
}

MappingModel MappingModel::fit(const ModelSpec& spec, const AlignedLexicon& train,
                               std::uint64_t seed) {
  return fit(spec, train.source, train.target, train.source_format, train.target_format, seed);
}

Matrix MappingModel::predict(const Matrix& x) const {
  return std::visit([&](const auto& m) { return m.predict(x); }, model_);
}

ModelKind MappingModel::kind() const { return static_cast<ModelKind>(model_.index()); }

Eigen::Index MappingModel::input_size() const {
  return std::visit(
      [](const auto& m) -> Eigen::Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) return m.weights.cols();
        else if constexpr (std::is_same_v<T, KnnModel>) return m.source.cols();
        else if constexpr (std::is_same_v<T, FfnnModel>) return m.network().input_size();
        else return m.input_size;
      },
      model_);
}

Eigen::Index MappingModel::output_size() const {
  return static_cast<Eigen::Index>(target_format_.size());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

static_assert(std::endian::native == std::endian::little,
              "model serialization assumes a little-endian host");

struct ArrayRef {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
  const double* data;
};

void add_network(std::vector<ArrayRef>& arrays, json& layers, const Network& net,
                 const std::string& prefix) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    layers.push_back({layer.weights.rows(), layer.weights.cols()});
    arrays.push_back({prefix + "W" + std::to_string(l), layer.weights.rows(), layer.weights.cols(),
                      layer.weights.data()});
    arrays.push_back({prefix + "b" + std::to_string(l), layer.bias.size(), 1, layer.bias.data()});
  }
}

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

class Reader {
public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) fail(ErrorKind::Parse, "model file truncated");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    std::memcpy(&v, take(8).data(), 8);
    return v;
  }
  void fill(double* dst, std::size_t count) {
    const auto raw = take(count * sizeof(double));
    if (count) std::memcpy(dst, raw.data(), raw.size());
  }
  bool done() const { return pos_ == bytes_.size(); }

private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

Network read_network(Reader& r, const json& layers) {
  Network net;
  for (const auto& shape : layers) {
    DenseLayer layer;
    layer.weights.resize(shape.at(0).get<Eigen::Index>(), shape.at(1).get<Eigen::Index>());
    layer.bias.resize(layer.weights.rows());
    r.fill(layer.weights.data(), static_cast<std::size_t>(layer.weights.size()));
    r.fill(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace

std::string serialize_model(const MappingModel& model) {
  json header{{"version", 1},
              {"kind", std::string(to_string(model.kind()))},
              {"source_format", format_to_json(model.source_format())},
              {"target_format", format_to_json(model.target_format())}};
  std::vector<ArrayRef> arrays;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          arrays.push_back({"W", m.weights.rows(), m.weights.cols(), m.weights.data()});
          arrays.push_back({"b", m.bias.size(), 1, m.bias.data()});
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          header["k"] = m.k;
          arrays.push_back({"source", m.source.rows(), m.source.cols(), m.source.data()});
          arrays.push_back({"target", m.target.rows(), m.target.cols(), m.target.data()});
        } else if constexpr (std::is_same_v<T, FfnnModel>) {
          header["config"] = ffnn_config_to_json(m.config());
          json layers = json::array();
          add_network(arrays, layers, m.network(), "");
          header["layers"] = layers;
        } else {
          header["config"] = boost_config_to_json(m.config);
          header["input_size"] = m.input_size;
          header["target_variables"] = m.target_variables;
          json ensembles = json::array();
          for (std::size_t t = 0; t < m.ensembles.size(); ++t) {
            json stages = json::array();
            for (std::size_t s = 0; s < m.ensembles[t].size(); ++s) {
              const auto& st = m.ensembles[t][s];
              json layers = json::array();
              add_network(arrays, layers, st.network,
                          "t" + std::to_string(t) + "s" + std::to_string(s) + ".");
              stages.push_back({{"weight", st.weight}, {"layers", layers}});
            }
            ensembles.push_back(stages);
          }
          header["ensembles"] = ensembles;
        }
      },
      model.variant());
  json shapes = json::array();
  for (const auto& a : arrays) shapes.push_back({{"name", a.name}, {"rows", a.rows}, {"cols", a.cols}});
  header["arrays"] = shapes;

  const std::string text = header.dump();
  std::string out(kModelMagic);
  put_u64(out, text.size());
  out += text;
  for (const auto& a : arrays) {
    out.append(reinterpret_cast<const char*>(a.data),
               static_cast<std::size_t>(a.rows * a.cols) * sizeof(double));
  }
  return out;
}

MappingModel deserialize_model(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(kModelMagic.size()) != kModelMagic) {
    fail(ErrorKind::Parse, "not a model file (bad magic header)");
  }
  json header;
  try {
    const auto len = r.u64();
    header = json::parse(r.take(len));
    const auto source = format_from_json(header.at("source_format"));
    const auto target = format_from_json(header.at("target_format"));
    const auto kind = parse_model_kind(header.at("kind").get<std::string>());
    const auto& shapes = header.at("arrays");
    auto matrix_at = [&](std::size_t i) {
      Matrix m(shapes.at(i).at("rows").get<Eigen::Index>(), shapes.at(i).at("cols").get<Eigen::Index>());
      r.fill(m.data(), static_cast<std::size_t>(m.size()));
      return m;
    };
    std::optional<MappingModel> model;
    switch (kind) {
      case ModelKind::Linear: {
        LinearModel lm;
        lm.weights = matrix_at(0);
        const Matrix b = matrix_at(1);
        lm.bias = Eigen::Map<const Vector>(b.data(), b.size());
        lm.source_format = source;
        lm.target_format = target;
        model.emplace(std::move(lm), source, target);
        break;
      }
      case ModelKind::Knn: {
        KnnModel km;
        km.k = header.at("k").get<int>();
        km.source = matrix_at(0);
        km.target = matrix_at(1);
        km.source_format = source;
        km.target_format = target;
        model.emplace(std::move(km), source, target);
        break;
      }
      case ModelKind::Ffnn: {
        FfnnConfig cfg;
        ffnn_config_update(cfg, header.at("config"));
        Network net = read_network(r, header.at("layers"));
        model.emplace(FfnnModel(std::move(net), cfg, source, target), source, target);
        break;
      }
      case ModelKind::Boosted: {
        BoostedEnsemble e;
        boost_config_update(e.config, header.at("config"));
        e.input_size = header.at("input_size").get<Eigen::Index>();
        e.target_variables = header.at("target_variables").get<std::vector<std::string>>();
        for (const auto& stages : header.at("ensembles")) {
          std::vector<BoostStage> list;
          for (const auto& st : stages) {
            list.push_back({read_network(r, st.at("layers")), st.at("weight").get<double>()});
          }
          e.ensembles.push_back(std::move(list));
        }
        model.emplace(std::move(e), source, target);
        break;
      }
    }
    if (!r.done()) fail(ErrorKind::Parse, "model file has trailing bytes");
    return std::move(*model);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("corrupt model header: ") + e.what());
  }
}

void save_model(const MappingModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  const auto bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

MappingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

json describe_model(const MappingModel& model) {
  json j{{"kind", std::string(to_string(model.kind()))},
         {"source_format", format_to_json(model.source_format())},
         {"target_format", format_to_json(model.target_format())}};
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          j["parameters"] = m.weights.size() + m.bias.size();
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          j["k"] = m.k;
          j["stored_rows"] = m.source.rows();
        } else if constexpr (std::is_same_v<T, FfnnModel>) {
          j["config"] = ffnn_config_to_json(m.config());
          j["parameters"] = m.network().parameter_count();
        } else {
          j["config"] = boost_config_to_json(m.config);
          json stages = json::array();
          for (const auto& e : m.ensembles) stages.push_back(e.size());
          j["stages_per_target"] = stages;
        }
      },
      model.variant());
  return j;
}

}  // namespace emomap

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "emomap/boosted.hpp"
#include "emomap/ffnn.hpp"
#include "emomap/knn.hpp"
#include "emomap/linear.hpp"

namespace emomap {

enum class ModelKind { Linear, Knn, Ffnn, Boosted };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// A named, fully configured model recipe. Seeds in the nested configs are
/// overridden per training call.
struct ModelSpec {
  std::string name;
  ModelKind kind = ModelKind::Linear;
  int knn_k = kDefaultNeighbors;
  FfnnConfig ffnn;
  BoostConfig boost;

  static ModelSpec linear(std::string name = "LR");
  static ModelSpec knn(int k = kDefaultNeighbors, std::string name = "KNN");
  static ModelSpec ffnn_default(std::string name = "FFNN");
  static ModelSpec boosted(std::string name = "WEI");
};

/// Reads {"name", "kind", hyperparameter overrides...}.
ModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::json model_spec_to_json(const ModelSpec& spec);

/// One of the four regressors behind a single fit/predict contract.
class MappingModel {
public:
  using Variant = std::variant<LinearModel, KnnModel, FfnnModel, BoostedEnsemble>;

  explicit MappingModel(Variant model, EmotionFormat source_format, EmotionFormat target_format)
      : model_(std::move(model)),
        source_format_(std::move(source_format)),
        target_format_(std::move(target_format)) {}

  static MappingModel fit(const ModelSpec& spec, const Matrix& x, const Matrix& y,
                          const EmotionFormat& source_format, const EmotionFormat& target_format,
                          std::uint64_t seed);
  static MappingModel fit(const ModelSpec& spec, const AlignedLexicon& train, std::uint64_t seed);

  /// n x |t| predictions; contract error on a column mismatch.
  Matrix predict(const Matrix& x) const;

  ModelKind kind() const;
  Eigen::Index input_size() const;
  Eigen::Index output_size() const;
  const Variant& variant() const { return model_; }
  const EmotionFormat& source_format() const { return source_format_; }
  const EmotionFormat& target_format() const { return target_format_; }

private:
  Variant model_;
  EmotionFormat source_format_;
  EmotionFormat target_format_;
};

inline constexpr std::string_view kModelMagic = "AFMAP001";

/// Binary layout: 8-byte magic, little-endian u64 header length, JSON header
/// (kind, formats, config, array shapes), then every parameter array as
/// row-major little-endian IEEE-754 doubles in header order.
std::string serialize_model(const MappingModel& model);
MappingModel deserialize_model(std::string_view bytes);

void save_model(const MappingModel& model, const std::filesystem::path& path);
MappingModel load_model(const std::filesystem::path& path);

/// Human-readable summary (kind, formats, config, parameter count).
nlohmann::json describe_model(const MappingModel& model);

nlohmann::json format_to_json(const EmotionFormat& format);
EmotionFormat format_from_json(const nlohmann::json& j);

}  // namespace emomap

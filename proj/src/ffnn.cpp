#include "emomap/ffnn.hpp"

#include <cmath>

#include "emomap/error.hpp"

namespace emomap {

void FfnnConfig::validate() const {
  if (hidden_sizes.empty()) fail(ErrorKind::Configuration, "FFNN needs at least one hidden layer");
  for (int h : hidden_sizes) {
    if (h < 1) fail(ErrorKind::Configuration, "FFNN hidden layer sizes must be positive");
  }
  if (!(dropout_hidden >= 0.0 && dropout_hidden < 1.0)) {
    fail(ErrorKind::Configuration, "FFNN dropout must lie in [0, 1)");
  }
  if (iterations < 1) fail(ErrorKind::Configuration, "FFNN needs at least one iteration");
  if (!(adam.step_size > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0)) {
    fail(ErrorKind::Configuration, "invalid Adam hyperparameters");
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

Network init_network(Eigen::Index input_size, std::span<const int> hidden_sizes,
                     Eigen::Index output_size, std::uint64_t seed) {
  require(input_size >= 1 && output_size >= 1, "network needs positive input and output sizes");
  Rng rng(seed);
  Network net;
  Eigen::Index fan_in = input_size;
  auto add_layer = [&](Eigen::Index fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer;
    layer.weights.resize(fan_out, fan_in);
    for (Eigen::Index i = 0; i < fan_out; ++i) {
      for (Eigen::Index j = 0; j < fan_in; ++j) layer.weights(i, j) = rng.uniform(-limit, limit);
    }
    layer.bias = Vector::Zero(fan_out);
    net.layers.push_back(std::move(layer));
    fan_in = fan_out;
  };
  for (int h : hidden_sizes) add_layer(h);
  add_layer(output_size);
  return net;
}

Matrix forward(const Network& net, const Matrix& x, Mode mode, double dropout, Rng* dropout_rng,
               ForwardCache* cache) {
  require(!net.layers.empty(), "forward pass through an empty network");
  if (x.cols() != net.input_size()) {
    fail(ErrorKind::Contract, "network expects " + std::to_string(net.input_size()) +
                                  " input columns, got " + std::to_string(x.cols()));
  }
  const bool use_dropout = mode == Mode::Train && dropout > 0.0;
  require(!use_dropout || dropout_rng != nullptr, "train-mode dropout needs a generator");
  const double keep_scale = use_dropout ? 1.0 / (1.0 - dropout) : 1.0;

  if (cache) {
    *cache = ForwardCache{};
    cache->mode = mode;
    cache->input = x;
    for (const auto& l : net.layers) cache->shapes.emplace_back(l.weights.rows(), l.weights.cols());
  }

  Matrix a = x;
  const std::size_t last = net.layers.size() - 1;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Matrix z = a * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    if (l == last) {
      if (cache) cache->pre_activations.push_back(z);
      return z;
    }
    Matrix h = z.cwiseMax(0.0);
    if (use_dropout) {
      Matrix mask(h.rows(), h.cols());
      for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
          mask(i, j) = dropout_rng->uniform() < dropout ? 0.0 : keep_scale;
        }
      }
      h = h.cwiseProduct(mask);
      if (cache) cache->dropout_masks.push_back(std::move(mask));
    }
    if (cache) {
      cache->pre_activations.push_back(std::move(z));
      cache->activations.push_back(h);
    }
    a = std::move(h);
  }
  return a;  // unreachable: the loop returns at the output layer
}

double mse_loss(const Matrix& pred, const Matrix& gold) {
  if (pred.rows() != gold.rows() || pred.cols() != gold.cols()) {
    fail(ErrorKind::Contract, "MSE loss: prediction and gold shapes differ");
  }
  require(pred.size() > 0, "MSE loss of an empty matrix");
  return (pred - gold).squaredNorm() / static_cast<double>(pred.size());
}

Gradients backward(const Network& net, const ForwardCache& cache, const Matrix& gold) {
  const std::size_t n_layers = net.layers.size();
  bool consistent = cache.pre_activations.size() == n_layers &&
                    cache.activations.size() + 1 == n_layers && cache.shapes.size() == n_layers;
  for (std::size_t l = 0; consistent && l < n_layers; ++l) {
    consistent = cache.shapes[l].first == net.layers[l].weights.rows() &&
                 cache.shapes[l].second == net.layers[l].weights.cols();
  }
  if (consistent && cache.mode == Mode::Train && !cache.dropout_masks.empty()) {
    consistent = cache.dropout_masks.size() + 1 == n_layers;
  }
  if (!consistent) fail(ErrorKind::Contract, "forward cache does not match the network");
  const Matrix& pred = cache.pre_activations.back();
  if (gold.rows() != pred.rows() || gold.cols() != pred.cols()) {
    fail(ErrorKind::Contract, "forward cache does not match the gold matrix shape");
  }

  Gradients g;
  g.weights.resize(n_layers);
  g.biases.resize(n_layers);
  Matrix delta = (pred - gold) * (2.0 / static_cast<double>(pred.size()));
  for (std::size_t l = n_layers; l-- > 0;) {
    const Matrix& input = l == 0 ? cache.input : cache.activations[l - 1];
    g.weights[l] = delta.transpose() * input;
    g.biases[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Matrix upstream = delta * net.layers[l].weights;
    const auto& z = cache.pre_activations[l - 1];
    upstream = upstream.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    if (!cache.dropout_masks.empty()) upstream = upstream.cwiseProduct(cache.dropout_masks[l - 1]);
    delta = std::move(upstream);
  }
  return g;
}

namespace {

struct AdamState {
  std::vector<Matrix> m_w, v_w;
  std::vector<Vector> m_b, v_b;

  explicit AdamState(const Network& net) {
    for (const auto& l : net.layers) {
      m_w.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
      v_w.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
      m_b.push_back(Vector::Zero(l.bias.size()));
      v_b.push_back(Vector::Zero(l.bias.size()));
    }
  }
};

template <typename Param, typename Grad>
void adam_update(Param& p, const Grad& g, Param& m, Param& v, const AdamConfig& cfg,
                 double bias1, double bias2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  const double step = cfg.step_size / bias1;
  p.array() -= step * m.array() / ((v.array() / bias2).sqrt() + cfg.epsilon);
}

}  // namespace

TrainResult train_network(const FfnnConfig& cfg, const Matrix& x, const Matrix& y) {
  require(x.rows() >= 1, "FFNN training needs a non-empty training set");
  require(x.rows() == y.rows(), "FFNN training: source and target row counts differ");
  for (int h : cfg.hidden_sizes) require(h >= 1, "hidden layer sizes must be positive");
  if (cfg.iterations < 1) fail(ErrorKind::Configuration, "FFNN needs at least one iteration");

  TrainResult result{init_network(x.cols(), cfg.hidden_sizes, y.cols(), cfg.seed), {}};
  Network& net = result.network;
  Rng dropout_rng(mix_seed(cfg.seed, "dropout"));
  AdamState state(net);
  ForwardCache cache;
  result.loss_trace.reserve(static_cast<std::size_t>(cfg.iterations));
  double bias1 = 1.0, bias2 = 1.0;
  for (long it = 0; it < cfg.iterations; ++it) {
    const Matrix pred = forward(net, x, Mode::Train, cfg.dropout_hidden, &dropout_rng, &cache);
    const double loss = mse_loss(pred, y);
    if (!std::isfinite(loss)) {
      throw DivergenceError(it, "FFNN training diverged at iteration " + std::to_string(it));
    }
    result.loss_trace.push_back(loss);
    const Gradients g = backward(net, cache, y);
    bias1 *= cfg.adam.beta1;
    bias2 *= cfg.adam.beta2;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      adam_update(net.layers[l].weights, g.weights[l], state.m_w[l], state.v_w[l], cfg.adam,
                  1.0 - bias1, 1.0 - bias2);
      adam_update(net.layers[l].bias, g.biases[l], state.m_b[l], state.v_b[l], cfg.adam,
                  1.0 - bias1, 1.0 - bias2);
    }
  }
  return result;
}

FfnnModel::FfnnModel(Network network, FfnnConfig config, EmotionFormat source_format,
                     EmotionFormat target_format, std::vector<double> loss_trace)
    : network_(std::move(network)),
      config_(std::move(config)),
      source_format_(std::move(source_format)),
      target_format_(std::move(target_format)),
      loss_trace_(std::move(loss_trace)) {}

Matrix FfnnModel::predict(const Matrix& x) const {
  return forward(network_, x, Mode::Eval, 0.0);
}

FfnnModel init_ffnn(const FfnnConfig& cfg, const EmotionFormat& source_format,
                    const EmotionFormat& target_format) {
  cfg.validate();
  return FfnnModel(init_network(static_cast<Eigen::Index>(source_format.size()), cfg.hidden_sizes,
                                static_cast<Eigen::Index>(target_format.size()), cfg.seed),
                   cfg, source_format, target_format);
}

Matrix ffnn_forward(const FfnnModel& model, const Matrix& x, Mode mode, Rng* dropout_rng,
                    ForwardCache* cache) {
  return forward(model.network(), x, mode, model.config().dropout_hidden, dropout_rng, cache);
}

double ffnn_loss(const Matrix& pred, const Matrix& gold) { return mse_loss(pred, gold); }

Gradients ffnn_backward(const FfnnModel& model, const ForwardCache& cache, const Matrix& gold) {
  return backward(model.network(), cache, gold);
}

FfnnModel train_ffnn(const FfnnConfig& cfg, const AlignedLexicon& train) {
  cfg.validate();
  require(train.size() >= 1, "FFNN training needs a non-empty training set");
  auto result = train_network(cfg, train.source, train.target);
  return FfnnModel(std::move(result.network), cfg, train.source_format, train.target_format,
                   std::move(result.loss_trace));
}

}  // namespace emomap

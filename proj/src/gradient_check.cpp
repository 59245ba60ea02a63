#include "emomap/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "emomap/error.hpp"

namespace emomap {

Gradients analytic_gradients(const Network& net, const Matrix& x, const Matrix& y) {
  ForwardCache cache;
  forward(net, x, Mode::Eval, 0.0, nullptr, &cache);
  return backward(net, cache, y);
}

namespace {

using ExtMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ExtVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

struct ExtLayer {
  ExtMatrix weights;
  ExtVector bias;
};

// The numeric side runs in extended precision so that rounding in the loss
// does not swamp the difference quotient.
long double extended_loss(const std::vector<ExtLayer>& layers, const ExtMatrix& x, const ExtMatrix& y) {
  ExtMatrix a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    ExtMatrix z = a * layers[l].weights.transpose();
    z.rowwise() += layers[l].bias.transpose();
    a = l + 1 == layers.size() ? z : ExtMatrix(z.cwiseMax(0.0L));
  }
  return (a - y).squaredNorm() / static_cast<long double>(a.size());
}

}  // namespace

GradientCheckResult check_gradients(const Network& net, const GradientCheckSample& sample,
                                    double step, const GradientFn& analytic) {
  const Gradients g = analytic(net, sample.inputs, sample.targets);
  require(g.weights.size() == net.layers.size() && g.biases.size() == net.layers.size(),
          "gradient structure does not match the network");
  require(sample.inputs.cols() == net.input_size() && sample.targets.cols() == net.output_size() &&
              sample.inputs.rows() == sample.targets.rows() && sample.inputs.rows() > 0,
          "gradient check sample does not match the network");
  std::vector<ExtLayer> probe;
  for (const auto& l : net.layers) probe.push_back({l.weights.cast<long double>(), l.bias.cast<long double>()});
  const ExtMatrix x = sample.inputs.cast<long double>();
  const ExtMatrix y = sample.targets.cast<long double>();

  GradientCheckResult result;
  auto check = [&](long double& param, double analytic_value) {
    const long double saved = param;
    const long double up = saved + step;
    const long double down = saved - step;
    param = up;
    const long double plus = extended_loss(probe, x, y);
    param = down;
    const long double minus = extended_loss(probe, x, y);
    param = saved;
    const double numeric = static_cast<double>((plus - minus) / (up - down));
    const double denom = std::max({std::fabs(analytic_value), std::fabs(numeric), 1e-8});
    result.max_relative_error =
        std::max(result.max_relative_error, std::fabs(analytic_value - numeric) / denom);
    ++result.parameters_checked;
  };
  for (std::size_t l = 0; l < probe.size(); ++l) {
    auto& layer = probe[l];
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
        check(layer.weights(i, j), g.weights[l](i, j));
      }
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) check(layer.bias(i), g.biases[l](i));
  }
  return result;
}

double gradient_check(const GradientCheckConfig& cfg, const GradientCheckSample& sample) {
  Network net = init_network(cfg.input_size, cfg.hidden_sizes, cfg.output_size, cfg.seed);
  // Zero biases put whole rows exactly on a rectifier kink once every unit
  // of a layer is off; random biases move the check to a generic point.
  Rng rng(mix_seed(cfg.seed, "bias"));
  for (auto& layer : net.layers) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = rng.uniform(-0.5, 0.5);
  }
  return check_gradients(net, sample, cfg.step).max_relative_error;
}

GradientCheckSample random_gradient_sample(Eigen::Index rows, Eigen::Index input_size,
                                           Eigen::Index output_size, std::uint64_t seed) {
  Rng rng(seed);
  GradientCheckSample s;
  s.inputs.resize(rows, input_size);
  s.targets.resize(rows, output_size);
  for (Eigen::Index i = 0; i < s.inputs.size(); ++i) s.inputs.data()[i] = rng.uniform(-1.0, 1.0);
  for (Eigen::Index i = 0; i < s.targets.size(); ++i) s.targets.data()[i] = rng.uniform(-1.0, 1.0);
  return s;
}

}  // namespace emomap

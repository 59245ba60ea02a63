#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "emomap/ffnn.hpp"

namespace emomap {

struct GradientCheckConfig {
  Eigen::Index input_size = 3;
  std::vector<int> hidden_sizes{8, 8};  // may be empty for an affine network
  Eigen::Index output_size = 2;
  std::uint64_t seed = 0;
  double step = 1e-5;
};

struct GradientCheckSample {
  Matrix inputs;
  Matrix targets;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t parameters_checked = 0;
};

using GradientFn = std::function<Gradients(const Network&, const Matrix&, const Matrix&)>;

/// Analytic eval-mode gradients (dropout off).
Gradients analytic_gradients(const Network& net, const Matrix& x, const Matrix& y);

/// Compares `analytic` against central finite differences of the MSE loss
/// for every parameter; the error of one component is
/// |a - n| / max(|a|, |n|, 1e-8).
GradientCheckResult check_gradients(const Network& net, const GradientCheckSample& sample,
                                    double step = 1e-5, const GradientFn& analytic = analytic_gradients);

/// Builds a network from `cfg` and runs check_gradients on it.
double gradient_check(const GradientCheckConfig& cfg, const GradientCheckSample& sample);

/// Random inputs in [-1, 1] and targets in [-1, 1], seeded.
GradientCheckSample random_gradient_sample(Eigen::Index rows, Eigen::Index input_size,
                                           Eigen::Index output_size, std::uint64_t seed);

}  // namespace emomap

#include "emomap/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "emomap/rng.hpp"

namespace emomap::synthetic {

namespace {

AlignedLexicon shell(std::size_t n, const Options& o) {
  AlignedLexicon al;
  al.id = o.id;
  al.language = o.language;
  al.source_format = EmotionFormat::vad();
  al.target_format = EmotionFormat::be5();
  al.source.resize(static_cast<Eigen::Index>(n), 3);
  al.target.resize(static_cast<Eigen::Index>(n), 5);
  for (std::size_t i = 0; i < n; ++i) {
    al.words.push_back(o.word_prefix + std::to_string(i));
    al.origins.push_back({o.id, o.language});
  }
  return al;
}

void fill_source(AlignedLexicon& al, Rng& rng) {
  for (Eigen::Index i = 0; i < al.source.size(); ++i) al.source.data()[i] = rng.uniform(1.0, 9.0);
}

double noisy(double v, double noise_sd, Rng& rng) {
  if (noise_sd > 0.0) v += noise_sd * rng.normal();
  return std::clamp(v, 1.0, 5.0);
}

}  // namespace

AlignedLexicon affine(std::size_t n, std::uint64_t mapping_seed, std::uint64_t row_seed,
                      const Options& o) {
  Rng map_rng(mapping_seed);
  // Each row of a is scaled so that sum_j |a_kj| * 4 = 1.8: targets span 3 +- 1.8.
  Eigen::Matrix<double, 5, 3> a;
  Eigen::Matrix<double, 5, 1> c;
  for (int k = 0; k < 5; ++k) {
    for (int j = 0; j < 3; ++j) a(k, j) = map_rng.uniform(-1.0, 1.0);
    a.row(k) *= 1.8 / (4.0 * a.row(k).cwiseAbs().sum());
    c(k) = 3.0;
  }
  auto al = shell(n, o);
  Rng rng(row_seed);
  fill_source(al, rng);
  for (Eigen::Index i = 0; i < al.source.rows(); ++i) {
    const Eigen::Vector3d centered = al.source.row(i).transpose() - Eigen::Vector3d::Constant(5.0);
    const Eigen::Matrix<double, 5, 1> y = a * centered + c;
    for (int k = 0; k < 5; ++k) al.target(i, k) = noisy(y(k), o.noise_sd, rng);
  }
  return al;
}

AlignedLexicon affine(std::size_t n, std::uint64_t seed, const Options& options) {
  return affine(n, seed, mix_seed(seed, "rows"), options);
}

AlignedLexicon v_shaped(std::size_t n, std::uint64_t seed, const Options& o) {
  auto al = shell(n, o);
  Rng rng(seed);
  fill_source(al, rng);
  const double slope[5] = {0.8, 0.5, 0.6, 0.4, 0.3};
  const double tilt[5] = {0.05, -0.05, 0.03, 0.02, -0.02};
  for (Eigen::Index i = 0; i < al.source.rows(); ++i) {
    const double v = std::abs(al.source(i, 0) - 5.0);  // 0..4
    for (int k = 0; k < 5; ++k) {
      al.target(i, k) = noisy(1.2 + slope[k] * v + tilt[k] * (al.source(i, 1) - 5.0), o.noise_sd, rng);
    }
  }
  return al;
}

AlignedLexicon additive(std::size_t n, const std::array<double, 3>& coefficients,
                        std::uint64_t seed, const Options& o) {
  auto al = shell(n, o);
  Rng rng(seed);
  fill_source(al, rng);
  const double weight[5] = {1.0, -0.8, -0.9, -0.6, -0.7};
  for (Eigen::Index i = 0; i < al.source.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += coefficients[static_cast<std::size_t>(j)] * (al.source(i, j) - 5.0) / 4.0;
    for (int k = 0; k < 5; ++k) al.target(i, k) = noisy(3.0 + weight[k] * s, o.noise_sd, rng);
  }
  return al;
}

}  // namespace emomap::synthetic

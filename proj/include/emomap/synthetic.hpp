#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "emomap/lexicon.hpp"

namespace emomap::synthetic {

// Generators for VAD -> BE5 aligned lexicons with known structure. Source
// values are uniform on [1, 9]; targets stay inside [1, 5] by construction.

struct Options {
  std::string id = "synthetic";
  std::string language = "xx";
  std::string word_prefix = "w";
  double noise_sd = 0.0;
};

/// Targets are a fixed random affine function of all three source variables.
AlignedLexicon affine(std::size_t n, std::uint64_t seed, const Options& options = {});

/// Same mapping as affine() for a given mapping_seed; rows come from row_seed.
AlignedLexicon affine(std::size_t n, std::uint64_t mapping_seed, std::uint64_t row_seed,
                      const Options& options);

/// Targets depend on |valence - 5| (a symmetric V shape) plus a small
/// arousal term, so a straight line cannot follow them.
AlignedLexicon v_shaped(std::size_t n, std::uint64_t seed, const Options& options = {});

/// target_k = 3 + weight_k * sum_j coefficient_j * (source_j - 5) / 4 + noise.
AlignedLexicon additive(std::size_t n, const std::array<double, 3>& coefficients,
                        std::uint64_t seed, const Options& options = {});

}  // namespace emomap::synthetic

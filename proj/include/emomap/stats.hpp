#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emomap/lexicon.hpp"

namespace emomap {

/// Pearson correlation of two equally long series. Throws Degenerate when
/// either series is constant, Contract on length mismatch or n < 2.
double pearson(std::span<const double> x, std::span<const double> y);
double pearson(const Vector& x, const Vector& y);

/// Spearman-Brown adjustment: reliability when the rater pool grows by k.
double sba_adjust(double r, double k);

struct ReliabilityRecord {
  std::string dataset_id;
  std::string variable;
  double reported_r = 0.0;
  int n_participants = 0;
  bool sba_already_applied = false;
  std::optional<double> normalized_r;
};

inline constexpr int kNormalizedParticipants = 20;

/// Projects a reported split-half reliability onto n_star participants.
/// Already adjusted values stand for twice the pool, hence k = n_star / 2N.
ReliabilityRecord normalize_shr(ReliabilityRecord record, int n_star = kNormalizedParticipants);

/// Tab-separated reliability records:
/// dataset, variable, reported_r, n_participants, sba_applied (true|false).
std::vector<ReliabilityRecord> parse_reliability_records(std::string_view tsv);
/// Same layout plus a normalized_r column with 3 decimals.
std::string format_reliability_records(std::span<const ReliabilityRecord> records);

/// Items x raters for one variable.
struct RaterMatrix {
  std::vector<std::string> items;
  Matrix ratings;
  double scale_low = 0.0;
  double scale_high = 1.0;
};

struct SplitHalfResult {
  double reliability = 0.0;
  int used_iterations = 0;
  int skipped_iterations = 0;
};

/// Mean correlation between the rater-mean series of random halves
/// (sizes floor(R/2) and ceil(R/2)). Degenerate splits are skipped.
SplitHalfResult split_half_reliability_detail(const RaterMatrix& m, int iterations,
                                              std::uint64_t seed);
double split_half_reliability(const RaterMatrix& m, int iterations, std::uint64_t seed);

struct TTestResult {
  double t = 0.0;
  double p_two_tailed = 1.0;
  int df = 0;
  int stars = 0;
};

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);
/// Student-t cumulative distribution function.
double student_t_cdf(double t, double df);

int significance_stars(double p);
/// 0..3 to "", "*", "**", "***".
std::string_view format_stars(int stars);

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> x);

}  // namespace emomap

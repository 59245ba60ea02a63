#include "emomap/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "emomap/error.hpp"
#include "emomap/rng.hpp"

namespace emomap {

double mean(std::span<const double> x) {
  require(!x.empty(), "mean of an empty series");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorKind::Contract, "pearson: series lengths differ (" + std::to_string(x.size()) +
                                  " vs " + std::to_string(y.size()) + ")");
  }
  require(x.size() >= 2, "pearson needs at least two observations");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    fail(ErrorKind::Degenerate, "pearson: zero variance series");
  }
  // sqrt(a * a) == a exactly, so identical or negated series give exactly +-1.
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double pearson(const Vector& x, const Vector& y) {
  return pearson(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                 std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

double sba_adjust(double r, double k) {
  if (!(r > 0.0 && r <= 1.0)) {
    fail(ErrorKind::Domain, "Spearman-Brown adjustment needs 0 < r <= 1, got " + std::to_string(r));
  }
  if (!(k > 0.0)) fail(ErrorKind::Domain, "Spearman-Brown factor must be positive");
  if (r == 1.0) return 1.0;  // exact fixed point; k / (1 + (k - 1)) can round
  return k * r / (1.0 + (k - 1.0) * r);
}

ReliabilityRecord normalize_shr(ReliabilityRecord record, int n_star) {
  require(record.n_participants >= 1, "reliability record needs n_participants >= 1");
  require(n_star >= 1, "normalized participant count must be positive");
  const double n = record.n_participants;
  const double k = record.sba_already_applied ? n_star / (2.0 * n) : n_star / n;
  record.normalized_r = sba_adjust(record.reported_r, k);
  return record;
}

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string fixed3(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 3);
  return std::string(buf, res.ptr);
}

}  // namespace

std::vector<ReliabilityRecord> parse_reliability_records(std::string_view tsv) {
  std::vector<ReliabilityRecord> records;
  long row = 0;
  std::string text(tsv);
  std::erase(text, '\r');
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line, '\t');
    if (row == 1 && !cells.empty() && cells[0] == "dataset") continue;
    if (cells.size() < 5) {
      fail(ErrorKind::Parse, "reliability row " + std::to_string(row) + ": expected 5 fields");
    }
    ReliabilityRecord rec;
    rec.dataset_id = cells[0];
    rec.variable = cells[1];
    const auto parse_num = [&](const std::string& s, auto& out, const char* what) {
      const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
      if (ec != std::errc{} || p != s.data() + s.size()) {
        fail(ErrorKind::Parse, "reliability row " + std::to_string(row) + ": bad " + what + " '" +
                                   s + "'");
      }
    };
    parse_num(cells[2], rec.reported_r, "reported_r");
    parse_num(cells[3], rec.n_participants, "n_participants");
    if (cells[4] == "true") {
      rec.sba_already_applied = true;
    } else if (cells[4] != "false") {
      fail(ErrorKind::Parse, "reliability row " + std::to_string(row) +
                                 ": sba_applied must be true or false");
    }
    if (!(rec.reported_r > 0.0 && rec.reported_r <= 1.0)) {
      fail(ErrorKind::Validation, "reliability row " + std::to_string(row) +
                                      ": reported_r must lie in (0, 1]");
    }
    if (rec.n_participants < 1) {
      fail(ErrorKind::Validation, "reliability row " + std::to_string(row) +
                                      ": n_participants must be positive");
    }
    if (cells.size() >= 6 && !cells[5].empty()) {
      double v = 0.0;
      parse_num(cells[5], v, "normalized_r");
      rec.normalized_r = v;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::string format_reliability_records(std::span<const ReliabilityRecord> records) {
  std::string out = "dataset\tvariable\treported_r\tn_participants\tsba_applied\tnormalized_r\n";
  for (const auto& r : records) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, r.reported_r);
    out += r.dataset_id + '\t' + r.variable + '\t' + std::string(buf, res.ptr) + '\t' +
           std::to_string(r.n_participants) + '\t' + (r.sba_already_applied ? "true" : "false") +
           '\t' + (r.normalized_r ? fixed3(*r.normalized_r) : std::string()) + '\n';
  }
  return out;
}

SplitHalfResult split_half_reliability_detail(const RaterMatrix& m, int iterations,
                                              std::uint64_t seed) {
  const auto n_items = m.ratings.rows();
  const auto n_raters = m.ratings.cols();
  require(n_raters >= 2, "split-half reliability needs at least two raters");
  require(n_items >= 3, "split-half reliability needs at least three items");
  require(iterations >= 1, "split-half reliability needs at least one iteration");
  require(m.items.empty() || static_cast<Eigen::Index>(m.items.size()) == n_items,
          "rater matrix item list does not match its rows");

  Rng rng(seed);
  const auto half = static_cast<std::size_t>(n_raters / 2);
  SplitHalfResult result;
  double sum = 0.0;
  Vector a(n_items), b(n_items);
  for (int it = 0; it < iterations; ++it) {
    const auto perm = rng.permutation(static_cast<std::size_t>(n_raters));
    a.setZero();
    b.setZero();
    for (std::size_t k = 0; k < perm.size(); ++k) {
      const auto col = m.ratings.col(static_cast<Eigen::Index>(perm[k]));
      if (k < half) a += col; else b += col;
    }
    a /= static_cast<double>(half);
    b /= static_cast<double>(perm.size() - half);
    try {
      sum += pearson(a, b);
      ++result.used_iterations;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate) throw;
      ++result.skipped_iterations;
    }
  }
  if (result.used_iterations == 0) {
    fail(ErrorKind::Degenerate, "split-half reliability: every split was degenerate");
  }
  result.reliability = sum / result.used_iterations;
  return result;
}

double split_half_reliability(const RaterMatrix& m, int iterations, std::uint64_t seed) {
  return split_half_reliability_detail(m, iterations, seed).reliability;
}

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  fail(ErrorKind::Degenerate, "incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  require(a > 0.0 && b > 0.0, "incomplete beta needs positive shape parameters");
  require(x >= 0.0 && x <= 1.0, "incomplete beta argument outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges fast only on one side of the mean.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
  require(df > 0.0, "Student t needs positive degrees of freedom");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
  return t >= 0.0 ? 1.0 - tail : tail;
}

int significance_stars(double p) {
  if (p < 0.001) return 3;
  if (p < 0.01) return 2;
  if (p < 0.05) return 1;
  return 0;
}

std::string_view format_stars(int stars) {
  switch (stars) {
    case 1: return "*";
    case 2: return "**";
    case 3: return "***";
    default: return "";
  }
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::Contract, "paired t-test: series lengths differ");
  require(a.size() >= 2, "paired t-test needs at least two pairs");
  const auto n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double md = mean(d);
  double ss = 0.0;
  for (double v : d) ss += (v - md) * (v - md);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) fail(ErrorKind::Degenerate, "paired t-test: differences have zero variance");
  TTestResult res;
  res.df = static_cast<int>(n - 1);
  res.t = md / (sd / std::sqrt(static_cast<double>(n)));
  res.p_two_tailed = std::min(1.0, incomplete_beta(0.5 * res.df, 0.5, res.df / (res.df + res.t * res.t)));
  res.stars = significance_stars(res.p_two_tailed);
  return res;
}

}  // namespace emomap

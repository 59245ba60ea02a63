#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "emomap/error.hpp"
#include "emomap/rng.hpp"
#include "emomap/stats.hpp"
#include "oracles.hpp"

using namespace emomap;
using V = std::vector<double>;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an emomap::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("pearson on hand-checked series") {
  CHECK(pearson(V{1, 2, 3}, V{2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(V{1, 2, 3}, V{6, 4, 2}) == doctest::Approx(-1.0).epsilon(1e-15));
  // covariance sum 4, both deviation sums 5
  CHECK(std::abs(pearson(V{1, 2, 3, 4}, V{1, 3, 2, 4}) - 0.8) < 1e-15);
}

TEST_CASE("pearson errors") {
  CHECK(kind_of([] { pearson(V{1, 1, 1}, V{1, 2, 3}); }) == ErrorKind::Degenerate);
  CHECK(kind_of([] { pearson(V{1, 2, 3}, V{4, 4, 4}); }) == ErrorKind::Degenerate);
  CHECK(kind_of([] { pearson(V{1, 2, 3}, V{1, 2}); }) == ErrorKind::Contract);
  CHECK(kind_of([] { pearson(V{1}, V{1}); }) == ErrorKind::Contract);
}

TEST_CASE("pearson invariances and brute-force agreement") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 2 + rng.below(60);
    V x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-5, 5);
      y[i] = 0.3 * x[i] + rng.uniform(-5, 5);
    }
    const double r = pearson(x, y);
    CHECK(std::abs(r - oracle::brute_pearson(x, y)) < 1e-12);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    CHECK(std::abs(pearson(y, x) - r) < 1e-12);
    const double shift = rng.uniform(-100, 100);
    const double scale = rng.uniform(0.1, 10);
    V xs(n), xn(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = scale * x[i] + shift;
      xn[i] = -scale * x[i];
    }
    CHECK(std::abs(pearson(xs, y) - r) < 1e-10);
    CHECK(std::abs(pearson(xn, y) + r) < 1e-10);
  }
}

TEST_CASE("Spearman-Brown adjustment") {
  CHECK(sba_adjust(1.0, 3) == 1.0);
  CHECK(std::abs(sba_adjust(0.5, 2) - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(sba_adjust(0.8, 0.25) - 0.5) < 1e-15);
  CHECK(kind_of([] { sba_adjust(0.0, 2); }) == ErrorKind::Domain);
  CHECK(kind_of([] { sba_adjust(-0.3, 2); }) == ErrorKind::Domain);
  CHECK(kind_of([] { sba_adjust(0.5, 0); }) == ErrorKind::Domain);
}

TEST_CASE("Spearman-Brown monotonicity") {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const double r1 = rng.uniform(0.01, 0.98);
    const double r2 = r1 + rng.uniform(0.001, 0.99 - r1 + 0.001);
    const double k = rng.uniform(0.05, 20);
    if (r2 <= 1.0) CHECK(sba_adjust(r1, k) < sba_adjust(r2, k));
    CHECK(sba_adjust(r1, k) < sba_adjust(r1, k * 1.5));
    CHECK(std::abs(sba_adjust(r1, 1.0) - r1) < 1e-15);
  }
}

TEST_CASE("normalize_shr chains the adjustment") {
  ReliabilityRecord a{"d", "valence", 0.8, 40, true, {}};
  CHECK(std::abs(*normalize_shr(a).normalized_r - 0.5) < 1e-15);
  ReliabilityRecord b{"d", "valence", 0.7, 10, false, {}};
  CHECK(std::abs(*normalize_shr(b).normalized_r - 1.4 / 1.7) < 1e-15);
  for (int n : {1, 7, 20, 300}) {
    ReliabilityRecord c{"d", "joy", 1.0, n, n % 2 == 0, {}};
    CHECK(*normalize_shr(c).normalized_r == 1.0);
  }
  ReliabilityRecord id{"d", "joy", 0.637, 20, false, {}};
  CHECK(std::abs(*normalize_shr(id).normalized_r - 0.637) < 1e-15);
  ReliabilityRecord bad{"d", "joy", 0.5, 0, false, {}};
  CHECK(kind_of([&] { normalize_shr(bad); }) == ErrorKind::Contract);
}

TEST_CASE("reliability TSV round trip") {
  const std::string tsv =
      "dataset\tvariable\treported_r\tn_participants\tsba_applied\n"
      "d1\tvalence\t0.8\t40\ttrue\n"
      "d2\tjoy\t0.7\t10\tfalse\n";
  auto recs = parse_reliability_records(tsv);
  REQUIRE(recs.size() == 2);
  for (auto& r : recs) r = normalize_shr(r);
  const auto out = format_reliability_records(recs);
  CHECK(out ==
        "dataset\tvariable\treported_r\tn_participants\tsba_applied\tnormalized_r\n"
        "d1\tvalence\t0.8\t40\ttrue\t0.500\n"
        "d2\tjoy\t0.7\t10\tfalse\t0.824\n");
  CHECK(kind_of([] { parse_reliability_records("d\tv\t0.5\t10\tmaybe\n"); }) == ErrorKind::Parse);
  CHECK(kind_of([] { parse_reliability_records("d\tv\t1.5\t10\ttrue\n"); }) == ErrorKind::Validation);
}

TEST_CASE("split-half reliability basics") {
  RaterMatrix m;
  m.ratings.resize(5, 4);
  for (int i = 0; i < 5; ++i) m.ratings.row(i).setConstant(i + 1.0);
  CHECK(split_half_reliability(m, 100, 1) == doctest::Approx(1.0).epsilon(1e-14));

  RaterMatrix single;
  single.ratings = Matrix::Ones(5, 1);
  CHECK(kind_of([&] { split_half_reliability(single, 100, 1); }) == ErrorKind::Contract);

  RaterMatrix flat;
  flat.ratings = Matrix::Ones(5, 4);
  CHECK(kind_of([&] { split_half_reliability(flat, 10, 1); }) == ErrorKind::Degenerate);
}

TEST_CASE("split-half reliability is seeded and approaches 1 as noise vanishes") {
  const auto m = oracle::simulate_raters(200, 20, 1.0, 5);
  CHECK(split_half_reliability(m, 100, 42) == split_half_reliability(m, 100, 42));
  double previous = -1.0;
  for (double sd : {3.0, 1.0, 0.3, 0.1, 0.01}) {
    const double r = split_half_reliability(oracle::simulate_raters(200, 20, sd, 17), 100, 7);
    CHECK(r > previous);
    previous = r;
  }
  CHECK(previous > 0.9999);
}

TEST_CASE("split-half reliability with an odd rater count") {
  const auto m = oracle::simulate_raters(100, 7, 0.5, 23);
  const auto res = split_half_reliability_detail(m, 50, 3);
  CHECK(res.used_iterations == 50);
  CHECK(res.reliability > 0.8);
}

TEST_CASE("split-half reliability matches the Monte-Carlo expectation") {
  // Frozen from tests/oracles/shr_oracle.cpp (1,000 resamples).
  struct Level {
    double analytic;
    double monte_carlo;
  };
  for (auto [analytic, mc] : {Level{0.95, 0.949673}, Level{0.90, 0.899238}, Level{0.80, 0.799458}}) {
    const double sd = std::sqrt(10.0 * (1.0 / analytic - 1.0));
    const double r = split_half_reliability(oracle::simulate_raters(200, 20, sd, 2024), 100, 77);
    CHECK(std::abs(r - mc) < 0.05);
    CHECK(std::abs(r - analytic) < 0.05);
  }
}

TEST_CASE("incomplete beta and Student t against quadrature") {
  for (double df : {1.0, 2.0, 3.5, 9.0, 30.0}) {
    for (double t : {-4.0, -1.3, -0.2, 0.0, 0.7, 2.2, 6.0}) {
      CHECK(std::abs(student_t_cdf(t, df) - oracle::t_cdf_quadrature(t, df)) < 1e-9);
    }
  }
  CHECK(incomplete_beta(2, 3, 0) == 0.0);
  CHECK(incomplete_beta(2, 3, 1) == 1.0);
  // I_x(1, 1) = x and I_x(a, 1) = x^a
  CHECK(std::abs(incomplete_beta(1, 1, 0.37) - 0.37) < 1e-14);
  CHECK(std::abs(incomplete_beta(3, 1, 0.5) - 0.125) < 1e-14);
}

TEST_CASE("paired t-test") {
  CHECK(kind_of([] { paired_t_test(V{1, 2, 3}, V{1, 2, 3}); }) == ErrorKind::Degenerate);
  CHECK(kind_of([] { paired_t_test(V{1, 2}, V{1}); }) == ErrorKind::Contract);

  const auto r = paired_t_test(V{1, 2, 3}, V{0, 0, 0});
  CHECK(std::abs(r.t - 2.0 * std::sqrt(3.0)) < 1e-12);
  CHECK(r.df == 2);
  // df = 2 has a closed form: p = 1 - |t| / sqrt(t^2 + 2)
  CHECK(std::abs(r.p_two_tailed - (1.0 - r.t / std::sqrt(r.t * r.t + 2.0))) < 1e-12);
  CHECK(std::abs(r.p_two_tailed - 0.0742) < 5e-5);
  CHECK(std::abs(r.p_two_tailed - oracle::two_tailed_p_quadrature(r.t, 2)) < 1e-9);
  CHECK(r.stars == 0);

  const V d{0.1, 0.1, 0.1, 0.1, 0.1, 0.2};
  const auto q = paired_t_test(d, V(6, 0.0));
  double m = 0, ss = 0;
  for (double v : d) m += v / 6;
  for (double v : d) ss += (v - m) * (v - m);
  const double t_expected = m / (std::sqrt(ss / 5) / std::sqrt(6.0));
  CHECK(std::abs(q.t - t_expected) < 1e-6);
  CHECK(std::abs(q.p_two_tailed - oracle::two_tailed_p_quadrature(q.t, 5)) < 1e-6);
  CHECK(q.stars == 3);
}

TEST_CASE("paired t-test antisymmetry") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 2 + rng.below(20);
    V a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
    }
    const auto ab = paired_t_test(a, b);
    const auto ba = paired_t_test(b, a);
    CHECK(ab.t == -ba.t);
    CHECK(std::abs(ab.p_two_tailed - ba.p_two_tailed) < 1e-15);
  }
}

TEST_CASE("star formatting") {
  CHECK(significance_stars(0.0005) == 3);
  CHECK(significance_stars(0.005) == 2);
  CHECK(significance_stars(0.03) == 1);
  CHECK(significance_stars(0.05) == 0);
  CHECK(format_stars(0) == "");
  CHECK(format_stars(2) == "**");
  CHECK(format_stars(3) == "***");
}

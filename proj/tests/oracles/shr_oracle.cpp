// Monte-Carlo expectation of the split-half reliability for 20 simulated
// raters (true item score ~ N(0,1) plus independent N(0, sigma^2) noise per
// rater) over 200 items. Raters are exchangeable, so a fixed 10/10 split has
// the same distribution as a random one. Output is frozen into the tests.
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

static double brute_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
  mx /= x.size(); my /= y.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

int main() {
  const int items = 200, raters = 20, resamples = 1000;
  const double noise_sd[] = {std::sqrt(10.0 * (1.0 / 0.95 - 1.0)), std::sqrt(10.0 * (1.0 / 0.9 - 1.0)),
                             std::sqrt(10.0 * (1.0 / 0.8 - 1.0))};
  std::mt19937_64 gen(20180801);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double sd : noise_sd) {
    double total = 0.0;
    for (int s = 0; s < resamples; ++s) {
      std::vector<double> a(items, 0.0), b(items, 0.0);
      for (int i = 0; i < items; ++i) {
        const double truth = normal(gen);
        for (int r = 0; r < raters; ++r) {
          const double v = truth + sd * normal(gen);
          (r < raters / 2 ? a : b)[i] += v / (raters / 2);
        }
      }
      total += brute_pearson(a, b);
    }
    const double analytic = 1.0 / (1.0 + sd * sd / 10.0);
    std::printf("noise_sd=%.17g analytic=%.6f monte_carlo=%.6f\n", sd, analytic, total / resamples);
  }
}

#include <doctest.h>

#include "oracles.hpp"
#include "selfsim/process1d.hpp"

#include <cmath>
#include <numbers>

using namespace selfsim;

namespace {
// Drift-zero constant of the 1-D process: E log|Z| = -(gamma + ln 2)/2.
constexpr double kMeanLogAbsNormal = -0.6351814227307391;
}  // namespace

TEST_CASE("conditional density: plug-in values and the domain error") {
  // (2 pi)^{-1/2}
  CHECK(conditional_density_1d(0.0, 1.0, 1.0) ==
        doctest::Approx(0.3989422804014327).epsilon(1e-14));
  // standard normal pdf at 1: (2 pi)^{-1/2} e^{-1/2}
  CHECK(conditional_density_1d(1.0, 1.0, 1.0) ==
        doctest::Approx(0.24197072451914337).epsilon(1e-14));
  CHECK_THROWS_AS(conditional_density_1d(0.3, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(conditional_density_1d(0.3, 1.0, -2.0), std::invalid_argument);
}

TEST_CASE("self-similarity: density(lambda y', lambda y) = density(y', y)/lambda") {
  RngStream rng(2);
  for (int i = 0; i < 200; ++i) {
    const double y = rng.normal();
    if (y == 0.0) continue;
    const double yn = rng.normal();
    const double kappa = rng.uniform(0.2, 3.0);
    const double lam = rng.uniform(0.1, 10.0);
    const double lhs = conditional_density_1d(lam * yn, lam * y, kappa);
    const double rhs = conditional_density_1d(yn, y, kappa) / lam;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("sampling is deterministic given (params, seed)") {
  Process1DParams params;
  params.kappa = 0.7;
  params.n_steps = 500;
  params.seed = 99;
  RngStream a(params.seed), b(params.seed);
  const DeviationPath pa = sample_deviation_path(params, a);
  const DeviationPath pb = sample_deviation_path(params, b);
  for (int j = 0; j < pa.size(); ++j) {
    CHECK(pa.log_abs(j) == pb.log_abs(j));
    CHECK(pa.sign(j) == pb.sign(j));
  }
}

TEST_CASE("condensed drift: |y_n| < |y_1| in >= 99% of runs at kappa = 0.2") {
  Process1DParams params;
  params.kappa = 0.2;
  params.n_steps = 10000;
  int shrunk = 0;
  const int runs = 1000;
  for (int r = 0; r < runs; ++r) {
    RngStream rng = RngStream::replica(123, static_cast<std::uint64_t>(r));
    const DeviationPath p = sample_deviation_path(params, rng);
    if (p.log_abs(p.size() - 1) < p.log_abs(0)) ++shrunk;
  }
  CHECK(shrunk >= static_cast<int>(0.99 * runs));
}

TEST_CASE("ratios y_{j+1}/(kappa |y_j|) pass a KS normality check") {
  Process1DParams params;
  params.kappa = 1.3;
  params.n_steps = 50000;
  params.seed = 31;
  RngStream rng(params.seed);
  const DeviationPath p = sample_deviation_path(params, rng);
  std::vector<double> ratios;
  ratios.reserve(p.size() - 1);
  for (int j = 1; j < p.size(); ++j) {
    const double mag = std::exp(p.log_abs(j) - p.log_abs(j - 1)) / params.kappa;
    ratios.push_back(p.sign(j) * mag);
  }
  const double d = oracles::ks_statistic(ratios, oracles::normal_cdf);
  const double critical = 1.358 / std::sqrt(static_cast<double>(ratios.size()));
  CHECK(d < critical);  // 5% level
}

TEST_CASE("drift law matches the Monte Carlo oracle for E log|Z|") {
  // oracle first: brute-force E log|Z| over 10^6 draws
  const double oracle = oracles::mc_mean_log_abs_normal(1000000, 77);
  CHECK(oracle == doctest::Approx(kMeanLogAbsNormal).epsilon(2e-2));
  // analytic reference: -(gamma_Euler + ln 2)/2
  CHECK(kMeanLogAbsNormal ==
        doctest::Approx(-(std::numbers::egamma + std::numbers::ln2) / 2.0)
            .epsilon(1e-14));

  Process1DParams params;
  params.kappa = 1.4;
  params.n_steps = 10000;
  RunningStat stat;
  for (int r = 0; r < 200; ++r) {
    RngStream rng = RngStream::replica(5150, static_cast<std::uint64_t>(r));
    const DeviationPath p = sample_deviation_path(params, rng);
    double acc = 0.0;
    for (int j = 1; j < p.size(); ++j) acc += p.log_abs(j) - p.log_abs(j - 1);
    stat.add(acc / (p.size() - 1));
  }
  const double expected = std::log(params.kappa) + oracle;
  const double se = std::sqrt(stat.variance() / stat.n + 1.2337 / 1e6);
  CHECK(std::fabs(stat.mean - expected) <= 3.0 * se);
}

TEST_CASE("build positions: cumulative sums, exact on hand examples") {
  Process1DParams params;
  params.kappa = 1.0;
  params.n_steps = 2;
  {
    const Path1D p = build_path(0.0, DeviationPath::from_values(params, {1.0, 0.5}));
    CHECK(p.x == std::vector<double>{0.0, 1.0, 1.5});
  }
  {
    Process1DParams q = params;
    q.n_steps = 3;
    const Path1D p = build_path(5.0, DeviationPath::from_values(q, {-1.0, -1.0, -1.0}));
    CHECK(p.x == std::vector<double>{5.0, 4.0, 3.0, 2.0});
  }
  CHECK_THROWS_AS(DeviationPath::from_values(params, {1.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("position consistency: x_k = x_0 + sum y_j to 1e-12") {
  Process1DParams params;
  params.kappa = 1.1;
  params.n_steps = 300;
  RngStream rng(8);
  const Path1D p = sample_path(params, rng);
  double acc = p.x0;
  for (int j = 0; j < p.dev.size(); ++j) {
    acc += p.dev.value(j);
    CHECK(p.x[j + 1] == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("condensed phase: tail of the position sequence is Cauchy") {
  Process1DParams params;
  params.kappa = 0.5;
  params.n_steps = 4000;
  params.seed = 12;
  RngStream rng(params.seed);
  const Path1D p = sample_path(params, rng);
  auto tail_spread = [&](int n) {
    double lo = p.x[n], hi = p.x[n];
    for (int k = n / 2; k <= n; ++k) {
      lo = std::min(lo, p.x[k]);
      hi = std::max(hi, p.x[k]);
    }
    return hi - lo;
  };
  const double t1 = tail_spread(1000);
  const double t2 = tail_spread(2000);
  const double t3 = tail_spread(4000);
  CHECK(t2 <= t1);
  CHECK(t3 <= t2);
  CHECK(t3 <= 1e-100);  // deep in the condensed tail the spread collapses
}

TEST_CASE("parameter validation names the offending field") {
  Process1DParams params;
  params.kappa = -1.0;
  CHECK_THROWS_WITH_AS(params.validate(), doctest::Contains("kappa"),
                       std::invalid_argument);
  params.kappa = 1.0;
  params.n_steps = 1;
  CHECK_THROWS_WITH_AS(params.validate(), doctest::Contains("n_steps"),
                       std::invalid_argument);
  params.n_steps = 2000000;
  CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}

#pragma once

// Test-side oracles, kept independent of the library implementation paths
// they check: finite differences for Jacobians, hand-rolled determinants,
// Kolmogorov-Smirnov statistics, brute-force Monte Carlo constants, and a
// plain-double Radon-Nikodym factor built directly from the density
// formulas.

#include "selfsim/diffeo.hpp"
#include "selfsim/process1d.hpp"
#include "selfsim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracles {

// Determinant by Gaussian elimination with partial pivoting (d <= 8).
inline double det_gauss(std::vector<std::vector<double>> m) {
  const std::size_t n = m.size();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
    if (m[piv][c] == 0.0) return 0.0;
    if (piv != c) {
      std::swap(m[piv], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  return det;
}

// Central finite-difference Jacobian determinant of a diffeomorphism.
inline double fd_jacobian(const selfsim::Diffeo& phi, const selfsim::Point& x,
                          double h = 1e-6) {
  const int d = phi.dim();
  std::vector<std::vector<double>> m(d, std::vector<double>(d));
  for (int j = 0; j < d; ++j) {
    selfsim::Point xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const selfsim::Point fp = phi.apply(xp);
    const selfsim::Point fm = phi.apply(xm);
    for (int i = 0; i < d; ++i) m[i][j] = (fp[i] - fm[i]) / (2.0 * h);
  }
  return det_gauss(std::move(m));
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample KS statistic against a continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> sample, const Cdf& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Two-sample KS statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    const double fa = static_cast<double>(i) / a.size();
    const double fb = static_cast<double>(j) / b.size();
    d = std::max(d, std::fabs(fa - fb));
  }
  return d;
}

// Brute-force Monte Carlo estimate of E log|Z|, Z standard normal.
inline double mc_mean_log_abs_normal(std::int64_t draws, std::uint64_t seed) {
  selfsim::RngStream rng(seed);
  double sum = 0.0;
  for (std::int64_t i = 0; i < draws; ++i) {
    double z = rng.normal();
    while (z == 0.0) z = rng.normal();
    sum += std::log(std::fabs(z));
  }
  return sum / static_cast<double>(draws);
}

// Direct per-coordinate RN factor on plain doubles: transformed deviations
// by explicit subtraction, densities from the textbook formulas.  Valid only
// while the path stays far from underflow; used to pin the log-space
// implementation on moderate paths.
inline double direct_rn_factor(const selfsim::Path1D& path, const selfsim::Diffeo& phi,
                               int j) {
  const auto& p = path.params;
  const int m = j - 1;
  auto f0 = [&](double x) {
    const double z = (x - p.f0_location) / p.f0_scale;
    return std::exp(-0.5 * z * z) / (p.f0_scale * std::sqrt(2.0 * M_PI));
  };
  auto g1 = [](double y) { return std::exp(-0.5 * y * y) / std::sqrt(2.0 * M_PI); };
  auto gk = [&](double y_next, double y_prev) {
    const double r = y_next / y_prev;
    return std::exp(-r * r / (2.0 * p.kappa * p.kappa)) /
           (p.kappa * std::fabs(y_prev) * std::sqrt(2.0 * M_PI));
  };
  const double xm = path.x[m];
  const double jac = phi.jacobian1(xm);
  if (m == 0) return f0(phi.apply1(xm)) / f0(xm) * jac;
  auto dev_t = [&](int i) {  // transformed deviation y'_i (1-based deviation i)
    return phi.apply1(path.x[i]) - phi.apply1(path.x[i - 1]);
  };
  auto dev = [&](int i) { return path.x[i] - path.x[i - 1]; };
  if (m == 1) return g1(dev_t(1)) / g1(dev(1)) * jac;
  return gk(dev_t(m), dev_t(m - 1)) / gk(dev(m), dev(m - 1)) * jac;
}

// Admissible random bump (amplitude a uniform fraction of the bound).
inline selfsim::Diffeo random_bump(selfsim::RngStream& rng, int dim,
                                   double center_spread = 2.0,
                                   double max_fraction = 0.8) {
  selfsim::Point c(dim), u(dim);
  for (int i = 0; i < dim; ++i) c[i] = rng.uniform(-center_spread, center_spread);
  double nrm = 0.0;
  while (nrm < 1e-6) {
    for (int i = 0; i < dim; ++i) u[i] = rng.normal();
    nrm = u.norm();
  }
  u /= nrm;
  const double radius = rng.uniform(0.5, 2.0);
  const double frac = rng.uniform(-max_fraction, max_fraction);
  return selfsim::bump_flow(dim, c, radius,
                            frac * selfsim::max_bump_amplitude(radius), u);
}

}  // namespace oracles

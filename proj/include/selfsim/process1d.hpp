#pragma once

// The 1-D self-similar Gaussian process: x_0 from a nowhere-vanishing
// density f0 (normal, configurable location/scale), y_1 standard normal,
// and then each deviation scaled by the previous one,
//
//     y_{j+1} | y_j  ~  Normal(0, (kappa |y_j|)^2),
//
// so the conditional density is
//     g(y' | y) = (2 pi)^{-1/2} / (kappa |y|) * exp[-(y'/y)^2 / (2 kappa^2)].
//
// Deviations are carried as (sign, log|y|).  In the condensed phase log|y|
// decreases linearly in j and leaves the range of double long before
// desk-scale truncations are reached; the log representation keeps every
// downstream ratio well defined.  Materialized positions saturate at
// +/- 1e300 instead of overflowing to infinity (the `saturated` flag on the
// result records when that happened).

#include "selfsim/common.hpp"
#include "selfsim/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace selfsim {

struct Process1DParams {
  double kappa = 1.0;
  int n_steps = 2;          // number of deviations per path
  double f0_location = 0.0; // initial density: Normal(location, scale^2)
  double f0_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Log-density of the initial distribution f0 at x.
double log_f0(const Process1DParams& params, double x);

class DeviationPath {
 public:
  DeviationPath() = default;  // empty; populated paths come from the factories

  DeviationPath(Process1DParams params, std::vector<double> log_abs,
                std::vector<std::int8_t> sign);

  /// Builds from plain deviation values; rejects exact zeros.
  static DeviationPath from_values(Process1DParams params,
                                   const std::vector<double>& y);

  const Process1DParams& params() const { return params_; }
  int size() const { return static_cast<int>(log_abs_.size()); }

  double log_abs(int j) const { return log_abs_[j]; }     // j in [0, size)
  double sign(int j) const { return sign_[j]; }
  /// Materialized value sign * exp(log|y|); may underflow/overflow as a
  /// double even though the stored representation does not.
  double value(int j) const { return sign_[j] * std::exp(log_abs_[j]); }

  std::vector<double> values() const;

  /// How many proposals were rejected for being exactly zero (diagnostic).
  int resampled = 0;

 private:
  Process1DParams params_;
  std::vector<double> log_abs_;
  std::vector<std::int8_t> sign_;
};

/// Sequentially samples y_1 ~ N(0,1), y_{j+1} ~ N(0, (kappa |y_j|)^2).
/// Exact floating-point zeros (a measure-zero event) are resampled at the
/// same step.  Deterministic given (params, rng state).
DeviationPath sample_deviation_path(const Process1DParams& params, RngStream& rng);

/// Draw x_0 from f0.
double sample_x0(const Process1DParams& params, RngStream& rng);

/// Conditional density g(y_next | y_prev) of Gaussian self-similar scaling.
/// Throws std::domain_error when y_prev == 0.
double conditional_density_1d(double y_next, double y_prev, double kappa);
double log_conditional_density_1d(double y_next, double y_prev, double kappa);

/// A generic point sequence in R^d (projection input, JSONL payload).
struct SequencePath {
  int dim = 1;
  std::vector<Point> points;
  std::string provenance;
  bool saturated = false;  // some positions were clamped at +/-1e300
};

/// 1-D path with positions and log-space deviations side by side; the form
/// consumed by the Radon-Nikodym machinery.
struct Path1D {
  Process1DParams params;
  double x0 = 0.0;
  std::vector<double> x;    // positions x_0 .. x_n  (n = dev.size())
  DeviationPath dev;
  bool saturated = false;

  int n_points() const { return static_cast<int>(x.size()); }
};

/// Positions x_k = x_0 + sum_{j<=k} y_j, saturating at +/-1e300.
Path1D build_path(double x0, DeviationPath dev);

/// Convenience: sample x0 and the deviations, then build positions.
Path1D sample_path(const Process1DParams& params, RngStream& rng);

SequencePath to_sequence(const Path1D& path);

}  // namespace selfsim

#include "selfsim/process1d.hpp"

#include <numbers>
#include <sstream>

namespace selfsim {

namespace {
constexpr double kHalfLog2Pi = 0.9189385332046727;  // log(2*pi)/2
constexpr double kPositionSaturation = 1e300;
constexpr int kMaxSteps = 1000000;
}  // namespace

void Process1DParams::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (n_steps < 2) throw std::invalid_argument("n_steps must be at least 2");
  if (n_steps > kMaxSteps)
    throw std::invalid_argument("n_steps must be at most 1000000");
  if (!(f0_scale > 0.0)) throw std::invalid_argument("f0_scale must be positive");
  if (!std::isfinite(f0_location))
    throw std::invalid_argument("f0_location must be finite");
}

double log_f0(const Process1DParams& params, double x) {
  const double z = (x - params.f0_location) / params.f0_scale;
  return -0.5 * z * z - std::log(params.f0_scale) - kHalfLog2Pi;
}

DeviationPath::DeviationPath(Process1DParams params, std::vector<double> log_abs,
                             std::vector<std::int8_t> sign)
    : params_(std::move(params)), log_abs_(std::move(log_abs)), sign_(std::move(sign)) {
  params_.validate();
  if (log_abs_.size() != sign_.size() || log_abs_.empty())
    throw std::invalid_argument("DeviationPath: inconsistent deviation arrays");
  for (double v : log_abs_)
    if (!std::isfinite(v))
      throw std::invalid_argument(
          "DeviationPath: log|y| must be finite (zero deviations are not representable)");
}

DeviationPath DeviationPath::from_values(Process1DParams params,
                                         const std::vector<double>& y) {
  std::vector<double> la(y.size());
  std::vector<std::int8_t> sg(y.size());
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] == 0.0)
      throw std::invalid_argument("DeviationPath: deviation y_" +
                                  std::to_string(j + 1) + " is exactly zero");
    la[j] = std::log(std::fabs(y[j]));
    sg[j] = y[j] > 0.0 ? 1 : -1;
  }
  return DeviationPath(std::move(params), std::move(la), std::move(sg));
}

std::vector<double> DeviationPath::values() const {
  std::vector<double> y(log_abs_.size());
  for (std::size_t j = 0; j < y.size(); ++j)
    y[j] = sign_[j] * std::exp(log_abs_[j]);
  return y;
}

DeviationPath sample_deviation_path(const Process1DParams& params, RngStream& rng) {
  params.validate();
  const int n = params.n_steps;
  std::vector<double> la(n);
  std::vector<std::int8_t> sg(n);
  int resampled = 0;
  const double log_kappa = std::log(params.kappa);
  double prev_log = 0.0;
  for (int j = 0; j < n; ++j) {
    double z = rng.normal();
    while (z == 0.0) {  // measure-zero event; the density is undefined at 0
      z = rng.normal();
      ++resampled;
    }
    la[j] = (j == 0) ? std::log(std::fabs(z))
                     : log_kappa + prev_log + std::log(std::fabs(z));
    sg[j] = z > 0.0 ? 1 : -1;
    prev_log = la[j];
  }
  DeviationPath path(params, std::move(la), std::move(sg));
  path.resampled = resampled;
  return path;
}

double sample_x0(const Process1DParams& params, RngStream& rng) {
  return params.f0_location + params.f0_scale * rng.normal();
}

double log_conditional_density_1d(double y_next, double y_prev, double kappa) {
  if (y_prev == 0.0)
    throw std::domain_error("conditional_density_1d: y_prev must be nonzero");
  if (!(kappa > 0.0))
    throw std::invalid_argument("conditional_density_1d: kappa must be positive");
  const double r = y_next / y_prev;
  return -kHalfLog2Pi - std::log(kappa * std::fabs(y_prev)) -
         r * r / (2.0 * kappa * kappa);
}

double conditional_density_1d(double y_next, double y_prev, double kappa) {
  return std::exp(log_conditional_density_1d(y_next, y_prev, kappa));
}

Path1D build_path(double x0, DeviationPath dev) {
  if (!std::isfinite(x0)) throw std::invalid_argument("build_path: x0 must be finite");
  Path1D path;
  path.params = dev.params();
  path.x0 = x0;
  path.x.resize(static_cast<std::size_t>(dev.size()) + 1);
  path.x[0] = x0;
  for (int j = 0; j < dev.size(); ++j) {
    double next = path.x[j] + dev.value(j);
    if (next > kPositionSaturation) {
      next = kPositionSaturation;
      path.saturated = true;
    } else if (next < -kPositionSaturation) {
      next = -kPositionSaturation;
      path.saturated = true;
    }
    path.x[static_cast<std::size_t>(j) + 1] = next;
  }
  path.dev = std::move(dev);
  return path;
}

Path1D sample_path(const Process1DParams& params, RngStream& rng) {
  const double x0 = sample_x0(params, rng);
  return build_path(x0, sample_deviation_path(params, rng));
}

SequencePath to_sequence(const Path1D& path) {
  SequencePath seq;
  seq.dim = 1;
  seq.points.reserve(path.x.size());
  for (double v : path.x) seq.points.push_back(point1(v));
  std::ostringstream prov;
  prov << "process1d kappa=" << path.params.kappa << " n=" << path.params.n_steps
       << " seed=" << path.params.seed;
  seq.provenance = prov.str();
  seq.saturated = path.saturated;
  return seq;
}

}  // namespace selfsim

#include "selfsim/matrixprocess.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace selfsim {

namespace {
constexpr double kSingularRelTol = 1e-12;
constexpr double kPositionSaturation = 1e300;
constexpr std::int64_t kRejectionWindow = 10000;  // consecutive rejects before abort

Eigen::VectorXd singular_values_of(const Matrix& y) {
  Eigen::JacobiSVD<Matrix> svd(y);
  return svd.singularValues();
}

bool is_singular(const Eigen::VectorXd& tau) {
  const double mx = tau[0];
  const double mn = tau[tau.size() - 1];
  return !(mn > kSingularRelTol * mx) || !(mx > 0.0);
}

/// k^2 accumulated so that k^2 >= d^2 holds exactly in floating point:
/// sum_{ij} (tau_i/tau_j)^2 = d^2 + sum_{i<j} (tau_i/tau_j - tau_j/tau_i)^2.
double condition_number_sq(const Eigen::VectorXd& tau) {
  const int d = static_cast<int>(tau.size());
  double k2 = static_cast<double>(d) * static_cast<double>(d);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      const double r = tau[i] / tau[j];
      const double g = r - 1.0 / r;
      k2 += g * g;
    }
  return k2;
}

double pow_alpha(double base, double alpha) {
  return alpha == 1.0 ? base : std::pow(base, alpha);
}

}  // namespace

void MatrixProcessParams::validate() const {
  if (d < 2) throw std::invalid_argument("d must be at least 2");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be at least 1");
  if (n_steps < 1) throw std::invalid_argument("n_steps must be at least 1");
  if (n_steps > 1000000) throw std::invalid_argument("n_steps must be at most 1000000");
  if (!(x0_scale > 0.0)) throw std::invalid_argument("x0_scale must be positive");
}

double matrix_norm(const Matrix& y) { return y.norm(); }

double condition_number(const Matrix& y) {
  if (y.rows() != y.cols() || y.rows() < 1)
    throw std::invalid_argument("condition_number: square matrix required");
  const Eigen::VectorXd tau = singular_values_of(y);
  if (is_singular(tau))
    throw std::domain_error("condition number undefined for singular matrix");
  return std::sqrt(condition_number_sq(tau));
}

double condition_number_via_inverse(const Matrix& y) {
  if (y.rows() != y.cols() || y.rows() < 1)
    throw std::invalid_argument("condition_number_via_inverse: square matrix required");
  const Eigen::VectorXd tau = singular_values_of(y);
  if (is_singular(tau))
    throw std::domain_error("condition number undefined for singular matrix");
  return y.norm() * y.inverse().norm();
}

double log_density_f(const Matrix& y, double kappa, double alpha) {
  if (!(kappa > 0.0)) throw std::invalid_argument("density_f: kappa must be positive");
  if (!(alpha >= 1.0)) throw std::invalid_argument("density_f: alpha must be at least 1");
  const Eigen::VectorXd tau = singular_values_of(y);
  if (is_singular(tau)) return -std::numeric_limits<double>::infinity();
  const double k2 = condition_number_sq(tau);
  const double n2 = y.squaredNorm();
  return -n2 * pow_alpha(k2, alpha) / (2.0 * kappa * kappa);
}

double density_f(const Matrix& y, double kappa, double alpha) {
  return std::exp(log_density_f(y, kappa, alpha));
}

double log_acceptance_probability(const Matrix& y, const MatrixProcessParams& params) {
  const Eigen::VectorXd tau = singular_values_of(y);
  if (is_singular(tau)) return -std::numeric_limits<double>::infinity();
  const double k2 = condition_number_sq(tau);
  const double d2 = static_cast<double>(params.d) * static_cast<double>(params.d);
  // k^2 >= d^2 holds exactly; the clamp only guards pow rounding at equality.
  const double gap = std::max(0.0, pow_alpha(k2, params.alpha) - pow_alpha(d2, params.alpha));
  return -gap * y.squaredNorm() / (2.0 * params.kappa * params.kappa);
}

MatrixDeviation sample_W(const MatrixProcessParams& params, RngStream& rng,
                         RejectionStats* stats) {
  params.validate();
  const int d = params.d;
  const double sigma = params.kappa / pow_alpha(static_cast<double>(d), params.alpha);
  std::int64_t consecutive_rejects = 0;
  for (;;) {
    Matrix y(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) y(i, j) = sigma * rng.normal();
    if (stats) ++stats->proposals;

    const Eigen::VectorXd tau = singular_values_of(y);
    bool accepted = false;
    if (!is_singular(tau)) {
      const double k2 = condition_number_sq(tau);
      const double d2 = static_cast<double>(d) * static_cast<double>(d);
      const double gap =
          std::max(0.0, pow_alpha(k2, params.alpha) - pow_alpha(d2, params.alpha));
      const double log_acc = -gap * y.squaredNorm() / (2.0 * params.kappa * params.kappa);
      if (!(log_acc <= 0.0))
        throw std::logic_error("sample_W: acceptance probability exceeded 1");
      if (stats && log_acc > stats->max_log_acceptance)
        stats->max_log_acceptance = log_acc;
      accepted = rng.uniform() < std::exp(log_acc);
    }
    if (accepted) {
      if (stats) ++stats->accepts;
      return MatrixDeviation{std::move(y), tau};
    }
    if (++consecutive_rejects >= kRejectionWindow) {
      std::ostringstream msg;
      msg << "sample_W: " << kRejectionWindow
          << " consecutive rejections (acceptance below 1e-4); d = " << d
          << ", alpha = " << params.alpha << " is impractical at desk scale";
      throw std::runtime_error(msg.str());
    }
  }
}

MatrixChain sample_matrix_chain(const MatrixProcessParams& params, RngStream& rng) {
  params.validate();
  MatrixChain chain;
  chain.params = params;
  chain.w.reserve(params.n_steps);
  chain.y_hat.reserve(params.n_steps);
  chain.log_scale.reserve(params.n_steps);

  const MatrixDeviation first = sample_W(params, rng, &chain.stats);
  chain.w.push_back(first.y);
  const double n1 = matrix_norm(first.y);
  chain.y_hat.push_back(first.y / n1);
  chain.log_scale.push_back(std::log(n1));

  for (int j = 1; j < params.n_steps; ++j) {
    const MatrixDeviation w = sample_W(params, rng, &chain.stats);
    chain.w.push_back(w.y);
    Matrix m = chain.y_hat.back() * w.y;
    const double nm = matrix_norm(m);
    chain.y_hat.push_back(m / nm);
    chain.log_scale.push_back(chain.log_scale.back() + std::log(nm));
  }
  return chain;
}

double log_abs_det(const Matrix& m) {
  const double s = m.norm();
  if (!(s > 0.0)) return -std::numeric_limits<double>::infinity();
  const Matrix scaled = m / s;
  Eigen::PartialPivLU<Matrix> lu(scaled);
  double acc = static_cast<double>(m.rows()) * std::log(s);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double u = std::fabs(lu.matrixLU()(i, i));
    if (!(u > 0.0)) return -std::numeric_limits<double>::infinity();
    acc += std::log(u);
  }
  return acc;
}

double log_conditional_density_dd(const Matrix& y_j, const Matrix& y_prev,
                                  double kappa, double alpha, int d) {
  if (y_prev.rows() != d || y_prev.cols() != d || y_j.rows() != d || y_j.cols() != d)
    throw std::invalid_argument("conditional_density_dd: dimension mismatch");
  const Eigen::VectorXd tau = singular_values_of(y_prev);
  if (is_singular(tau))
    throw std::domain_error("conditional_density_dd: y_prev is singular");
  const Matrix w = y_prev.partialPivLu().solve(y_j);
  return log_density_f(w, kappa, alpha) - static_cast<double>(d) * log_abs_det(y_prev);
}

double conditional_density_dd(const Matrix& y_j, const Matrix& y_prev,
                              double kappa, double alpha, int d) {
  return std::exp(log_conditional_density_dd(y_j, y_prev, kappa, alpha, d));
}

MatrixPath build_matrix_path(const MatrixProcessParams& params, const Matrix& x0,
                             const std::vector<Matrix>& stage_matrices) {
  params.validate();
  const int d = params.d;
  if (x0.rows() != d || x0.cols() != d)
    throw std::invalid_argument("build_matrix_path: X0 must be d x d");
  MatrixPath path;
  path.params = params;
  path.stage_points.reserve(stage_matrices.size() + 1);
  path.y.reserve(stage_matrices.size() + 1);
  path.centroid.reserve(stage_matrices.size() + 1);

  path.stage_points.push_back(x0);
  path.y.emplace_back();  // stage 0 has no deviation matrix
  path.centroid.push_back(x0.rowwise().mean());

  for (const Matrix& yj : stage_matrices) {
    if (yj.rows() != d || yj.cols() != d)
      throw std::invalid_argument("build_matrix_path: stage matrix must be d x d");
    Matrix pts = yj;
    pts.colwise() += path.centroid.back();
    path.stage_points.push_back(pts);
    path.y.push_back(yj);
    path.centroid.push_back(pts.rowwise().mean());
  }
  return path;
}

MatrixPath sample_matrix_path(const MatrixProcessParams& params, RngStream& rng,
                              RejectionStats* stats) {
  params.validate();
  const int d = params.d;
  Matrix x0(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) x0(i, j) = params.x0_scale * rng.normal();

  RejectionStats local;
  RejectionStats* st = stats ? stats : &local;
  std::vector<Matrix> stage;
  stage.reserve(params.n_steps);
  Matrix y = sample_W(params, rng, st).y;
  stage.push_back(y);
  for (int j = 1; j < params.n_steps; ++j) {
    y = y * sample_W(params, rng, st).y;
    stage.push_back(y);
  }
  return build_matrix_path(params, x0, stage);
}

SequencePath build_positions_dd(const Matrix& x0,
                                const std::vector<Matrix>& stage_matrices) {
  MatrixProcessParams params;
  params.d = static_cast<int>(x0.rows());
  params.n_steps = std::max<int>(1, static_cast<int>(stage_matrices.size()));
  MatrixPath path = build_matrix_path(params, x0, stage_matrices);
  return to_sequence(path);
}

SequencePath to_sequence(const MatrixPath& path) {
  SequencePath seq;
  seq.dim = path.params.d;
  const int d = path.params.d;
  seq.points.reserve(path.stage_points.size() * static_cast<std::size_t>(d));
  for (const Matrix& pts : path.stage_points)
    for (int c = 0; c < d; ++c) {
      Point p = pts.col(c);
      for (int i = 0; i < d; ++i) {
        if (p[i] > kPositionSaturation) {
          p[i] = kPositionSaturation;
          seq.saturated = true;
        } else if (p[i] < -kPositionSaturation) {
          p[i] = -kPositionSaturation;
          seq.saturated = true;
        }
      }
      seq.points.push_back(std::move(p));
    }
  std::ostringstream prov;
  prov << "matrixprocess d=" << d << " kappa=" << path.params.kappa
       << " alpha=" << path.params.alpha << " seed=" << path.params.seed;
  seq.provenance = prov.str();
  return seq;
}

}  // namespace selfsim

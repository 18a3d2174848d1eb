#include "selfsim/rnd.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace selfsim {

namespace {
// Below this relative spacing the direct difference quotient of phi has
// lost half the mantissa to cancellation; the analytic derivative at the
// segment midpoint agrees with the exact quotient to O(dx^2) and is the
// more accurate evaluation.
constexpr double kRatioCutoff = 4e-6;
}  // namespace

// ---------------------------------------------------------------------------
// TestFunction
// ---------------------------------------------------------------------------

TestFunction::TestFunction(std::vector<BumpTerm> terms) : terms_(std::move(terms)) {
  for (const BumpTerm& t : terms_) {
    if (!(t.radius > 0.0))
      throw std::invalid_argument("TestFunction: radius must be positive");
    if (t.center.size() < 1)
      throw std::invalid_argument("TestFunction: empty center");
  }
}

double TestFunction::value(const Point& x) const {
  double v = 0.0;
  for (const BumpTerm& t : terms_) {
    const double r = (x - t.center).norm();
    if (r < t.radius) v += t.weight * bump_profile(r / t.radius);
  }
  return v;
}

double TestFunction::value1(double x) const {
  double v = 0.0;
  for (const BumpTerm& t : terms_) {
    const double r = std::fabs(x - t.center[0]);
    if (r < t.radius) v += t.weight * bump_profile(r / t.radius);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Reports and verdicts
// ---------------------------------------------------------------------------

const char* to_string(RnVerdict v) {
  switch (v) {
    case RnVerdict::Converged: return "converged";
    case RnVerdict::DivergedToZero: return "diverged-to-zero";
    case RnVerdict::DivergedToInfinity: return "diverged-to-infinity";
    case RnVerdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

double dyadic_cauchy_gap(const std::vector<double>& partial) {
  const int k = static_cast<int>(partial.size());
  if (k < 4) return 0.0;
  double gap = 0.0;
  for (int m = std::max(1, k / 4); 2 * m <= k; ++m)
    gap = std::max(gap, std::fabs(partial[2 * m - 1] - partial[m - 1]));
  return gap;
}

bool monotone_tail(const std::vector<double>& partial, int direction) {
  const int k = static_cast<int>(partial.size());
  const int from = std::max(1, (3 * k) / 4);
  for (int m = from; m < k; ++m) {
    const double step = (partial[m] - partial[m - 1]) * direction;
    if (step < -1e-9 * (1.0 + std::fabs(partial[m]))) return false;
  }
  return true;
}

}  // namespace

RnVerdict rn_convergence_diagnostic(const RnReport& report, double gap_tolerance,
                                    double log_overflow) {
  if (report.truncation < 16) return RnVerdict::Inconclusive;
  const double sk = report.log_product();
  if (std::isnan(sk)) return RnVerdict::Inconclusive;
  if (sk == std::numeric_limits<double>::infinity()) return RnVerdict::DivergedToInfinity;
  if (sk == -std::numeric_limits<double>::infinity()) return RnVerdict::DivergedToZero;
  if (report.cauchy_gap <= gap_tolerance && std::fabs(sk) <= log_overflow)
    return RnVerdict::Converged;
  if (sk > log_overflow && monotone_tail(report.log_partial, +1))
    return RnVerdict::DivergedToInfinity;
  if (sk < -log_overflow && monotone_tail(report.log_partial, -1))
    return RnVerdict::DivergedToZero;
  return RnVerdict::Inconclusive;
}

void finalize_report(RnReport& report, const RnOptions& options) {
  report.truncation = static_cast<int>(report.log_factors.size());
  report.log_partial.resize(report.log_factors.size());
  double s = 0.0;
  for (std::size_t i = 0; i < report.log_factors.size(); ++i) {
    s += report.log_factors[i];
    report.log_partial[i] = s;
  }
  report.cauchy_gap = dyadic_cauchy_gap(report.log_partial);
  report.verdict =
      rn_convergence_diagnostic(report, options.gap_tolerance, options.log_overflow);
}

// ---------------------------------------------------------------------------
// 1-D factors
// ---------------------------------------------------------------------------

double transported_ratio(const Diffeo& phi, double a, double b) {
  const double ua = phi.apply1(a);
  const double ub = phi.apply1(b);
  if (ua == a && ub == b) return 1.0;  // phi fixes both endpoints
  if (a == b) {
    // Coalesced at float resolution but moved by phi: the exact quotient is
    // phi'(xi) for xi within one ulp of a.
    return phi.jacobian1(a);
  }
  const double dx = b - a;
  const double du = ub - ua;
  const double scale = 1.0 + std::max(std::fabs(a), std::fabs(b));
  double rho;
  if (std::fabs(dx) > kRatioCutoff * scale)
    rho = du / dx;
  else
    rho = phi.jacobian1(a + 0.5 * dx);
  if (!(rho > 0.0))
    throw std::logic_error("transported_ratio: nonpositive ratio (orientation lost)");
  return rho;
}

double rn_log_factor(const Path1D& path, const Diffeo& phi, int j) {
  const int n_pts = path.n_points();
  if (j < 1 || j > n_pts) throw std::invalid_argument("rn_log_factor: index out of range");
  if (phi.dim() != 1) throw std::invalid_argument("rn_log_factor: 1-D path needs 1-D diffeo");
  const int m = j - 1;  // coordinate index
  const double xm = path.x[m];

  if (m == 0) {
    const double xm_t = phi.apply1(xm);
    const double dens = log_f0(path.params, xm_t) - log_f0(path.params, xm);
    return dens + std::log(phi.jacobian1(xm));
  }
  if (m == 1) {
    const double rho1 = transported_ratio(phi, path.x[0], path.x[1]);
    const double y1 = path.dev.value(0);
    return std::log(phi.jacobian1(xm)) - 0.5 * (y1 * y1) * (rho1 * rho1 - 1.0);
  }
  const double ra = transported_ratio(phi, path.x[m - 2], path.x[m - 1]);
  const double rb = transported_ratio(phi, path.x[m - 1], path.x[m]);
  // |y_m / y_{m-1}| is O(kappa |z|) regardless of how deep the condensed
  // tail is; only the stored logs enter.
  const double log_r = path.dev.log_abs(m - 1) - path.dev.log_abs(m - 2);
  const double r2 = std::exp(2.0 * log_r);
  const double t = rb / ra;
  const double kappa = path.params.kappa;
  return std::log(phi.jacobian1(xm)) - std::log(ra) -
         r2 * (t * t - 1.0) / (2.0 * kappa * kappa);
}

double rn_factor(const Path1D& path, const Diffeo& phi, int j) {
  return std::exp(rn_log_factor(path, phi, j));
}

RnReport truncated_rn_product(const Path1D& path, const Diffeo& phi, int k,
                              const RnOptions& options) {
  if (k < 1 || k > path.n_points())
    throw std::invalid_argument("truncated_rn_product: k out of range");
  RnReport report;
  report.log_factors.reserve(k);
  for (int j = 1; j <= k; ++j) report.log_factors.push_back(rn_log_factor(path, phi, j));
  finalize_report(report, options);
  return report;
}

Path1D pushforward(const Diffeo& phi, const Path1D& path) {
  if (phi.dim() != 1) throw std::invalid_argument("pushforward: 1-D path needs 1-D diffeo");
  Path1D out;
  out.params = path.params;
  out.saturated = path.saturated;
  out.x.resize(path.x.size());
  for (std::size_t i = 0; i < path.x.size(); ++i) out.x[i] = phi.apply1(path.x[i]);
  out.x0 = out.x[0];

  const int n = path.dev.size();
  std::vector<double> log_abs(n);
  std::vector<std::int8_t> sign(n);
  for (int j = 0; j < n; ++j) {
    const double rho = transported_ratio(phi, path.x[j], path.x[j + 1]);
    log_abs[j] = path.dev.log_abs(j) + std::log(rho);
    sign[j] = static_cast<std::int8_t>(path.dev.sign(j));
  }
  out.dev = DeviationPath(path.params, std::move(log_abs), std::move(sign));
  return out;
}

double chain_rule_check(const Diffeo& phi1, const Diffeo& phi2, const Path1D& path,
                        int k) {
  if (k < 1 || k > path.n_points())
    throw std::invalid_argument("chain_rule_check: k out of range");
  const Diffeo composite = compose(phi1, phi2);
  const Path1D pushed = pushforward(phi1, path);
  double max_err = 0.0;
  double sc = 0.0, s1 = 0.0, s2 = 0.0;
  for (int j = 1; j <= k; ++j) {
    sc += rn_log_factor(path, composite, j);
    s1 += rn_log_factor(path, phi1, j);
    s2 += rn_log_factor(pushed, phi2, j);
    max_err = std::max(max_err, std::fabs(std::expm1(sc - (s1 + s2))));
  }
  return max_err;
}

// ---------------------------------------------------------------------------
// d > 1 stage factors
// ---------------------------------------------------------------------------

namespace {

Matrix transform_columns(const Diffeo& phi, const Matrix& pts) {
  Matrix out(pts.rows(), pts.cols());
  for (Eigen::Index c = 0; c < pts.cols(); ++c) out.col(c) = phi.apply(pts.col(c));
  return out;
}

double sum_log_jacobian(const Diffeo& phi, const Matrix& pts) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < pts.cols(); ++c) s += std::log(phi.jacobian(pts.col(c)));
  return s;
}

/// log f(Y_prev^{-1} Y) - d log|det Y_prev| with singularity reported.
double log_chain_term(const Matrix& y, const Matrix& y_prev, double kappa,
                      double alpha, int d, const char* what) {
  const double ld = log_abs_det(y_prev);
  if (!std::isfinite(ld))
    throw std::domain_error(std::string("rn_log_factor_stage: singular ") + what);
  const Matrix w = y_prev.partialPivLu().solve(y);
  return log_density_f(w, kappa, alpha) - static_cast<double>(d) * ld;
}

}  // namespace

double rn_log_factor_stage(const MatrixPath& path, const Diffeo& phi, int t) {
  const int stages = static_cast<int>(path.stage_points.size());
  if (t < 0 || t >= stages)
    throw std::invalid_argument("rn_log_factor_stage: stage out of range");
  if (phi.dim() != path.params.d)
    throw std::invalid_argument("rn_log_factor_stage: dimension mismatch");
  const double kappa = path.params.kappa;
  const double alpha = path.params.alpha;
  const int d = path.params.d;

  const Matrix& pts = path.stage_points[t];
  const Matrix pts_t = transform_columns(phi, pts);
  const double jac = sum_log_jacobian(phi, pts);

  if (t == 0) {
    const double s2 = path.params.x0_scale * path.params.x0_scale;
    double dens = 0.0;
    for (int c = 0; c < d; ++c)
      dens += -0.5 * (pts_t.col(c).squaredNorm() - pts.col(c).squaredNorm()) / s2;
    return dens + jac;
  }

  const Matrix prev_t = transform_columns(phi, path.stage_points[t - 1]);
  const Point centroid_prev_t = prev_t.rowwise().mean();
  Matrix y_t = pts_t;
  y_t.colwise() -= centroid_prev_t;

  if (t == 1)
    return log_density_f(y_t, kappa, alpha) - log_density_f(path.y[1], kappa, alpha) + jac;

  // Transformed previous stage matrix: points of stage t-1 relative to the
  // transformed centroid of stage t-2.
  const Matrix before_t = transform_columns(phi, path.stage_points[t - 2]);
  const Point centroid_before_t = before_t.rowwise().mean();
  Matrix y_prev_t = prev_t;
  y_prev_t.colwise() -= centroid_before_t;

  const double lhs = log_chain_term(y_t, y_prev_t, kappa, alpha, d,
                                    "transformed previous stage matrix");
  const double rhs = log_chain_term(path.y[t], path.y[t - 1], kappa, alpha, d,
                                    "previous stage matrix");
  return lhs - rhs + jac;
}

RnReport truncated_rn_product(const MatrixPath& path, const Diffeo& phi, int stages,
                              const RnOptions& options) {
  if (stages < 1 || stages > static_cast<int>(path.stage_points.size()))
    throw std::invalid_argument("truncated_rn_product: stages out of range");
  RnReport report;
  report.log_factors.reserve(stages);
  for (int t = 0; t < stages; ++t)
    report.log_factors.push_back(rn_log_factor_stage(path, phi, t));
  finalize_report(report, options);
  return report;
}

MatrixPath pushforward(const Diffeo& phi, const MatrixPath& path) {
  if (phi.dim() != path.params.d)
    throw std::invalid_argument("pushforward: dimension mismatch");
  MatrixPath out;
  out.params = path.params;
  const int stages = static_cast<int>(path.stage_points.size());
  out.stage_points.reserve(stages);
  out.y.reserve(stages);
  out.centroid.reserve(stages);
  for (int t = 0; t < stages; ++t) {
    Matrix pts = transform_columns(phi, path.stage_points[t]);
    out.centroid.push_back(pts.rowwise().mean());
    if (t == 0) {
      out.y.emplace_back();
    } else {
      Matrix y = pts;
      y.colwise() -= out.centroid[t - 1];
      out.y.push_back(std::move(y));
    }
    out.stage_points.push_back(std::move(pts));
  }
  return out;
}

double chain_rule_check(const Diffeo& phi1, const Diffeo& phi2, const MatrixPath& path,
                        int stages) {
  if (stages < 1 || stages > static_cast<int>(path.stage_points.size()))
    throw std::invalid_argument("chain_rule_check: stages out of range");
  const Diffeo composite = compose(phi1, phi2);
  const MatrixPath pushed = pushforward(phi1, path);
  double max_err = 0.0;
  double sc = 0.0, s1 = 0.0, s2 = 0.0;
  for (int t = 0; t < stages; ++t) {
    sc += rn_log_factor_stage(path, composite, t);
    s1 += rn_log_factor_stage(path, phi1, t);
    s2 += rn_log_factor_stage(pushed, phi2, t);
    max_err = std::max(max_err, std::fabs(std::expm1(sc - (s1 + s2))));
  }
  return max_err;
}

// ---------------------------------------------------------------------------
// Monte Carlo unitarity
// ---------------------------------------------------------------------------

double PsiSpec::abs_squared(const std::vector<Point>& pts) const {
  if (!weight) return 1.0;
  double s = 0.0;
  for (const Point& p : pts) s += weight->value(p);
  return 1.0 / (1.0 + s * s);
}

namespace {

struct ReplicaOutcome {
  double lhs = 0.0, rhs = 0.0;
  bool ok = false;
};

}  // namespace

UnitarityReport unitarity_mc(const PsiSpec& psi, const Diffeo& phi,
                             const ProcessSpec& process, int replicas, int k,
                             std::uint64_t master_seed) {
  if (replicas < 1) throw std::invalid_argument("unitarity_mc: replicas must be positive");
  if (k < 2) throw std::invalid_argument("unitarity_mc: k must be at least 2");

  std::vector<ReplicaOutcome> out(replicas);

  if (std::holds_alternative<Process1DParams>(process)) {
    Process1DParams base = std::get<Process1DParams>(process);
    base.n_steps = k - 1;  // k coordinates => k factors
    base.validate();
    parallel_replicas(replicas, [&](int r) {
      RngStream rng = RngStream::replica(master_seed, static_cast<std::uint64_t>(r));
      Process1DParams params = base;
      params.seed = derive_stream_seed(master_seed, static_cast<std::uint64_t>(r));
      try {
        const Path1D path = sample_path(params, rng);
        const RnReport rep = truncated_rn_product(path, phi, k);
        const double product = rep.product();
        std::vector<Point> pts, pts_t;
        pts.reserve(path.x.size());
        pts_t.reserve(path.x.size());
        for (double v : path.x) {
          pts.push_back(point1(v));
          pts_t.push_back(point1(phi.apply1(v)));
        }
        const double lhs = psi.abs_squared(pts_t) * product;
        const double rhs = psi.abs_squared(pts);
        if (std::isfinite(lhs) && std::isfinite(rhs)) out[r] = {lhs, rhs, true};
      } catch (const std::domain_error&) {
        // flagged below
      }
    });
  } else {
    MatrixProcessParams base = std::get<MatrixProcessParams>(process);
    base.n_steps = k - 1;  // k stage factors including the X0 block
    base.validate();
    parallel_replicas(replicas, [&](int r) {
      RngStream rng = RngStream::replica(master_seed, static_cast<std::uint64_t>(r));
      MatrixProcessParams params = base;
      params.seed = derive_stream_seed(master_seed, static_cast<std::uint64_t>(r));
      try {
        const MatrixPath path = sample_matrix_path(params, rng);
        const RnReport rep = truncated_rn_product(path, phi, k);
        const double product = rep.product();
        std::vector<Point> pts, pts_t;
        for (const Matrix& stage : path.stage_points)
          for (int c = 0; c < params.d; ++c) {
            pts.push_back(stage.col(c));
            pts_t.push_back(phi.apply(stage.col(c)));
          }
        const double lhs = psi.abs_squared(pts_t) * product;
        const double rhs = psi.abs_squared(pts);
        if (std::isfinite(lhs) && std::isfinite(rhs)) out[r] = {lhs, rhs, true};
      } catch (const std::domain_error&) {
        // flagged below
      }
    });
  }

  UnitarityReport report;
  report.replicas = replicas;
  RunningStat lhs_stat, rhs_stat, diff_stat;
  for (const ReplicaOutcome& o : out) {
    if (!o.ok) {
      ++report.flagged;
      continue;
    }
    lhs_stat.add(o.lhs);
    rhs_stat.add(o.rhs);
    diff_stat.add(o.lhs - o.rhs);
  }
  report.lhs_mean = lhs_stat.mean;
  report.rhs_mean = rhs_stat.mean;
  report.diff_mean = diff_stat.mean;
  report.diff_stderr = diff_stat.stderror();
  report.sigma = report.diff_stderr > 0.0
                     ? std::fabs(report.diff_mean) / report.diff_stderr
                     : (report.diff_mean == 0.0 ? 0.0
                                                : std::numeric_limits<double>::infinity());
  return report;
}

// ---------------------------------------------------------------------------
// Pairing <gamma, f>
// ---------------------------------------------------------------------------

const char* to_string(PairingStatus s) {
  switch (s) {
    case PairingStatus::Converged: return "converged";
    case PairingStatus::Divergent: return "divergent";
    case PairingStatus::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

PairingResult pairing_from_terms(const std::vector<double>& terms) {
  PairingResult res;
  res.terms_used = static_cast<int>(terms.size());
  double sum = 0.0, half_sum = 0.0;
  const int half = (res.terms_used + 1) / 2;
  for (int i = 0; i < res.terms_used; ++i) {
    sum += terms[i];
    if (i < half) half_sum = sum;
    if (terms[i] != 0.0) ++res.nonzero_terms;
  }
  res.value = sum;

  double tail_max = 0.0;
  const int tail_from = (3 * res.terms_used) / 4;
  for (int i = tail_from; i < res.terms_used; ++i)
    tail_max = std::max(tail_max, std::fabs(terms[i]));
  const double cauchy = std::fabs(sum - half_sum);

  if (tail_max == 0.0)
    res.status = PairingStatus::Converged;  // exact: finitely many nonzero terms
  else if (tail_max > 1e-12 && cauchy > 1e-8 * (1.0 + std::fabs(sum)))
    res.status = PairingStatus::Divergent;
  else
    res.status = PairingStatus::Inconclusive;
  return res;
}

}  // namespace

PairingResult pairing(const std::vector<Point>& points, const TestFunction& f,
                      int max_terms) {
  const int T = std::min<int>(max_terms, static_cast<int>(points.size()));
  std::vector<double> terms(static_cast<std::size_t>(std::max(0, T)));
  for (int i = 0; i < T; ++i) terms[i] = f.value(points[i]);
  return pairing_from_terms(terms);
}

PairingResult pairing(const Path1D& path, const TestFunction& f, int max_terms) {
  const int T = std::min<int>(max_terms, path.n_points());
  std::vector<double> terms(static_cast<std::size_t>(std::max(0, T)));
  for (int i = 0; i < T; ++i) terms[i] = f.value1(path.x[i]);
  return pairing_from_terms(terms);
}

}  // namespace selfsim

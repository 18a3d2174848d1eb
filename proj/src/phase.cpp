#include "selfsim/phase.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace selfsim {

double drift_statistic(const DeviationPath& path) {
  const int n = path.size();
  if (n < 2) throw std::invalid_argument("drift_statistic: need at least two deviations");
  double s = 0.0;
  for (int j = 1; j < n; ++j) s += path.log_abs(j) - path.log_abs(j - 1);
  return s / static_cast<double>(n - 1);
}

double drift_statistic(const MatrixChain& chain) {
  const int n = chain.size();
  if (n < 2) throw std::invalid_argument("drift_statistic: need at least two stages");
  return (chain.log_scale[n - 1] - chain.log_scale[0]) / static_cast<double>(n - 1);
}

const char* to_string(PhaseLabel label) {
  switch (label) {
    case PhaseLabel::Condensed: return "condensed";
    case PhaseLabel::Rarefied: return "rarefied";
    case PhaseLabel::Undecided: return "undecided";
  }
  return "undecided";
}

namespace {

PhaseLabel classify_from_logs(double log_first, double log_last, double drift,
                              const PhaseThresholds& thr) {
  if (log_last - log_first < std::log(thr.lower_ratio) && drift < 0.0)
    return PhaseLabel::Condensed;
  if (log_last > std::log(thr.upper_abs) && drift > 0.0) return PhaseLabel::Rarefied;
  return PhaseLabel::Undecided;
}

}  // namespace

PhaseLabel classify_phase(const DeviationPath& path, const PhaseThresholds& thr) {
  return classify_from_logs(path.log_abs(0), path.log_abs(path.size() - 1),
                            drift_statistic(path), thr);
}

PhaseLabel classify_phase(const MatrixChain& chain, const PhaseThresholds& thr) {
  return classify_from_logs(chain.log_scale.front(), chain.log_scale.back(),
                            drift_statistic(chain), thr);
}

// ---------------------------------------------------------------------------
// kappa_0 bisection
// ---------------------------------------------------------------------------

namespace {

// Replicated drift probe; the sampler callback hides 1-D vs matrix.
using DriftSampler = std::function<double(double kappa, std::uint64_t seed)>;

ProbeStat run_probe(double kappa, int replicas, std::uint64_t probe_seed,
                    const DriftSampler& sampler) {
  std::vector<double> drifts(replicas);
  parallel_replicas(replicas, [&](int r) {
    drifts[r] = sampler(kappa, derive_stream_seed(probe_seed, static_cast<std::uint64_t>(r)));
  });
  RunningStat stat;
  for (double d : drifts) stat.add(d);
  return ProbeStat{kappa, stat.mean, stat.stderror(), replicas};
}

ProbeStat probe_with_refinement(double kappa, const Kappa0Options& opt,
                                std::uint64_t probe_seed, const DriftSampler& sampler,
                                std::vector<ProbeStat>& history) {
  int replicas = opt.replicas;
  ProbeStat probe = run_probe(kappa, replicas, probe_seed, sampler);
  history.push_back(probe);
  for (int refine = 0; refine < opt.max_refinements; ++refine) {
    if (std::fabs(probe.drift_mean) > 3.0 * probe.drift_stderr) break;
    replicas *= 2;  // CI straddles zero: sharpen before deciding the sign
    probe = run_probe(kappa, replicas, splitmix64(probe_seed + refine + 1), sampler);
    history.push_back(probe);
  }
  return probe;
}

Kappa0Report estimate_kappa0_impl(const Kappa0Options& opt, std::uint64_t master_seed,
                                  const DriftSampler& sampler) {
  if (!(opt.bracket_lo > 0.0 && opt.bracket_hi > opt.bracket_lo))
    throw std::invalid_argument("estimate_kappa0: invalid bracket");
  if (!(opt.tolerance > 0.0))
    throw std::invalid_argument("estimate_kappa0: tolerance must be positive");

  Kappa0Report report;
  std::uint64_t probe_index = 0;
  auto next_seed = [&] { return derive_stream_seed(master_seed, probe_index++); };

  ProbeStat lo = probe_with_refinement(opt.bracket_lo, opt, next_seed(), sampler,
                                       report.history);
  ProbeStat hi = probe_with_refinement(opt.bracket_hi, opt, next_seed(), sampler,
                                       report.history);
  if (!(lo.drift_mean < 0.0 && hi.drift_mean > 0.0))
    throw std::invalid_argument(
        "estimate_kappa0: bracket does not straddle kappa0 (drift signs equal)");

  double a = opt.bracket_lo, b = opt.bracket_hi;
  while (b - a > opt.tolerance * 0.5 * (a + b)) {
    const double mid = 0.5 * (a + b);
    const ProbeStat probe =
        probe_with_refinement(mid, opt, next_seed(), sampler, report.history);
    if (probe.drift_mean < 0.0)
      a = mid;
    else
      b = mid;
  }

  report.bracket_lo = a;
  report.bracket_hi = b;
  report.estimate = 0.5 * (a + b);

  // Statistical widening from a confirmation probe at the midpoint: the
  // drift is log(kappa/kappa0) in expectation, so the probe implies
  // kappa0 = mid * exp(-drift) with a delta-method interval.
  const ProbeStat confirm =
      probe_with_refinement(report.estimate, opt, next_seed(), sampler, report.history);
  const double implied_lo =
      report.estimate * std::exp(-(confirm.drift_mean + 1.96 * confirm.drift_stderr));
  const double implied_hi =
      report.estimate * std::exp(-(confirm.drift_mean - 1.96 * confirm.drift_stderr));
  report.ci_lo = std::min(a, implied_lo);
  report.ci_hi = std::max(b, implied_hi);
  return report;
}

}  // namespace

Kappa0Report estimate_kappa0(const Process1DParams& base, const Kappa0Options& options,
                             std::uint64_t master_seed) {
  Process1DParams params = base;
  params.n_steps = options.n_steps;
  params.validate();
  DriftSampler sampler = [params](double kappa, std::uint64_t seed) {
    Process1DParams p = params;
    p.kappa = kappa;
    p.seed = seed;
    RngStream rng(seed);
    return drift_statistic(sample_deviation_path(p, rng));
  };
  return estimate_kappa0_impl(options, master_seed, sampler);
}

Kappa0Report estimate_kappa0(const MatrixProcessParams& base, const Kappa0Options& options,
                             std::uint64_t master_seed) {
  MatrixProcessParams params = base;
  params.n_steps = options.n_steps;
  params.validate();
  DriftSampler sampler = [params](double kappa, std::uint64_t seed) {
    MatrixProcessParams p = params;
    p.kappa = kappa;
    p.seed = seed;
    RngStream rng(seed);
    return drift_statistic(sample_matrix_chain(p, rng));
  };
  return estimate_kappa0_impl(options, master_seed, sampler);
}

// ---------------------------------------------------------------------------
// kappa sweeps
// ---------------------------------------------------------------------------

namespace {

template <typename SampleFn>
PhaseDiagram sweep_impl(std::vector<double> grid, int replicas, int n_steps,
                        std::uint64_t master_seed, const std::string& process,
                        const SampleFn& classify_and_drift) {
  if (grid.empty()) throw std::invalid_argument("sweep: kappa grid must be nonempty");
  for (double k : grid)
    if (!(k > 0.0)) throw std::invalid_argument("sweep: kappa must be positive");
  std::sort(grid.begin(), grid.end());

  PhaseDiagram diagram;
  diagram.process = process;
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double kappa = grid[gi];
    std::vector<PhaseLabel> labels(replicas);
    std::vector<double> drifts(replicas);
    parallel_replicas(replicas, [&](int r) {
      const std::uint64_t seed = derive_stream_seed(
          master_seed, gi * 1000003ull + static_cast<std::uint64_t>(r));
      auto [label, drift] = classify_and_drift(kappa, n_steps, seed);
      labels[r] = label;
      drifts[r] = drift;
    });
    PhaseRow row;
    row.kappa = kappa;
    row.replicas = replicas;
    row.n_steps = n_steps;
    RunningStat stat;
    int condensed = 0, undecided = 0;
    for (int r = 0; r < replicas; ++r) {
      stat.add(drifts[r]);
      if (labels[r] == PhaseLabel::Condensed) ++condensed;
      if (labels[r] == PhaseLabel::Undecided) ++undecided;
    }
    row.condensed_fraction = static_cast<double>(condensed) / replicas;
    row.undecided_fraction = static_cast<double>(undecided) / replicas;
    row.drift_mean = stat.mean;
    row.drift_stderr = stat.stderror();
    diagram.grid.push_back(row);
  }
  return diagram;
}

}  // namespace

PhaseDiagram sweep(std::vector<double> kappa_grid, const Process1DParams& base,
                   int replicas, int n_steps, std::uint64_t master_seed) {
  if (replicas < 1) throw std::invalid_argument("sweep: replicas must be positive");
  std::ostringstream desc;
  desc << "process1d";
  return sweep_impl(std::move(kappa_grid), replicas, n_steps, master_seed, desc.str(),
                    [&base](double kappa, int n, std::uint64_t seed) {
                      Process1DParams p = base;
                      p.kappa = kappa;
                      p.n_steps = n;
                      p.seed = seed;
                      RngStream rng(seed);
                      const DeviationPath path = sample_deviation_path(p, rng);
                      return std::pair(classify_phase(path), drift_statistic(path));
                    });
}

PhaseDiagram sweep(std::vector<double> kappa_grid, const MatrixProcessParams& base,
                   int replicas, int n_steps, std::uint64_t master_seed) {
  if (replicas < 1) throw std::invalid_argument("sweep: replicas must be positive");
  std::ostringstream desc;
  desc << "matrixprocess d=" << base.d << " alpha=" << base.alpha;
  return sweep_impl(std::move(kappa_grid), replicas, n_steps, master_seed, desc.str(),
                    [&base](double kappa, int n, std::uint64_t seed) {
                      MatrixProcessParams p = base;
                      p.kappa = kappa;
                      p.n_steps = n;
                      p.seed = seed;
                      RngStream rng(seed);
                      const MatrixChain chain = sample_matrix_chain(p, rng);
                      return std::pair(classify_phase(chain), drift_statistic(chain));
                    });
}

}  // namespace selfsim

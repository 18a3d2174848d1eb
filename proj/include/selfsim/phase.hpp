#pragma once

// Phase structure of the self-similar processes.  The per-step drift
//
//     1-D:    (1/(n-1)) sum_j log|y_{j+1}/y_j|  =  (log|y_n| - log|y_1|)/(n-1)
//     d > 1:  (log||Y_n|| - log||Y_1||)/(n-1)
//
// has expectation log(kappa) - log(kappa_0); its sign separates the
// condensed phase (deviations shrink to an accumulation point) from the
// rarefied phase (geometric divergence).  kappa_0 is located by bisection
// on the sign of the replicated drift mean, with replica counts refined
// whenever the confidence interval straddles zero.  For the 1-D Gaussian
// process kappa_0 = exp((gamma_Euler + ln 2)/2); no closed form is known
// for the matrix chain and only Monte Carlo estimates are reported.

#include "selfsim/common.hpp"
#include "selfsim/matrixprocess.hpp"
#include "selfsim/process1d.hpp"
#include "selfsim/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace selfsim {

double drift_statistic(const DeviationPath& path);
double drift_statistic(const MatrixChain& chain);

enum class PhaseLabel { Condensed, Rarefied, Undecided };

const char* to_string(PhaseLabel label);

struct PhaseThresholds {
  double lower_ratio = 1e-8;  // condensed: terminal magnitude < lower_ratio * initial
  double upper_abs = 1e6;     // rarefied: terminal magnitude > upper_abs
};

PhaseLabel classify_phase(const DeviationPath& path, const PhaseThresholds& thr = {});
PhaseLabel classify_phase(const MatrixChain& chain, const PhaseThresholds& thr = {});

struct ProbeStat {
  double kappa = 0.0;
  double drift_mean = 0.0;
  double drift_stderr = 0.0;
  int replicas = 0;
};

struct Kappa0Options {
  double bracket_lo = 0.5;
  double bracket_hi = 8.0;
  double tolerance = 0.02;  // relative final bracket width
  int replicas = 200;
  int n_steps = 10000;
  int max_refinements = 3;  // replica doublings when the CI straddles zero
};

struct Kappa0Report {
  double estimate = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // final bracket widened by probe uncertainty
  double bracket_lo = 0.0, bracket_hi = 0.0;
  std::vector<ProbeStat> history;
};

/// Bisection on the drift sign.  Throws std::invalid_argument when the
/// initial bracket endpoints have the same drift sign.
Kappa0Report estimate_kappa0(const Process1DParams& base, const Kappa0Options& options,
                             std::uint64_t master_seed);
Kappa0Report estimate_kappa0(const MatrixProcessParams& base, const Kappa0Options& options,
                             std::uint64_t master_seed);

struct PhaseRow {
  double kappa = 0.0;
  int replicas = 0;
  int n_steps = 0;
  double condensed_fraction = 0.0;
  double drift_mean = 0.0;
  double drift_stderr = 0.0;
  double undecided_fraction = 0.0;
};

struct PhaseDiagram {
  std::vector<PhaseRow> grid;  // sorted by kappa
  std::optional<Kappa0Report> kappa0;
  std::string process;  // brief process descriptor
};

PhaseDiagram sweep(std::vector<double> kappa_grid, const Process1DParams& base,
                   int replicas, int n_steps, std::uint64_t master_seed);
PhaseDiagram sweep(std::vector<double> kappa_grid, const MatrixProcessParams& base,
                   int replicas, int n_steps, std::uint64_t master_seed);

}  // namespace selfsim

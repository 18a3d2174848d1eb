#pragma once

// Radon-Nikodym machinery for the self-similar processes.  Under a
// compactly supported diffeomorphism phi the density of the transformed
// measure is an infinite product of per-coordinate factors
//
//     u_j = [ f(phi(x_j) | phi(x_1), ...) / f(x_j | x_1, ...) ] * J_phi(x_j),
//
// computed here at finite truncation, entirely in log space.  Factor
// indexing for the 1-D process: u_1 uses the initial density f0 at x_0,
// u_2 uses the unit normal g1 for the first deviation, and u_{j+1} for
// j >= 2 uses the scaling density g^kappa in deviation coordinates.
//
// Transformed deviations are expressed through the difference quotient
//     rho = [phi(x_b) - phi(x_a)] / (x_b - x_a),
// which for coalescing points is evaluated as the analytic derivative at
// the midpoint (the direct quotient loses all precision there, while the
// midpoint derivative agrees with the true quotient to O(dx^2)).  Points
// the diffeomorphism leaves fixed bitwise yield rho = 1 and factors that
// are exactly 1, so locality of the product is exact, not approximate.

#include "selfsim/common.hpp"
#include "selfsim/diffeo.hpp"
#include "selfsim/matrixprocess.hpp"
#include "selfsim/process1d.hpp"
#include "selfsim/rng.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace selfsim {

// ---------------------------------------------------------------------------
// Compactly supported smooth test functions (bump combinations)
// ---------------------------------------------------------------------------

struct BumpTerm {
  Point center;
  double radius = 1.0;
  double weight = 1.0;
};

class TestFunction {
 public:
  TestFunction() = default;
  explicit TestFunction(std::vector<BumpTerm> terms);

  double value(const Point& x) const;
  double value1(double x) const;  // dim 1 fast path

  const std::vector<BumpTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

 private:
  std::vector<BumpTerm> terms_;
};

// ---------------------------------------------------------------------------
// Truncated products and convergence reports
// ---------------------------------------------------------------------------

enum class RnVerdict { Converged, DivergedToZero, DivergedToInfinity, Inconclusive };

const char* to_string(RnVerdict v);

struct RnReport {
  std::vector<double> log_factors;  // log u_1 .. log u_k
  std::vector<double> log_partial;  // S_m = sum_{j<=m} log u_j
  double cauchy_gap = 0.0;          // max over m in [k/4, k/2] of |S_2m - S_m|
  RnVerdict verdict = RnVerdict::Inconclusive;
  int truncation = 0;

  double factor(int j) const { return std::exp(log_factors[j]); }  // j in [0, k)
  double log_product() const { return log_partial.empty() ? 0.0 : log_partial.back(); }
  double product() const { return std::exp(log_product()); }
};

struct RnOptions {
  double gap_tolerance = 1e-2;
  double log_overflow = std::log(1e8);  // |S| beyond this counts as blown up
};

/// Verdict rule: converged when the dyadic Cauchy gap is within tolerance
/// and S_k is bounded; diverged when S_k is beyond +/- log_overflow with a
/// monotone tail; inconclusive otherwise (and for k < 16).
RnVerdict rn_convergence_diagnostic(const RnReport& report,
                                    double gap_tolerance = 1e-2,
                                    double log_overflow = std::log(1e8));

/// Fills cauchy_gap/verdict on a report whose partial sums are populated.
void finalize_report(RnReport& report, const RnOptions& options);

// ---------------------------------------------------------------------------
// 1-D process
// ---------------------------------------------------------------------------

/// Stable difference quotient of phi over [a, b] (positive for any
/// orientation-preserving phi).
double transported_ratio(const Diffeo& phi, double a, double b);

/// log u_j for j in [1, n_points]; factor j covers coordinate x_{j-1}.
double rn_log_factor(const Path1D& path, const Diffeo& phi, int j);

double rn_factor(const Path1D& path, const Diffeo& phi, int j);

RnReport truncated_rn_product(const Path1D& path, const Diffeo& phi, int k,
                              const RnOptions& options = {});

/// The image path phi(omega): transformed positions and transformed
/// deviations (in log space).
Path1D pushforward(const Diffeo& phi, const Path1D& path);

/// Max over truncations m <= k of the relative error in
///   Pi^m(phi1 phi2; omega) = Pi^m(phi1; omega) * Pi^m(phi2; phi1 omega).
double chain_rule_check(const Diffeo& phi1, const Diffeo& phi2,
                        const Path1D& path, int k);

// ---------------------------------------------------------------------------
// d > 1 matrix process (one factor per stage of d points)
// ---------------------------------------------------------------------------

/// log u for stage t in [0, n_stages): t = 0 is the X0 block, t = 1 the
/// first stage matrix, t >= 2 the chain conditionals.  The Jacobian part of
/// each factor is the product over the stage's d points.
double rn_log_factor_stage(const MatrixPath& path, const Diffeo& phi, int t);

RnReport truncated_rn_product(const MatrixPath& path, const Diffeo& phi,
                              int stages, const RnOptions& options = {});

MatrixPath pushforward(const Diffeo& phi, const MatrixPath& path);

double chain_rule_check(const Diffeo& phi1, const Diffeo& phi2,
                        const MatrixPath& path, int stages);

// ---------------------------------------------------------------------------
// Monte Carlo unitarity and the <gamma, f> pairing
// ---------------------------------------------------------------------------

using ProcessSpec = std::variant<Process1DParams, MatrixProcessParams>;

/// Psi(gamma) = exp(i <gamma_k, phase>) * w(gamma_k) with w == 1 when no
/// weight function is given, else w = (1 + <gamma_k, weight>^2)^(-1/2).
struct PsiSpec {
  TestFunction phase;
  std::optional<TestFunction> weight;

  double abs_squared(const std::vector<Point>& pts) const;
};

struct UnitarityReport {
  double lhs_mean = 0.0;   // E[ |Psi(phi gamma)|^2 * Pi^k(phi) ]
  double rhs_mean = 0.0;   // E[ |Psi(gamma)|^2 ]
  double diff_mean = 0.0;  // paired difference
  double diff_stderr = 0.0;
  double sigma = 0.0;      // |diff_mean| / diff_stderr
  int replicas = 0;
  int flagged = 0;  // replicas with a non-finite product (counted, not dropped)
};

UnitarityReport unitarity_mc(const PsiSpec& psi, const Diffeo& phi,
                             const ProcessSpec& process, int replicas, int k,
                             std::uint64_t master_seed);

enum class PairingStatus { Converged, Divergent, Inconclusive };

const char* to_string(PairingStatus s);

struct PairingResult {
  double value = 0.0;  // partial sum over available terms
  PairingStatus status = PairingStatus::Inconclusive;
  int terms_used = 0;
  int nonzero_terms = 0;
};

/// Sum of f over sequence entries (or configuration points), with a
/// convergence flag: exact when the tail terms are identically zero
/// (compact support), divergent when tail terms stay bounded away from 0.
PairingResult pairing(const std::vector<Point>& points, const TestFunction& f,
                      int max_terms);
PairingResult pairing(const Path1D& path, const TestFunction& f, int max_terms);

}  // namespace selfsim

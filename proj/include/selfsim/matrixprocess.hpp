#pragma once

// The d > 1 construction: each stage selects a d x d random matrix of
// deviations.  With the entrywise norm ||Y|| = (sum_ij y_ij^2)^(1/2) and the
// condition number k(Y) = ||Y|| * ||Y^-1|| = [sum_ij (tau_i/tau_j)^2]^(1/2)
// (tau = singular values), stage matrices are drawn from the unnormalized
// density
//
//     f(Y) = exp{ -(1/2 kappa^2) [ ||Y|| k(Y)^alpha ]^2 },   alpha >= 1,
//
// by exact rejection sampling: entries are proposed i.i.d. Normal(0,
// (kappa/d^alpha)^2) and accepted with probability
//     exp{ -(k(Y)^{2 alpha} - d^{2 alpha}) ||Y||^2 / (2 kappa^2) } <= 1,
// valid because k(Y) >= d for every invertible Y.  The chain multiplies
// i.i.d. stage draws, Y_j = Y_{j-1} W_j, which realizes the conditional
// density f(Y_{j-1}^{-1} Y_j) / |det Y_{j-1}|^d.  Chains are stored with
// unit-norm matrices plus a log scale so condensed/rarefied runs never
// leave the range of double.

#include "selfsim/common.hpp"
#include "selfsim/process1d.hpp"  // SequencePath
#include "selfsim/rng.hpp"

#include <cstdint>
#include <vector>

namespace selfsim {

struct MatrixProcessParams {
  int d = 2;
  double kappa = 1.0;
  double alpha = 1.0;       // condition-number exponent
  int n_steps = 2;          // number of stage matrices per chain
  double x0_scale = 1.0;    // X0 columns i.i.d. Normal(0, x0_scale^2 I)
  std::uint64_t seed = 0;

  void validate() const;
};

/// Entrywise (Frobenius-type) norm.
double matrix_norm(const Matrix& y);

/// Condition number via singular values, accumulated as
///   k^2 = d^2 + sum_{i<j} (tau_i/tau_j - tau_j/tau_i)^2,
/// which keeps k >= d exact in floating point.  Throws std::domain_error
/// for singular input (min tau < 1e-12 * max tau).
double condition_number(const Matrix& y);

/// Cross-check route ||Y|| * ||Y^-1|| through an explicit inverse.
double condition_number_via_inverse(const Matrix& y);

/// Unnormalized density f (the constant C cancels from every ratio).
/// Singular matrices get the limit value 0.
double density_f(const Matrix& y, double kappa, double alpha);
/// log f; -inf for singular input.
double log_density_f(const Matrix& y, double kappa, double alpha);

/// log of the rejection acceptance probability for proposal y; always <= 0.
double log_acceptance_probability(const Matrix& y, const MatrixProcessParams& params);

struct MatrixDeviation {
  Matrix y;
  Eigen::VectorXd singular_values;  // descending
};

struct RejectionStats {
  std::int64_t proposals = 0;
  std::int64_t accepts = 0;
  double max_log_acceptance = -std::numeric_limits<double>::infinity();

  double acceptance_rate() const {
    return proposals > 0 ? static_cast<double>(accepts) / static_cast<double>(proposals)
                         : 0.0;
  }
};

/// Exact draw from f.  Aborts with std::runtime_error when 10^4 consecutive
/// proposals are rejected (acceptance rate below 1e-4: the parameter regime
/// is impractical at desk scale).
MatrixDeviation sample_W(const MatrixProcessParams& params, RngStream& rng,
                         RejectionStats* stats = nullptr);

/// Multiplicative chain in normalized form: Y_j = exp(log_scale[j]) * y_hat[j]
/// with ||y_hat[j]|| = 1.
struct MatrixChain {
  MatrixProcessParams params;
  std::vector<Matrix> w;         // i.i.d. stage draws, w[0] unused alias of y1
  std::vector<Matrix> y_hat;     // unit-norm chain matrices
  std::vector<double> log_scale; // log ||Y_j||
  RejectionStats stats;

  int size() const { return static_cast<int>(y_hat.size()); }
  Matrix y(int j) const { return std::exp(log_scale[j]) * y_hat[j]; }
};

/// Y_1 ~ f, then Y_j = Y_{j-1} W_j with W_j i.i.d. ~ f.
MatrixChain sample_matrix_chain(const MatrixProcessParams& params, RngStream& rng);

/// Conditional density f(Y_prev^{-1} Y_j) / |det Y_prev|^d (unnormalized).
/// Throws std::domain_error for singular Y_prev.
double conditional_density_dd(const Matrix& y_j, const Matrix& y_prev,
                              double kappa, double alpha, int d);
double log_conditional_density_dd(const Matrix& y_j, const Matrix& y_prev,
                                  double kappa, double alpha, int d);

/// Stage positions: columns of X_j = centroid(X_{j-1}) + Y_j.  Stage 0 is X0
/// itself.  Used by the Radon-Nikodym machinery, which needs points,
/// matrices and centroids together.
struct MatrixPath {
  MatrixProcessParams params;
  std::vector<Matrix> stage_points;  // [0..n], columns are the d stage points
  std::vector<Matrix> y;             // [1..n] stage deviation matrices (y[0] empty)
  std::vector<Point> centroid;       // centroid of each stage's points
};

MatrixPath build_matrix_path(const MatrixProcessParams& params, const Matrix& x0,
                             const std::vector<Matrix>& stage_matrices);

/// Sample X0 (columns i.i.d. normal) and n_steps stage matrices, then build
/// the positions.  Stage matrices are materialized; intended for moderate
/// truncations (the phase module works on MatrixChain instead).
MatrixPath sample_matrix_path(const MatrixProcessParams& params, RngStream& rng,
                              RejectionStats* stats = nullptr);

/// Flat point sequence of length d*(n+1): stage 0 points, stage 1 points, ...
SequencePath build_positions_dd(const Matrix& x0, const std::vector<Matrix>& stage_matrices);

SequencePath to_sequence(const MatrixPath& path);

/// log |det| via LU with the scale factored out (stable for tiny/huge scales).
double log_abs_det(const Matrix& m);

}  // namespace selfsim

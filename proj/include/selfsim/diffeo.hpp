#pragma once

// Compactly supported diffeomorphisms of R^d built from radial bump
// displacements,
//
//     phi(x) = x + a * beta(|x - c| / R) * u,        |u| = 1,
//     beta(s) = exp(-1 / (1 - s^2))  for s < 1,  0 otherwise,
//
// together with structural composition and inversion.  phi is the identity
// (bitwise: the input vector is returned unchanged) outside the closed ball
// B(c, R), and it is an orientation-preserving diffeomorphism exactly when
// |a| < R / sup|beta'|: the displacement is then a contraction, so phi is
// injective and det Dphi = 1 + (a/R) beta'(s) <u, (x-c)/r>  stays positive.
//
// Composition follows the right-action convention
//     (phi1 phi2)(x) = phi2(phi1(x)),
// and is kept as a deferred pair so the group law holds exactly.  Inverses
// are evaluated numerically per point: guarded Newton with a bracketing
// fallback in 1-D, damped fixed-point iteration in d > 1.

#include "selfsim/common.hpp"

#include <memory>
#include <nlohmann/json_fwd.hpp>

namespace selfsim {

/// beta(s) = exp(-1/(1-s^2)) for |s| < 1, else 0.
double bump_profile(double s);
/// beta'(s) (zero at s = 0 and for |s| >= 1).
double bump_profile_deriv(double s);
/// sup over s of |beta'(s)|, computed once by golden-section search.
double bump_slope_max();
/// Largest open bound on |amplitude| that keeps a bump of this radius a
/// diffeomorphism: radius / sup|beta'|.
double max_bump_amplitude(double radius);

class Diffeo {
 public:
  Diffeo() = default;  // identity in dimension 1

  static Diffeo identity(int dim);

  int dim() const;

  /// Center/radius of a closed ball outside of which the map is the
  /// identity (for composites: the smallest ball enclosing both supports).
  const Point& support_center() const;
  double support_radius() const;

  /// True when apply(0) = 0 is guaranteed exactly.
  bool fixes_origin() const;

  Point apply(const Point& x) const;
  double jacobian(const Point& x) const;
  double log_jacobian(const Point& x) const { return std::log(jacobian(x)); }

  // Scalar fast paths, valid only when dim() == 1.
  double apply1(double x) const;
  double jacobian1(double x) const;

  nlohmann::json to_json() const;
  static Diffeo from_json(const nlohmann::json& j);

  struct Node;  // internal representation

 private:
  explicit Diffeo(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;

  friend Diffeo bump_flow(int dim, const Point& center, double radius,
                          double amplitude, const Point& direction,
                          bool require_fixed_origin);
  friend Diffeo compose(const Diffeo& first, const Diffeo& second);
  friend Diffeo inverse(const Diffeo& phi);
};

/// Bump displacement along `direction` (unit norm required).  Throws
/// std::invalid_argument when the amplitude reaches the injectivity bound,
/// with the maximal admissible amplitude in the message.  With
/// `require_fixed_origin` the construction is rejected unless apply(0) = 0
/// is exact (origin outside the open support ball, or zero amplitude).
Diffeo bump_flow(int dim, const Point& center, double radius, double amplitude,
                 const Point& direction, bool require_fixed_origin = false);

/// 1-D convenience overload; direction is +1 or -1.
Diffeo bump_flow1(double center, double radius, double amplitude,
                  double direction = +1.0, bool require_fixed_origin = false);

/// Right action: apply(compose(a, b), x) == apply(b, apply(a, x)) exactly.
Diffeo compose(const Diffeo& first, const Diffeo& second);

Diffeo inverse(const Diffeo& phi);

/// Central finite-difference Jacobian determinant; cross-check mode for the
/// analytic `jacobian`.
double jacobian_fd(const Diffeo& phi, const Point& x, double h = 1e-6);

}  // namespace selfsim

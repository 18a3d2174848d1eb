#include "selfsim/diffeo.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

namespace selfsim {

double bump_profile(double s) {
  const double s2 = s * s;
  if (!(s2 < 1.0)) return 0.0;
  return std::exp(-1.0 / (1.0 - s2));
}

double bump_profile_deriv(double s) {
  const double s2 = s * s;
  if (!(s2 < 1.0)) return 0.0;
  const double om = 1.0 - s2;
  return -2.0 * s / (om * om) * std::exp(-1.0 / om);
}

double bump_slope_max() {
  // |beta'| is unimodal on (0, 1); locate its maximum once.
  static const double cached = [] {
    const double inv_golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 1.0;
    double x1 = hi - inv_golden * (hi - lo);
    double x2 = lo + inv_golden * (hi - lo);
    double f1 = std::fabs(bump_profile_deriv(x1));
    double f2 = std::fabs(bump_profile_deriv(x2));
    for (int it = 0; it < 200; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_golden * (hi - lo);
        f2 = std::fabs(bump_profile_deriv(x2));
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_golden * (hi - lo);
        f1 = std::fabs(bump_profile_deriv(x1));
      }
    }
    return std::fabs(bump_profile_deriv(0.5 * (lo + hi)));
  }();
  return cached;
}

double max_bump_amplitude(double radius) { return radius / bump_slope_max(); }

// ---------------------------------------------------------------------------
// Internal node tree
// ---------------------------------------------------------------------------

struct Diffeo::Node {
  enum class Kind { Bump, Compose, Inverse };
  Kind kind = Kind::Bump;

  // Bump data
  int dim = 1;
  Point center;
  double radius = 1.0;
  double amplitude = 0.0;
  Point direction;

  // Children (Compose: applied first / applied second; Inverse: a only)
  std::shared_ptr<const Node> a, b;

  // Cached properties
  Point supp_center;
  double supp_radius = 1.0;
  bool fixes_origin = true;
};

namespace {

using Node = Diffeo::Node;

Point bump_apply(const Node& n, const Point& x) {
  const double r2 = (x - n.center).squaredNorm();
  const double R2 = n.radius * n.radius;
  if (!(r2 < R2)) return x;  // identity outside the closed ball, bitwise
  const double s = std::sqrt(r2) / n.radius;
  return x + (n.amplitude * bump_profile(s)) * n.direction;
}

double bump_apply1(const Node& n, double x) {
  const double dx = x - n.center[0];
  if (!(std::fabs(dx) < n.radius)) return x;
  const double s = std::fabs(dx) / n.radius;
  return x + n.amplitude * bump_profile(s) * n.direction[0];
}

double bump_jacobian(const Node& n, const Point& x) {
  const Point d = x - n.center;
  const double r = d.norm();
  if (!(r < n.radius)) return 1.0;
  if (r == 0.0) return 1.0;  // beta'(0) = 0
  const double s = r / n.radius;
  // det(I + (a/R) beta'(s) u rhat^T) = 1 + (a/R) beta'(s) <u, rhat>
  return 1.0 +
         (n.amplitude / n.radius) * bump_profile_deriv(s) * n.direction.dot(d) / r;
}

double bump_jacobian1(const Node& n, double x) {
  const double dx = x - n.center[0];
  const double adx = std::fabs(dx);
  if (!(adx < n.radius) || adx == 0.0) return 1.0;
  const double s = adx / n.radius;
  const double sgn = dx > 0.0 ? 1.0 : -1.0;
  return 1.0 + (n.amplitude / n.radius) * bump_profile_deriv(s) * n.direction[0] * sgn;
}

Point node_apply(const Node& n, const Point& x);
double node_jacobian(const Node& n, const Point& x);

// Solve node_apply(inner, z) = y.  Valid because the displacement of every
// accepted diffeomorphism is a contraction.
Point solve_inverse(const Node& inner, const Point& y) {
  if (!((y - inner.supp_center).squaredNorm() <
        inner.supp_radius * inner.supp_radius))
    return y;  // outside the support: phi is the identity there

  const double scale = 1.0 + y.norm();
  if (inner.dim == 1) {
    // Guarded Newton with a bracketing fallback.  The displacement is
    // bounded by sup|a| * beta(0) over the tree; start from a bracket wide
    // enough that phi(lo) <= y <= phi(hi).
    double pad = inner.supp_radius;  // conservative displacement bound
    double lo = y[0] - pad, hi = y[0] + pad;
    double x = y[0];
    for (int it = 0; it < 200; ++it) {
      const Point px = node_apply(inner, point1(x));
      const double f = px[0] - y[0];
      if (std::fabs(f) <= 1e-15 * scale) return point1(x);
      if (f > 0.0)
        hi = x;
      else
        lo = x;
      const double fp = node_jacobian(inner, point1(x));
      double xn = x - f / fp;
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      if (xn == x) return point1(x);  // bracket exhausted at float resolution
      x = xn;
    }
    throw std::runtime_error(
        "inverse: Newton iteration did not converge (amplitude bound violated upstream?)");
  }

  // d > 1: damped fixed-point iteration on  x = y - displacement(x).
  Point x = y;
  double damping = 1.0;
  double prev_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 5000; ++it) {
    const Point fx = node_apply(inner, x);
    const Point res = fx - y;
    const double rn = res.norm();
    if (rn <= 1e-14 * scale) return x;
    if (rn > prev_res) damping *= 0.5;
    prev_res = rn;
    x -= damping * res;
  }
  throw std::runtime_error(
      "inverse: fixed-point iteration did not converge (amplitude bound violated upstream?)");
}

Point node_apply(const Node& n, const Point& x) {
  switch (n.kind) {
    case Node::Kind::Bump:
      return bump_apply(n, x);
    case Node::Kind::Compose:
      return node_apply(*n.b, node_apply(*n.a, x));
    case Node::Kind::Inverse:
      return solve_inverse(*n.a, x);
  }
  return x;
}

double node_apply1(const Node& n, double x) {
  switch (n.kind) {
    case Node::Kind::Bump:
      return bump_apply1(n, x);
    case Node::Kind::Compose:
      return node_apply1(*n.b, node_apply1(*n.a, x));
    case Node::Kind::Inverse:
      return solve_inverse(*n.a, point1(x))[0];
  }
  return x;
}

double node_jacobian(const Node& n, const Point& x) {
  switch (n.kind) {
    case Node::Kind::Bump:
      return bump_jacobian(n, x);
    case Node::Kind::Compose:
      return node_jacobian(*n.a, x) * node_jacobian(*n.b, node_apply(*n.a, x));
    case Node::Kind::Inverse: {
      const Point z = solve_inverse(*n.a, x);
      return 1.0 / node_jacobian(*n.a, z);
    }
  }
  return 1.0;
}

double node_jacobian1(const Node& n, double x) {
  switch (n.kind) {
    case Node::Kind::Bump:
      return bump_jacobian1(n, x);
    case Node::Kind::Compose:
      return node_jacobian1(*n.a, x) * node_jacobian1(*n.b, node_apply1(*n.a, x));
    case Node::Kind::Inverse: {
      const Point z = solve_inverse(*n.a, point1(x));
      return 1.0 / node_jacobian1(*n.a, z[0]);
    }
  }
  return 1.0;
}

// Smallest ball enclosing two balls.
void enclosing_ball(const Point& c1, double r1, const Point& c2, double r2,
                    Point& center, double& radius) {
  const Point d = c2 - c1;
  const double dist = d.norm();
  if (dist + r2 <= r1) {
    center = c1;
    radius = r1;
    return;
  }
  if (dist + r1 <= r2) {
    center = c2;
    radius = r2;
    return;
  }
  radius = 0.5 * (dist + r1 + r2);
  const double t = (radius - r1) / dist;
  center = c1 + t * d;
}

}  // namespace

// ---------------------------------------------------------------------------
// Diffeo public surface
// ---------------------------------------------------------------------------

Diffeo::Diffeo(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Diffeo Diffeo::identity(int dim) {
  if (dim < 1) throw std::invalid_argument("Diffeo::identity: dim must be >= 1");
  Point c = Point::Zero(dim);
  Point u = Point::Zero(dim);
  u[0] = 1.0;
  return bump_flow(dim, c, 1.0, 0.0, u);
}

static const Diffeo::Node& require_node(const std::shared_ptr<const Diffeo::Node>& n) {
  static const Diffeo::Node identity1 = [] {
    Diffeo::Node m;
    m.dim = 1;
    m.center = Point::Zero(1);
    m.direction = point1(1.0);
    m.supp_center = Point::Zero(1);
    m.supp_radius = 1.0;
    m.fixes_origin = true;
    return m;
  }();
  return n ? *n : identity1;
}

int Diffeo::dim() const { return require_node(node_).dim; }
const Point& Diffeo::support_center() const { return require_node(node_).supp_center; }
double Diffeo::support_radius() const { return require_node(node_).supp_radius; }
bool Diffeo::fixes_origin() const { return require_node(node_).fixes_origin; }

Point Diffeo::apply(const Point& x) const {
  const Node& n = require_node(node_);
  if (x.size() != n.dim) throw std::invalid_argument("Diffeo::apply: dimension mismatch");
  return node_apply(n, x);
}

double Diffeo::jacobian(const Point& x) const {
  const Node& n = require_node(node_);
  if (x.size() != n.dim) throw std::invalid_argument("Diffeo::jacobian: dimension mismatch");
  return node_jacobian(n, x);
}

double Diffeo::apply1(double x) const {
  const Node& n = require_node(node_);
  if (n.dim != 1) throw std::logic_error("Diffeo::apply1 requires dim() == 1");
  return node_apply1(n, x);
}

double Diffeo::jacobian1(double x) const {
  const Node& n = require_node(node_);
  if (n.dim != 1) throw std::logic_error("Diffeo::jacobian1 requires dim() == 1");
  return node_jacobian1(n, x);
}

Diffeo bump_flow(int dim, const Point& center, double radius, double amplitude,
                 const Point& direction, bool require_fixed_origin) {
  if (dim < 1) throw std::invalid_argument("bump_flow: dim must be >= 1");
  if (center.size() != dim || direction.size() != dim)
    throw std::invalid_argument("bump_flow: center/direction dimension mismatch");
  if (!(radius > 0.0)) throw std::invalid_argument("bump_flow: radius must be positive");
  const double dn = direction.norm();
  if (std::fabs(dn - 1.0) > 1e-8)
    throw std::invalid_argument("bump_flow: direction must have unit norm");
  const double bound = max_bump_amplitude(radius);
  if (!(std::fabs(amplitude) < bound)) {
    std::ostringstream msg;
    msg << "bump_flow: |amplitude| = " << std::fabs(amplitude)
        << " is not a diffeomorphism; the maximal admissible amplitude for radius "
        << radius << " is " << bound << " (radius / sup|beta'|)";
    throw std::invalid_argument(msg.str());
  }

  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Bump;
  n->dim = dim;
  n->center = center;
  n->radius = radius;
  n->amplitude = amplitude;
  n->direction = direction;
  n->supp_center = center;
  n->supp_radius = radius;
  n->fixes_origin =
      amplitude == 0.0 || center.squaredNorm() >= radius * radius;
  if (require_fixed_origin && !n->fixes_origin)
    throw std::invalid_argument(
        "bump_flow: fixes_origin requested but the open support ball contains the origin");
  return Diffeo(std::move(n));
}

Diffeo bump_flow1(double center, double radius, double amplitude,
                  double direction, bool require_fixed_origin) {
  return bump_flow(1, point1(center), radius, amplitude, point1(direction),
                   require_fixed_origin);
}

Diffeo compose(const Diffeo& first, const Diffeo& second) {
  const Node& a = require_node(first.node_);
  const Node& b = require_node(second.node_);
  if (a.dim != b.dim) throw std::invalid_argument("compose: dimension mismatch");
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Compose;
  n->dim = a.dim;
  n->a = first.node_ ? first.node_ : std::make_shared<Node>(a);
  n->b = second.node_ ? second.node_ : std::make_shared<Node>(b);
  enclosing_ball(a.supp_center, a.supp_radius, b.supp_center, b.supp_radius,
                 n->supp_center, n->supp_radius);
  n->fixes_origin = a.fixes_origin && b.fixes_origin;
  return Diffeo(std::move(n));
}

Diffeo inverse(const Diffeo& phi) {
  const Node& inner = require_node(phi.node_);
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Inverse;
  n->dim = inner.dim;
  n->a = phi.node_ ? phi.node_ : std::make_shared<Node>(inner);
  n->supp_center = inner.supp_center;
  n->supp_radius = inner.supp_radius;
  n->fixes_origin = inner.fixes_origin;
  return Diffeo(std::move(n));
}

double jacobian_fd(const Diffeo& phi, const Point& x, double h) {
  const int d = phi.dim();
  Matrix m(d, d);
  for (int j = 0; j < d; ++j) {
    Point xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    m.col(j) = (phi.apply(xp) - phi.apply(xm)) / (2.0 * h);
  }
  return m.determinant();
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json point_to_json(const Point& p) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p[i]);
  return a;
}

Point point_from_json(const nlohmann::json& j) {
  Point p(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) p[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return p;
}

nlohmann::json node_to_json(const Node& n) {
  nlohmann::json j;
  switch (n.kind) {
    case Node::Kind::Bump:
      j["kind"] = "bump";
      j["dim"] = n.dim;
      j["center"] = point_to_json(n.center);
      j["radius"] = n.radius;
      j["amplitude"] = n.amplitude;
      j["direction"] = point_to_json(n.direction);
      break;
    case Node::Kind::Compose:
      j["kind"] = "compose";
      j["dim"] = n.dim;
      j["first"] = node_to_json(*n.a);
      j["second"] = node_to_json(*n.b);
      break;
    case Node::Kind::Inverse:
      j["kind"] = "inverse";
      j["dim"] = n.dim;
      j["inner"] = node_to_json(*n.a);
      break;
  }
  return j;
}

}  // namespace

nlohmann::json Diffeo::to_json() const { return node_to_json(require_node(node_)); }

Diffeo Diffeo::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bump") {
    return bump_flow(j.at("dim").get<int>(), point_from_json(j.at("center")),
                     j.at("radius").get<double>(), j.at("amplitude").get<double>(),
                     point_from_json(j.at("direction")),
                     j.value("fixes_origin", false));
  }
  if (kind == "compose")
    return compose(from_json(j.at("first")), from_json(j.at("second")));
  if (kind == "inverse") return inverse(from_json(j.at("inner")));
  throw std::invalid_argument("Diffeo::from_json: unknown kind '" + kind + "'");
}

}  // namespace selfsim

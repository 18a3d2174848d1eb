#include "selfsim/poisson.hpp"

#include <algorithm>

namespace selfsim {

Config sample_poisson(const PoissonSpec& spec, RngStream& rng) {
  spec.validate();
  const int d = spec.window.dim();
  const std::int64_t n = rng.poisson(spec.intensity * spec.window.volume());
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    Point p(d);
    for (int c = 0; c < d; ++c)
      p[c] = rng.uniform(spec.window.lo[c], spec.window.hi[c]);
    pts.push_back(std::move(p));
  }
  Config cfg = project(pts, static_cast<int>(pts.size()));
  cfg.source = "poisson intensity=" + std::to_string(spec.intensity);
  return cfg;
}

double poisson_rn(const Diffeo& phi, const Config& gamma) {
  const double r2 = phi.support_radius() * phi.support_radius();
  double product = 1.0;
  for (const Point& p : gamma.points) {
    if ((p - phi.support_center()).squaredNorm() < r2)
      product *= phi.jacobian(p);
    // points outside supp(phi) contribute a factor of exactly 1
  }
  return product;
}

}  // namespace selfsim

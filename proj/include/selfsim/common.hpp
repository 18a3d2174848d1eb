#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace selfsim {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Point point1(double x) {
  Point p(1);
  p[0] = x;
  return p;
}

/// Exact (coefficient-wise ==) comparison; no tolerance.
inline bool same_point(const Point& a, const Point& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

/// Lexicographic order on coordinates, used to canonicalize point sets.
inline bool lex_less(const Point& a, const Point& b) {
  for (Eigen::Index i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return a.size() < b.size();
}

/// Axis-aligned box in R^d. Whether membership is open or closed is decided
/// by the predicate that uses it, not by the box itself.
struct Box {
  Point lo, hi;

  Box() = default;
  Box(Point l, Point h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() != hi.size())
      throw std::invalid_argument("Box: lo/hi dimension mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i]))
        throw std::invalid_argument("Box: requires lo < hi in every coordinate");
  }
  static Box interval(double a, double b) { return Box(point1(a), point1(b)); }

  int dim() const { return static_cast<int>(lo.size()); }

  double volume() const {
    double v = 1.0;
    for (Eigen::Index i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }

  bool contains_closed(const Point& x) const {
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;
    return true;
  }

  bool contains_open(const Point& x) const {
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(x[i] > lo[i] && x[i] < hi[i])) return false;
    return true;
  }
};

/// Welford running mean / variance.
struct RunningStat {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double stderror() const {
    return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0;
  }
};

struct WilsonInterval {
  double lo = 0.0, hi = 1.0;
};

/// Wilson score interval for a binomial proportion (z = 1.96 ~ 95%).
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials,
                               double z = 1.96);

}  // namespace selfsim

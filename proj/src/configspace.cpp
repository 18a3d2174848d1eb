#include "selfsim/configspace.hpp"

#include <algorithm>
#include <numeric>

namespace selfsim {

namespace {

std::vector<Point> dedup_sorted(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Point& a, const Point& b) { return same_point(a, b); }),
            pts.end());
  return pts;
}

}  // namespace

Config project(const std::vector<Point>& points, int k) {
  if (k < 0 || k > static_cast<int>(points.size()))
    throw std::invalid_argument("project: k out of range");
  Config cfg;
  cfg.dim = points.empty() ? 1 : static_cast<int>(points.front().size());
  cfg.points = dedup_sorted({points.begin(), points.begin() + k});
  return cfg;
}

Config project(const SequencePath& path, int k) {
  Config cfg = project(path.points, k);
  cfg.dim = path.dim;
  cfg.source = path.provenance + " truncation=" + std::to_string(k);
  return cfg;
}

Config transform_config(const Diffeo& phi, const Config& gamma) {
  Config out;
  out.dim = gamma.dim;
  out.source = gamma.source;
  out.points.reserve(gamma.points.size());
  for (const Point& p : gamma.points) out.points.push_back(phi.apply(p));
  out.points = dedup_sorted(std::move(out.points));
  return out;
}

SequencePath transform_path(const Diffeo& phi, const SequencePath& path) {
  SequencePath out;
  out.dim = path.dim;
  out.provenance = path.provenance;
  out.saturated = path.saturated;
  out.points.reserve(path.points.size());
  for (const Point& p : path.points) out.points.push_back(phi.apply(p));
  return out;
}

bool in_diagonal(const std::vector<Point>& points, int k) {
  if (k < 0 || k > static_cast<int>(points.size()))
    throw std::invalid_argument("in_diagonal: k out of range");
  std::vector<Point> prefix(points.begin(), points.begin() + k);
  std::sort(prefix.begin(), prefix.end(), lex_less);
  for (std::size_t i = 1; i < prefix.size(); ++i)
    if (same_point(prefix[i - 1], prefix[i])) return true;
  return false;
}

bool in_diagonal(const SequencePath& path, int k) { return in_diagonal(path.points, k); }

int count_in_region(const std::vector<Point>& points, const Box& box) {
  int n = 0;
  for (const Point& p : points)
    if (box.contains_closed(p)) ++n;
  return n;
}

int count_in_region(const Config& gamma, const Box& box) {
  return count_in_region(gamma.points, box);
}

bool meets_open(const Config& gamma, const Box& open_box) {
  for (const Point& p : gamma.points)
    if (open_box.contains_open(p)) return true;
  return false;
}

bool subset_of_open(const Config& gamma, const Box& open_box) {
  for (const Point& p : gamma.points)
    if (!open_box.contains_open(p)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Accumulation-point estimation
// ---------------------------------------------------------------------------

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

double diameter(const std::vector<const Point*>& pts) {
  double d2max = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      d2max = std::max(d2max, (*pts[i] - *pts[j]).squaredNorm());
  return std::sqrt(d2max);
}

}  // namespace

AccumulationReport detect_accumulation_points(const SequencePath& path,
                                              const Box& region, double epsilon,
                                              int min_points, double tail_fraction) {
  const int len = static_cast<int>(path.points.size());
  if (len < 100)
    throw std::invalid_argument("detect_accumulation_points: path length must be >= 100");
  if (!(epsilon > 0.0))
    throw std::invalid_argument("detect_accumulation_points: epsilon must be positive");
  if (min_points < 2)
    throw std::invalid_argument("detect_accumulation_points: min_points must be >= 2");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0))
    throw std::invalid_argument("detect_accumulation_points: tail_fraction in (0, 1]");

  const int tail_len = std::max(2, static_cast<int>(std::ceil(tail_fraction * len)));
  const int start = len - tail_len;
  const double eps2 = epsilon * epsilon;

  // Single-linkage clustering of the tail at threshold epsilon.  Skipping
  // pairs already in the same component keeps point-collapsed tails cheap.
  UnionFind uf(tail_len);
  for (int i = 0; i < tail_len; ++i) {
    const Point& pi = path.points[start + i];
    for (int j = i + 1; j < tail_len; ++j) {
      if (uf.find(i) == uf.find(j)) continue;
      if ((pi - path.points[start + j]).squaredNorm() <= eps2) uf.unite(i, j);
    }
  }

  std::vector<std::vector<int>> clusters(tail_len);
  for (int i = 0; i < tail_len; ++i) clusters[uf.find(i)].push_back(i);

  AccumulationReport report;
  report.region = region;
  report.epsilon = epsilon;
  report.min_points = min_points;
  report.tail_fraction = tail_fraction;

  for (const auto& members : clusters) {
    if (static_cast<int>(members.size()) < min_points) continue;

    std::vector<const Point*> full, late;
    full.reserve(members.size());
    for (int idx : members) {
      full.push_back(&path.points[start + idx]);
      if (idx >= tail_len / 2) late.push_back(&path.points[start + idx]);
    }
    Point centroid = Point::Zero(path.points.front().size());
    for (const Point* p : full) centroid += *p;
    centroid /= static_cast<double>(full.size());

    const double d_full = diameter(full);
    const double d_late = diameter(late);
    const bool collapsed = d_full <= 1e-9 * (1.0 + centroid.norm());
    const bool shrinking = !late.empty() && d_late <= 0.75 * d_full;
    if (!(collapsed || shrinking)) continue;

    int within = 0;
    for (const Point* p : full)
      if ((*p - centroid).squaredNorm() <= eps2) ++within;
    if (within < min_points) continue;

    if (region.contains_closed(centroid)) report.points.push_back(centroid);
  }

  std::sort(report.points.begin(), report.points.end(), lex_less);
  report.count = static_cast<int>(report.points.size());
  for (std::size_t i = 0; i + 1 < report.points.size() && !report.unresolved; ++i)
    for (std::size_t j = i + 1; j < report.points.size(); ++j)
      if ((report.points[i] - report.points[j]).norm() < 2.0 * epsilon) {
        report.unresolved = true;  // unresolved at this resolution
        break;
      }
  return report;
}

EventEstimate event_probability_mc(const ConfigPredicate& predicate,
                                   const Process1DParams& params, int replicas,
                                   int k, std::uint64_t master_seed) {
  if (replicas < 1)
    throw std::invalid_argument("event_probability_mc: replicas must be positive");
  std::vector<char> hit(replicas, 0);
  parallel_replicas(replicas, [&](int r) {
    RngStream rng = RngStream::replica(master_seed, static_cast<std::uint64_t>(r));
    Process1DParams p = params;
    p.seed = derive_stream_seed(master_seed, static_cast<std::uint64_t>(r));
    const Path1D path = sample_path(p, rng);
    const Config cfg = project(to_sequence(path), std::min<int>(k, path.n_points()));
    hit[r] = predicate(cfg) ? 1 : 0;
  });
  EventEstimate est;
  est.replicas = replicas;
  for (char h : hit) est.successes += h;
  est.probability = static_cast<double>(est.successes) / replicas;
  est.ci = wilson_interval(est.successes, replicas);
  return est;
}

}  // namespace selfsim

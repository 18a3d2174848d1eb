#pragma once

// Generalized configurations: the (deduplicated) point set underlying a
// sequence prefix, the diagonal test, region-counting and meet/subset event
// predicates, and a truncation-level estimator for accumulation points.
// The estimator clusters the tail of a path with epsilon-linkage and
// accepts a cluster as one accumulation point when it keeps at least m tail
// points and its late-half diameter has shrunk; the true notion quantifies
// over infinite tails, so this is documented as an estimator and validated
// on fixtures with known answers.

#include "selfsim/common.hpp"
#include "selfsim/diffeo.hpp"
#include "selfsim/process1d.hpp"
#include "selfsim/rng.hpp"

#include <functional>
#include <string>
#include <vector>

namespace selfsim {

struct Config {
  int dim = 1;
  std::vector<Point> points;  // distinct, lexicographically sorted
  std::string source;

  int cardinality() const { return static_cast<int>(points.size()); }
};

/// Set of distinct points among the first k sequence entries (exact
/// floating-point equality; no epsilon matching).
Config project(const SequencePath& path, int k);
Config project(const std::vector<Point>& points, int k);

/// Pointwise image; preserves dedup/sort canonical form.
Config transform_config(const Diffeo& phi, const Config& gamma);
SequencePath transform_path(const Diffeo& phi, const SequencePath& path);

/// True iff some pair of the first k entries is exactly equal.
bool in_diagonal(const SequencePath& path, int k);
bool in_diagonal(const std::vector<Point>& points, int k);

/// Exact count of points in the closed box.
int count_in_region(const Config& gamma, const Box& box);
int count_in_region(const std::vector<Point>& points, const Box& box);

/// True iff some point lies in the open box (the O_U "meet" event).
bool meets_open(const Config& gamma, const Box& open_box);

/// True iff every point lies in the open box (the O^V subset event).
bool subset_of_open(const Config& gamma, const Box& open_box);

struct AccumulationReport {
  std::vector<Point> points;  // estimated accumulation points inside K
  int count = 0;
  Box region;
  double epsilon = 0.0;
  int min_points = 0;
  double tail_fraction = 0.0;
  bool unresolved = false;  // two estimates within 2*epsilon of each other
};

/// Clusters the final tail_fraction of the path with epsilon-linkage.
/// A cluster is reported (as its centroid) when it has >= min_points tail
/// points, its late-half diameter shrank relative to the full tail diameter
/// (or the cluster is already point-collapsed), and >= min_points of its
/// points lie within epsilon of the centroid.  Requires path length >= 100.
AccumulationReport detect_accumulation_points(const SequencePath& path,
                                              const Box& region, double epsilon,
                                              int min_points,
                                              double tail_fraction = 0.5);

using ConfigPredicate = std::function<bool(const Config&)>;

struct EventEstimate {
  double probability = 0.0;
  WilsonInterval ci;
  int replicas = 0;
  int successes = 0;
};

/// Empirical frequency of the predicate over truncated configurations
/// sampled from the 1-D process, with a Wilson interval.
EventEstimate event_probability_mc(const ConfigPredicate& predicate,
                                   const Process1DParams& params, int replicas,
                                   int k, std::uint64_t master_seed);

}  // namespace selfsim

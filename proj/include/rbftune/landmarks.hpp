#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rbftune/kernel.hpp"

namespace rbftune {

/// Landmarks chosen by k-means++ / Lloyd, mapped back onto actual nodes.
struct LandmarkSet {
  std::vector<Index> indices;      ///< m distinct node indices
  std::vector<int> assignments;    ///< cluster label in [0, m) for each node
  double inertia = 0.0;            ///< sum of squared point-to-centroid distances
  std::uint64_t seed = 0;
};

struct KmeansOptions {
  int replicates = 5;
  int max_lloyd_iterations = 200;
  double center_tolerance = 1e-6;  ///< stop when every center moves less than this
};

/// One k-means++ replicate with Lloyd refinement, before landmark mapping.
struct KmeansRun {
  PointMatrix centers;              ///< m x d centroids
  std::vector<int> assignments;
  std::vector<double> inertia_trace;  ///< inertia after each assignment step
  int iterations = 0;
  bool converged = false;

  double inertia() const { return inertia_trace.empty() ? 0.0 : inertia_trace.back(); }
};

/// Stream seed for replicate `replicate` of a selection seeded with `seed`.
std::uint64_t replicate_seed(std::uint64_t seed, int replicate) noexcept;

KmeansRun kmeans_replicate(const NodeSet& nodes, Index m, std::uint64_t stream_seed,
                           const KmeansOptions& options = {});

/// Maps each center to its nearest node; a center whose nearest node is already
/// taken gets its nearest unused node instead.
std::vector<Index> map_centers_to_nodes(const NodeSet& nodes, const PointMatrix& centers);

/// Best-of-replicates k-means++ landmark selection. Deterministic in
/// (nodes, m, seed). Throws TooManyLandmarks if m > N.
LandmarkSet kmeanspp_select(const NodeSet& nodes, Index m, std::uint64_t seed,
                            const KmeansOptions& options = {});

/// Normalized mutual information I / sqrt(H_a H_b) with natural logs. When
/// either labelling has zero entropy the result is 1 if both induce the same
/// partition and 0 otherwise.
double nmi(std::span<const int> assign_a, std::span<const int> assign_b);

struct StabilityReport {
  Index n = 0;
  Index m = 0;
  int dim = 0;
  std::vector<double> pair_nmis;  ///< C(10,2) = 45 values, ordered (0,1),(0,2),...,(8,9)
  double mean_nmi = 0.0;
  double std_nmi = 0.0;           ///< population standard deviation
};

inline constexpr int kStabilityRuns = 10;

/// Seed of stability run r (1-based): base_seed * 1000 + r.
constexpr std::uint64_t stability_run_seed(std::uint64_t base_seed, int run) noexcept {
  return base_seed * 1000 + static_cast<std::uint64_t>(run);
}

StabilityReport stability_experiment(const NodeSet& nodes, Index m, std::uint64_t base_seed,
                                     int workers = 1, const KmeansOptions& options = {});

}  // namespace rbftune

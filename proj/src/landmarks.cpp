#include "rbftune/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "rbftune/error.hpp"
#include "rbftune/parallel.hpp"
#include "rbftune/random.hpp"

namespace rbftune {
namespace {

// Row-major copy of the points; the Lloyd loop is the hot path of landmark
// selection and benefits from contiguous per-point coordinates.
struct FlatPoints {
  std::vector<double> data;
  Index n = 0;
  int dim = 0;

  explicit FlatPoints(const PointMatrix& p) : data(static_cast<std::size_t>(p.size())), n(p.rows()), dim(static_cast<int>(p.cols())) {
    for (Index i = 0; i < n; ++i) {
      for (int k = 0; k < dim; ++k) data[static_cast<std::size_t>(i * dim + k)] = p(i, k);
    }
  }
  const double* row(Index i) const { return data.data() + i * dim; }
};

template <int D>
inline double sq_dist(const double* a, const double* b) {
  double s = 0.0;
  for (int k = 0; k < D; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

inline double sq_dist(const double* a, const double* b, int dim) {
  switch (dim) {
    case 1: return sq_dist<1>(a, b);
    case 2: return sq_dist<2>(a, b);
    default: return sq_dist<3>(a, b);
  }
}

template <int D>
void assign_nearest(const FlatPoints& pts, const std::vector<double>& centers, Index m,
                    std::vector<int>& labels, std::vector<double>& dist2) {
  for (Index i = 0; i < pts.n; ++i) {
    const double* x = pts.row(i);
    double best = std::numeric_limits<double>::infinity();
    int best_j = 0;
    for (Index j = 0; j < m; ++j) {
      const double d = sq_dist<D>(x, centers.data() + j * D);
      if (d < best) {
        best = d;
        best_j = static_cast<int>(j);
      }
    }
    labels[static_cast<std::size_t>(i)] = best_j;
    dist2[static_cast<std::size_t>(i)] = best;
  }
}

// Assignment step followed by empty-cluster repair: an empty cluster's center
// jumps to the point farthest from its current center, which then joins it.
double assign_and_repair(const FlatPoints& pts, std::vector<double>& centers, Index m,
                         std::vector<int>& labels, std::vector<double>& dist2) {
  switch (pts.dim) {
    case 1: assign_nearest<1>(pts, centers, m, labels, dist2); break;
    case 2: assign_nearest<2>(pts, centers, m, labels, dist2); break;
    default: assign_nearest<3>(pts, centers, m, labels, dist2); break;
  }

  std::vector<Index> counts(static_cast<std::size_t>(m), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];

  for (Index j = 0; j < m; ++j) {
    if (counts[static_cast<std::size_t>(j)] > 0) continue;
    Index far = -1;
    double far_d = -1.0;
    for (Index i = 0; i < pts.n; ++i) {
      const auto si = static_cast<std::size_t>(i);
      if (counts[static_cast<std::size_t>(labels[si])] > 1 && dist2[si] > far_d) {
        far_d = dist2[si];
        far = i;
      }
    }
    if (far < 0) break;  // cannot happen while m <= N
    const auto sf = static_cast<std::size_t>(far);
    --counts[static_cast<std::size_t>(labels[sf])];
    labels[sf] = static_cast<int>(j);
    dist2[sf] = 0.0;
    counts[static_cast<std::size_t>(j)] = 1;
    std::copy_n(pts.row(far), pts.dim, centers.begin() + j * pts.dim);
  }

  double inertia = 0.0;
  for (double d : dist2) inertia += d;
  return inertia;
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t seed, int replicate) noexcept {
  return mix_seed(seed, static_cast<std::uint64_t>(replicate));
}

KmeansRun kmeans_replicate(const NodeSet& nodes, Index m, std::uint64_t stream_seed,
                           const KmeansOptions& options) {
  const Index n = nodes.size();
  if (m < 1) throw Error(Errc::InvalidArgument, "landmark count must be positive");
  if (m > n) {
    throw Error(Errc::TooManyLandmarks,
                std::to_string(m) + " landmarks requested for " + std::to_string(n) + " nodes");
  }
  const FlatPoints pts(nodes.points());
  const int dim = pts.dim;
  Rng rng(stream_seed);

  // D^2-weighted seeding. Points already chosen have weight zero and are never
  // drawn again.
  std::vector<double> centers(static_cast<std::size_t>(m * dim));
  std::vector<double> weight(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  Index chosen = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  for (Index k = 0; k < m; ++k) {
    if (k > 0) {
      double total = 0.0;
      for (double w : weight) total += w;
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      chosen = -1;
      Index last_positive = -1;
      for (Index i = 0; i < n; ++i) {
        const double w = weight[static_cast<std::size_t>(i)];
        if (w <= 0.0) continue;
        last_positive = i;
        cumulative += w;
        if (cumulative > target) {
          chosen = i;
          break;
        }
      }
      if (chosen < 0) chosen = last_positive;
    }
    std::copy_n(pts.row(chosen), dim, centers.begin() + k * dim);
    const double* c = pts.row(chosen);
    for (Index i = 0; i < n; ++i) {
      auto& w = weight[static_cast<std::size_t>(i)];
      w = std::min(w, sq_dist(pts.row(i), c, dim));
    }
  }

  KmeansRun run;
  run.assignments.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dist2(static_cast<std::size_t>(n), 0.0);
  std::vector<double> sums(centers.size());
  std::vector<Index> counts(static_cast<std::size_t>(m));

  for (int iter = 0; iter < options.max_lloyd_iterations; ++iter) {
    run.inertia_trace.push_back(assign_and_repair(pts, centers, m, run.assignments, dist2));
    ++run.iterations;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (Index i = 0; i < n; ++i) {
      const int l = run.assignments[static_cast<std::size_t>(i)];
      ++counts[static_cast<std::size_t>(l)];
      const double* x = pts.row(i);
      for (int k = 0; k < dim; ++k) sums[static_cast<std::size_t>(l * dim + k)] += x[k];
    }
    double max_move = 0.0;
    for (Index j = 0; j < m; ++j) {
      const auto cnt = static_cast<double>(counts[static_cast<std::size_t>(j)]);
      double move2 = 0.0;
      for (int k = 0; k < dim; ++k) {
        const auto s = static_cast<std::size_t>(j * dim + k);
        const double updated = sums[s] / cnt;
        move2 += (updated - centers[s]) * (updated - centers[s]);
        centers[s] = updated;
      }
      max_move = std::max(max_move, std::sqrt(move2));
    }
    if (max_move < options.center_tolerance) {
      run.converged = true;
      break;
    }
  }
  // Labels and inertia consistent with the final centroids.
  run.inertia_trace.push_back(assign_and_repair(pts, centers, m, run.assignments, dist2));

  run.centers.resize(m, dim);
  for (Index j = 0; j < m; ++j) {
    for (int k = 0; k < dim; ++k) run.centers(j, k) = centers[static_cast<std::size_t>(j * dim + k)];
  }
  return run;
}

std::vector<Index> map_centers_to_nodes(const NodeSet& nodes, const PointMatrix& centers) {
  const Index n = nodes.size();
  const Index m = centers.rows();
  if (m > n) throw Error(Errc::TooManyLandmarks, "more centers than nodes");
  if (centers.cols() != nodes.dim()) throw Error(Errc::DimensionMismatch, "center dimension");

  std::vector<bool> used(static_cast<std::size_t>(n), false);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(m));
  for (Index j = 0; j < m; ++j) {
    Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double d = (nodes.points().row(i) - centers.row(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.push_back(best);
  }
  return out;
}

LandmarkSet kmeanspp_select(const NodeSet& nodes, Index m, std::uint64_t seed,
                            const KmeansOptions& options) {
  if (m > nodes.size()) {
    throw Error(Errc::TooManyLandmarks, std::to_string(m) + " landmarks requested for " +
                                            std::to_string(nodes.size()) + " nodes");
  }
  if (options.replicates < 1) throw Error(Errc::InvalidArgument, "replicate count must be positive");

  KmeansRun best;
  bool have_best = false;
  for (int r = 0; r < options.replicates; ++r) {
    KmeansRun run = kmeans_replicate(nodes, m, replicate_seed(seed, r), options);
    if (!have_best || run.inertia() < best.inertia()) {
      best = std::move(run);
      have_best = true;
    }
  }

  LandmarkSet out;
  out.indices = map_centers_to_nodes(nodes, best.centers);
  out.assignments = std::move(best.assignments);
  out.inertia = best.inertia();
  out.seed = seed;
  return out;
}

double nmi(std::span<const int> assign_a, std::span<const int> assign_b) {
  if (assign_a.size() != assign_b.size()) {
    throw Error(Errc::LengthMismatch, "assignment vectors differ in length");
  }
  if (assign_a.empty()) throw Error(Errc::LengthMismatch, "assignment vectors are empty");

  std::map<int, double> count_a;
  std::map<int, double> count_b;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < assign_a.size(); ++i) {
    count_a[assign_a[i]] += 1.0;
    count_b[assign_b[i]] += 1.0;
    joint[{assign_a[i], assign_b[i]}] += 1.0;
  }

  const bool same_partition = joint.size() == count_a.size() && joint.size() == count_b.size();
  if (same_partition) return 1.0;
  if (count_a.size() == 1 || count_b.size() == 1) return 0.0;

  const auto n = static_cast<double>(assign_a.size());
  auto entropy = [n](const std::map<int, double>& counts) {
    double h = 0.0;
    for (const auto& [label, c] : counts) {
      const double p = c / n;
      h -= p * std::log(p);
    }
    return h;
  };
  const double ha = entropy(count_a);
  const double hb = entropy(count_b);

  double mi = 0.0;
  for (const auto& [labels, c] : joint) {
    const double pab = c / n;
    const double pa = count_a[labels.first] / n;
    const double pb = count_b[labels.second] / n;
    mi += pab * std::log(pab / (pa * pb));
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

StabilityReport stability_experiment(const NodeSet& nodes, Index m, std::uint64_t base_seed,
                                     int workers, const KmeansOptions& options) {
  std::vector<LandmarkSet> runs(kStabilityRuns);
  parallel_for(runs.size(), workers, [&](std::size_t r) {
    runs[r] = kmeanspp_select(nodes, m, stability_run_seed(base_seed, static_cast<int>(r) + 1), options);
  });

  StabilityReport report;
  report.n = nodes.size();
  report.m = m;
  report.dim = nodes.dim();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      report.pair_nmis.push_back(nmi(runs[i].assignments, runs[j].assignments));
    }
  }
  const auto count = static_cast<double>(report.pair_nmis.size());
  double sum = 0.0;
  for (double v : report.pair_nmis) sum += v;
  report.mean_nmi = sum / count;
  double var = 0.0;
  for (double v : report.pair_nmis) var += (v - report.mean_nmi) * (v - report.mean_nmi);
  report.std_nmi = std::sqrt(var / count);
  return report;
}

}  // namespace rbftune

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "rbftune/kernel.hpp"
#include "rbftune/loocv.hpp"

namespace rbftune {

/// Objective used by the shape-parameter searches. Must be safe to call
/// concurrently from several threads.
using Objective = std::function<LoocvEvaluation(double epsilon)>;

/// Two-stage search: log-spaced coarse grid, then a linear grid on
/// [refine_lo_factor * eps_c, refine_hi_factor * eps_c].
struct GridSpec {
  int coarse_count = 30;
  double coarse_lo = 1e-5;
  double coarse_hi = 1e3;
  int refine_count = 50;
  double refine_lo_factor = 0.5;
  double refine_hi_factor = 2.0;

  void validate() const;
};

/// Log-space gradient descent with adaptive step and backtracking.
struct GdSpec {
  double eta0 = 1.0;
  double eta_max = 5.0;
  double grow = 1.2;
  double shrink = 0.5;
  int max_retries = 15;
  int max_iters = 100;
  double grad_tol = 1e-8;
  double rel_obj_tol = 1e-12;
  double fd_scale = 1e-8;

  void validate() const;

  /// Upper bound on objective calls: each iteration uses two stencil points,
  /// one candidate and at most max_retries further candidates.
  long evaluation_budget() const {
    return static_cast<long>(max_iters) * (2 + max_retries + 1);
  }
};

enum class TuneMethod { GridFull, GridNystrom, GdFull, GdNystrom };

std::string_view tune_method_name(TuneMethod method) noexcept;

enum class GdStop {
  None,
  GradientTolerance,
  RelativeChange,
  MaxIterations,
  RetriesExhausted,
  InvalidStencil,
  BudgetExhausted,
};

struct TracePoint {
  double epsilon;
  std::optional<double> objective;
};

struct TuneResult {
  double epsilon_star = 0.0;
  double objective_star = 0.0;
  TuneMethod method = TuneMethod::GridFull;
  long evaluations = 0;
  int iterations = 0;
  std::chrono::nanoseconds wall_time{0};
  /// Visited (epsilon, L). Gradient descent omits its finite-difference
  /// stencil points, so objective_star is the minimum valid value here.
  std::vector<TracePoint> trace;

  // Grid-only diagnostics.
  double coarse_epsilon = 0.0;
  std::vector<double> coarse_grid;
  std::vector<double> refine_grid;

  // Gradient-descent-only diagnostics.
  std::vector<double> accepted_objectives;  ///< L(eps0) followed by each accepted step
  GdStop stop = GdStop::None;
};

/// Dimension-dependent starting value for gradient descent.
///  d = 1: 0.8 sqrt(N) / D, D = max x - min x
///  d = 2: 0.8 N^(1/4) / D, D = point-set diameter
///  d = 3: 1 / (median pairwise distance of <= 1000 sampled points + 1e-8)
double initial_epsilon(const NodeSet& nodes, std::uint64_t seed);

/// Largest pairwise distance; exhaustive for N <= 4096, otherwise over a
/// seeded 2000-point subsample.
double point_set_diameter(const NodeSet& nodes, std::uint64_t seed = 0);

/// n values lo * r^i with exact endpoints.
std::vector<double> log_grid(double lo, double hi, int n);
/// n values evenly spaced on [lo, hi] with exact endpoints.
std::vector<double> linear_grid(double lo, double hi, int n);

TuneResult grid_search(const Objective& objective, const GridSpec& grid,
                       TuneMethod method = TuneMethod::GridFull, int workers = 1);

TuneResult gradient_descent(const Objective& objective, double eps0, const GdSpec& gd,
                            TuneMethod method = TuneMethod::GdFull);

}  // namespace rbftune

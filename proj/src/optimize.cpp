#include "rbftune/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rbftune/error.hpp"
#include "rbftune/parallel.hpp"
#include "rbftune/random.hpp"

namespace rbftune {
namespace {

using Clock = std::chrono::steady_clock;

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// Index of the smallest valid objective; first index wins ties. -1 if none.
long argmin_valid(const std::vector<LoocvEvaluation>& evals) {
  long best = -1;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    if (!evals[i].valid()) continue;
    if (best < 0 || *evals[i].objective < *evals[static_cast<std::size_t>(best)].objective) {
      best = static_cast<long>(i);
    }
  }
  return best;
}

std::vector<LoocvEvaluation> evaluate_all(const Objective& objective,
                                          const std::vector<double>& eps, int workers) {
  std::vector<LoocvEvaluation> out(eps.size());
  parallel_for(eps.size(), workers, [&](std::size_t i) { out[i] = objective(eps[i]); });
  return out;
}

}  // namespace

void GridSpec::validate() const {
  if (coarse_count < 2 || refine_count < 2) throw Error(Errc::InvalidArgument, "grid counts must be >= 2");
  if (!(finite_positive(coarse_lo) && finite_positive(coarse_hi) && coarse_lo < coarse_hi)) {
    throw Error(Errc::InvalidArgument, "coarse grid needs 0 < lo < hi");
  }
  if (!(refine_lo_factor > 0.0 && refine_lo_factor < refine_hi_factor && std::isfinite(refine_hi_factor))) {
    throw Error(Errc::InvalidArgument, "refine factors need 0 < lo < hi");
  }
}

void GdSpec::validate() const {
  const bool ok = eta0 > 0.0 && eta_max >= eta0 && shrink > 0.0 && shrink < 1.0 && grow > 1.0 &&
                  max_retries >= 0 && max_iters >= 1 && grad_tol > 0.0 && rel_obj_tol > 0.0 &&
                  fd_scale > 0.0;
  if (!ok) throw Error(Errc::InvalidArgument, "invalid gradient descent settings");
}

std::string_view tune_method_name(TuneMethod method) noexcept {
  switch (method) {
    case TuneMethod::GridFull: return "rippa";
    case TuneMethod::GridNystrom: return "rippa-nystrom";
    case TuneMethod::GdFull: return "gd";
    case TuneMethod::GdNystrom: return "gd-nystrom";
  }
  return "unknown";
}

double point_set_diameter(const NodeSet& nodes, std::uint64_t seed) {
  constexpr Index kExhaustiveLimit = 4096;
  constexpr Index kSubsample = 2000;
  const auto& x = nodes.points();
  std::vector<Index> idx(static_cast<std::size_t>(nodes.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  if (nodes.size() > kExhaustiveLimit) {
    Rng rng(seed);
    // Partial Fisher-Yates: the first kSubsample entries become the sample.
    for (Index i = 0; i < kSubsample; ++i) {
      const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(nodes.size() - i)));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(kSubsample);
  }
  double best = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      best = std::max(best, distance(x.row(idx[a]), x.row(idx[b])));
    }
  }
  return best;
}

double initial_epsilon(const NodeSet& nodes, std::uint64_t seed) {
  const auto n = static_cast<double>(nodes.size());
  const auto& x = nodes.points();
  switch (nodes.dim()) {
    case 1: {
      const double diameter = x.col(0).maxCoeff() - x.col(0).minCoeff();
      if (!(diameter > 0.0)) throw Error(Errc::DegenerateGeometry, "all nodes coincide");
      return 0.8 * std::sqrt(n) / diameter;
    }
    case 2: {
      const double diameter = point_set_diameter(nodes, seed);
      if (!(diameter > 0.0)) throw Error(Errc::DegenerateGeometry, "all nodes coincide");
      return 0.8 * std::pow(n, 0.25) / diameter;
    }
    default: {
      constexpr Index kSample = 1000;
      const Index count = std::min(nodes.size(), kSample);
      std::vector<Index> idx(static_cast<std::size_t>(nodes.size()));
      std::iota(idx.begin(), idx.end(), Index{0});
      Rng rng(seed);
      for (Index i = 0; i < count; ++i) {
        const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(nodes.size() - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      }
      std::vector<double> dists;
      dists.reserve(static_cast<std::size_t>(count * (count - 1) / 2));
      for (Index a = 0; a < count; ++a) {
        for (Index b = a + 1; b < count; ++b) {
          dists.push_back(distance(x.row(idx[static_cast<std::size_t>(a)]),
                                   x.row(idx[static_cast<std::size_t>(b)])));
        }
      }
      if (dists.empty()) throw Error(Errc::DegenerateGeometry, "need at least two nodes");
      // Median: mean of the two middle values for an even count.
      const std::size_t mid = dists.size() / 2;
      std::nth_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid), dists.end());
      double median = dists[mid];
      if (dists.size() % 2 == 0) {
        median = 0.5 * (median + *std::max_element(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(mid)));
      }
      if (!(median > 0.0)) throw Error(Errc::DegenerateGeometry, "median pairwise distance is zero");
      return 1.0 / (median + 1e-8);
    }
  }
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 2) throw Error(Errc::InvalidArgument, "grid needs at least two points");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::exp(log_lo + step * i);
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 2) throw Error(Errc::InvalidArgument, "grid needs at least two points");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

TuneResult grid_search(const Objective& objective, const GridSpec& grid, TuneMethod method,
                       int workers) {
  grid.validate();
  const auto start = Clock::now();
  TuneResult result;
  result.method = method;

  result.coarse_grid = log_grid(grid.coarse_lo, grid.coarse_hi, grid.coarse_count);
  const auto coarse = evaluate_all(objective, result.coarse_grid, workers);
  const long coarse_best = argmin_valid(coarse);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    result.trace.push_back({result.coarse_grid[i], coarse[i].objective});
  }
  result.evaluations = static_cast<long>(coarse.size());
  if (coarse_best < 0) {
    throw Error(Errc::AllEvaluationsInvalid, "no valid objective value on the coarse grid");
  }
  result.coarse_epsilon = result.coarse_grid[static_cast<std::size_t>(coarse_best)];

  result.refine_grid = linear_grid(grid.refine_lo_factor * result.coarse_epsilon,
                                   grid.refine_hi_factor * result.coarse_epsilon, grid.refine_count);
  const auto refine = evaluate_all(objective, result.refine_grid, workers);
  for (std::size_t i = 0; i < refine.size(); ++i) {
    result.trace.push_back({result.refine_grid[i], refine[i].objective});
  }
  result.evaluations += static_cast<long>(refine.size());

  result.epsilon_star = result.coarse_epsilon;
  result.objective_star = *coarse[static_cast<std::size_t>(coarse_best)].objective;
  const long refine_best = argmin_valid(refine);
  if (refine_best >= 0 && *refine[static_cast<std::size_t>(refine_best)].objective < result.objective_star) {
    result.epsilon_star = result.refine_grid[static_cast<std::size_t>(refine_best)];
    result.objective_star = *refine[static_cast<std::size_t>(refine_best)].objective;
  }
  result.iterations = 2;
  result.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  return result;
}

TuneResult gradient_descent(const Objective& objective, double eps0, const GdSpec& gd,
                            TuneMethod method) {
  gd.validate();
  if (!finite_positive(eps0)) throw Error(Errc::InvalidArgument, "starting epsilon must be positive");
  const auto start = Clock::now();
  const long budget = gd.evaluation_budget();

  TuneResult result;
  result.method = method;
  // Finite-difference stencil points are counted but kept out of the trace,
  // which holds the start and every candidate step.
  auto eval = [&](double eps, bool record = true) -> std::optional<double> {
    const LoocvEvaluation e = objective(eps);
    ++result.evaluations;
    if (record) result.trace.push_back({eps, e.objective});
    return e.objective;
  };

  const auto l0 = eval(eps0);
  if (!l0) throw Error(Errc::InvalidStart, "objective is invalid at the starting epsilon");

  double theta = std::log(eps0);
  double eps = eps0;
  double loss = *l0;
  double eta = gd.eta0;
  result.accepted_objectives.push_back(loss);

  while (true) {
    if (result.iterations >= gd.max_iters) {
      result.stop = GdStop::MaxIterations;
      break;
    }
    if (result.evaluations + 3 > budget) {
      result.stop = GdStop::BudgetExhausted;
      break;
    }
    const double h = std::max(gd.fd_scale, gd.fd_scale * std::abs(eps));
    if (!(eps - h > 0.0)) {
      result.stop = GdStop::InvalidStencil;
      break;
    }
    const auto lp = eval(eps + h, false);
    const auto lm = eval(eps - h, false);
    if (!lp || !lm) {
      result.stop = GdStop::InvalidStencil;
      break;
    }
    const double grad_eps = (*lp - *lm) / (2.0 * h);
    if (!std::isfinite(grad_eps)) {
      result.stop = GdStop::InvalidStencil;
      break;
    }
    if (std::abs(grad_eps) < gd.grad_tol) {
      result.stop = GdStop::GradientTolerance;
      break;
    }
    const double grad_theta = eps * grad_eps;

    bool accepted = false;
    double candidate_loss = 0.0;
    double candidate_theta = theta;
    for (int attempt = 0; attempt <= gd.max_retries; ++attempt) {
      if (result.evaluations + 1 > budget) break;
      candidate_theta = theta - eta * grad_theta;
      const double candidate_eps = std::exp(candidate_theta);
      if (finite_positive(candidate_eps)) {
        const auto lc = eval(candidate_eps);
        if (lc && *lc < loss) {
          accepted = true;
          candidate_loss = *lc;
          break;
        }
      }
      eta *= gd.shrink;
    }
    if (!accepted) {
      result.stop = GdStop::RetriesExhausted;
      break;
    }

    const double previous = loss;
    theta = candidate_theta;
    eps = std::exp(theta);
    loss = candidate_loss;
    eta = std::min(gd.grow * eta, gd.eta_max);
    ++result.iterations;
    result.accepted_objectives.push_back(loss);

    if (std::abs(previous - loss) / std::max(std::abs(previous), 1e-300) < gd.rel_obj_tol) {
      result.stop = GdStop::RelativeChange;
      break;
    }
  }

  result.epsilon_star = eps;
  result.objective_star = loss;
  result.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  return result;
}

}  // namespace rbftune

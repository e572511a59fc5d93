#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rbftune/error.hpp"
#include "rbftune/optimize.hpp"
#include "rbftune/testbed.hpp"

using namespace rbftune;

namespace {

LoocvEvaluation scalar(double eps, std::optional<double> value) {
  LoocvEvaluation e;
  e.epsilon = eps;
  e.objective = value;
  return e;
}

Objective from(std::function<double(double)> f) {
  return [f](double eps) { return scalar(eps, f(eps)); };
}

double min_valid(const TuneResult& r) {
  double best = INFINITY;
  for (const auto& p : r.trace) {
    if (p.objective) best = std::min(best, *p.objective);
  }
  return best;
}

}  // namespace

TEST_CASE("log and linear grids") {
  const auto g = log_grid(1e-5, 1e3, 30);
  REQUIRE(g.size() == 30);
  CHECK(g.front() == 1e-5);
  CHECK(g.back() == 1e3);
  const double ratio = std::pow(1e8, 1.0 / 29.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(std::abs(g[i] / g[i - 1] - ratio) <= 1e-12 * ratio);
  }
  const auto lin = linear_grid(3.5, 14.0, 50);
  REQUIRE(lin.size() == 50);
  CHECK(lin.front() == 3.5);
  CHECK(lin.back() == 14.0);
  const double step = 10.5 / 49.0;
  for (std::size_t i = 1; i < lin.size(); ++i) CHECK(std::abs(lin[i] - lin[i - 1] - step) <= 1e-12 * 10.5);
  CHECK_THROWS_AS(log_grid(1.0, 2.0, 1), Error);
}

TEST_CASE("grid spec validation") {
  GridSpec g;
  CHECK_NOTHROW(g.validate());
  g.coarse_lo = 2e3;
  CHECK_THROWS_AS(g.validate(), Error);
  g = GridSpec{};
  g.refine_count = 1;
  CHECK_THROWS_AS(g.validate(), Error);
  g = GridSpec{};
  g.refine_lo_factor = 3.0;
  CHECK_THROWS_AS(g.validate(), Error);
}

TEST_CASE("grid search on (eps - 7)^2") {
  const TuneResult r = grid_search(from([](double e) { return (e - 7.0) * (e - 7.0); }), GridSpec{});
  const double spacing = (r.refine_grid.back() - r.refine_grid.front()) / 49.0;
  CHECK(std::abs(r.epsilon_star - 7.0) <= spacing);
  CHECK(r.refine_grid.front() == 0.5 * r.coarse_epsilon);
  CHECK(r.refine_grid.back() == 2.0 * r.coarse_epsilon);
  // Coarse minimizer is the log-grid point nearest 7 in objective value.
  double best = INFINITY, best_eps = 0.0;
  for (double e : log_grid(1e-5, 1e3, 30)) {
    if ((e - 7.0) * (e - 7.0) < best) {
      best = (e - 7.0) * (e - 7.0);
      best_eps = e;
    }
  }
  CHECK(r.coarse_epsilon == best_eps);
  CHECK(r.evaluations == 80);
  CHECK(r.objective_star == min_valid(r));
  CHECK(r.method == TuneMethod::GridFull);
}

TEST_CASE("grid search with a single valid coarse point") {
  const auto coarse = log_grid(1e-5, 1e3, 30);
  const double only = coarse[10];
  const Objective obj = [only](double eps) {
    return scalar(eps, eps == only ? std::optional<double>(1.0) : std::nullopt);
  };
  const TuneResult r = grid_search(obj, GridSpec{});
  CHECK(r.epsilon_star == only);
  CHECK(r.objective_star == 1.0);
  CHECK(r.evaluations == 80);
}

TEST_CASE("grid search with nothing valid throws") {
  const Objective obj = [](double eps) { return scalar(eps, std::nullopt); };
  try {
    grid_search(obj, GridSpec{});
    FAIL("expected AllEvaluationsInvalid");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::AllEvaluationsInvalid);
  }
}

TEST_CASE("grid search ties go to the first index and workers do not matter") {
  const Objective flat = from([](double) { return 2.0; });
  const TuneResult r = grid_search(flat, GridSpec{});
  CHECK(r.coarse_epsilon == 1e-5);
  CHECK(r.epsilon_star == 1e-5);

  const auto f = from([](double e) { return std::pow(std::log(e) - 1.3, 2) + 0.1 * std::sin(5 * e); });
  const TuneResult serial = grid_search(f, GridSpec{}, TuneMethod::GridFull, 1);
  const TuneResult parallel = grid_search(f, GridSpec{}, TuneMethod::GridFull, 3);
  CHECK(serial.epsilon_star == parallel.epsilon_star);
  CHECK(serial.objective_star == parallel.objective_star);
}

TEST_CASE("gradient descent on (ln eps - ln 5)^2 from eps0 = 1") {
  const double target = std::log(5.0);
  const auto obj = from([target](double e) { return std::pow(std::log(e) - target, 2); });
  const GdSpec gd;
  const TuneResult r = gradient_descent(obj, 1.0, gd);
  CHECK(std::abs(r.epsilon_star - 5.0) / 5.0 <= 1e-4);
  CHECK(r.iterations <= 100);
  CHECK(r.evaluations <= gd.evaluation_budget());
  CHECK(r.objective_star == min_valid(r));
  for (std::size_t i = 1; i < r.accepted_objectives.size(); ++i) {
    CHECK(r.accepted_objectives[i] < r.accepted_objectives[i - 1]);
  }
  for (const auto& p : r.trace) CHECK(p.epsilon > 0.0);
}

TEST_CASE("gradient descent stops immediately at a stationary start") {
  const auto obj = from([](double e) { return std::pow(std::log(e) - std::log(3.0), 2); });
  const TuneResult r = gradient_descent(obj, 3.0, GdSpec{});
  CHECK(r.epsilon_star == 3.0);
  CHECK(r.iterations == 0);
  CHECK(r.evaluations == 3);
  CHECK(r.stop == GdStop::GradientTolerance);
}

TEST_CASE("gradient descent stays inside a masked valid region") {
  const double eps0 = 2.0;
  // Minimum far to the right of the valid window [1.8, 2.2].
  const Objective obj = [eps0](double e) {
    if (e < 0.9 * eps0 || e > 1.1 * eps0) return scalar(e, std::nullopt);
    return scalar(e, std::pow(std::log(e) - std::log(50.0), 2));
  };
  const TuneResult r = gradient_descent(obj, eps0, GdSpec{});
  CHECK(r.epsilon_star >= 0.9 * eps0);
  CHECK(r.epsilon_star <= 1.1 * eps0);
  CHECK(r.objective_star <= *obj(eps0).objective);
  CHECK(r.epsilon_star > eps0);
  CHECK(r.evaluations <= GdSpec{}.evaluation_budget());
}

TEST_CASE("gradient descent rejects an invalid start") {
  const Objective obj = [](double e) { return scalar(e, std::nullopt); };
  try {
    gradient_descent(obj, 1.0, GdSpec{});
    FAIL("expected InvalidStart");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidStart);
  }
  CHECK_THROWS_AS(gradient_descent(from([](double) { return 1.0; }), -1.0, GdSpec{}), Error);
}

TEST_CASE("gradient descent respects the evaluation budget") {
  // Rugged objective that keeps the run busy.
  const auto obj = from([](double e) { return std::sin(40.0 * std::log(e)) + 0.01 * std::log(e) * std::log(e); });
  for (int iters : {1, 5, 20}) {
    GdSpec gd;
    gd.max_iters = iters;
    const TuneResult r = gradient_descent(obj, 1.7, gd);
    CHECK(r.evaluations <= static_cast<long>(iters) * (2 + gd.max_retries + 1));
    CHECK(r.evaluations >= 1);
    CHECK(r.objective_star == min_valid(r));
    CHECK(r.objective_star <= *obj(1.7).objective);
  }
}

TEST_CASE("finite-difference gradient matches the exact derivative") {
  const double c = 0.7;
  const auto l = [c](double e) { return std::pow(std::log(e) - c, 2); };
  for (double eps = 0.1; eps <= 10.0; eps *= 1.6) {
    const double h = std::max(1e-8, 1e-8 * eps);
    const double fd = (l(eps + h) - l(eps - h)) / (2.0 * h);
    const double exact = 2.0 * (std::log(eps) - c) / eps;
    CHECK(std::abs(fd - exact) <= 1e-4 * std::abs(exact));
  }
}

TEST_CASE("grid and gradient descent agree on a benign objective") {
  const auto obj = from([](double e) { return std::pow(std::log(e) - std::log(12.0), 2) + 0.5; });
  const TuneResult grid = grid_search(obj, GridSpec{});
  const TuneResult gd = gradient_descent(obj, 2.0, GdSpec{});
  const double spacing = (grid.refine_grid.back() - grid.refine_grid.front()) / 49.0;
  CHECK(std::abs(grid.epsilon_star - gd.epsilon_star) <= spacing);
}

TEST_CASE("initial_epsilon formulas") {
  SUBCASE("1D") {
    PointMatrix p(100, 1);
    for (Index i = 0; i < 100; ++i) p(i, 0) = static_cast<double>(i) / 99.0;
    CHECK(initial_epsilon(NodeSet(p), 1) == doctest::Approx(8.0).epsilon(1e-14));
  }
  SUBCASE("2D with corners") {
    PointMatrix p = oracle::random_points(16, 2, 3);
    p.row(0) << 0.0, 0.0;
    p.row(1) << 1.0, 1.0;
    p.row(2) << 0.0, 1.0;
    p.row(3) << 1.0, 0.0;
    CHECK(initial_epsilon(NodeSet(p), 1) == doctest::Approx(0.8 * 2.0 / std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("3D median of the sampled pairs") {
    const PointMatrix p = oracle::random_points(1000, 3, 99);
    const NodeSet nodes(p);
    CHECK(initial_epsilon(nodes, 5) == doctest::Approx(1.0 / (oracle::median_pairwise(p) + 1e-8)).epsilon(1e-14));
  }
  SUBCASE("3D subsample uses min(N, 1000) points") {
    const NodeSet nodes(oracle::random_points(1500, 3, 4));
    const double a = initial_epsilon(nodes, 5);
    CHECK(a == initial_epsilon(nodes, 5));
    CHECK(a > 0.0);
  }
}

TEST_CASE("point_set_diameter matches brute force") {
  const PointMatrix p = oracle::random_points(300, 2, 8);
  double best = 0.0;
  for (Index i = 0; i < 300; ++i) {
    for (Index j = i + 1; j < 300; ++j) best = std::max(best, oracle::scalar_distance(p, i, p, j));
  }
  CHECK(point_set_diameter(NodeSet(p)) == best);
}

TEST_CASE("tuning a real LOOCV objective") {
  const NodeSet nodes = make_nodes(1, 64, NodeScheme::Uniform, 12);
  const Eigen::VectorXd f = eval_function(test_function("f1"), nodes.points());
  const Objective obj = [&](double eps) {
    return loocv_full_closed_form(nodes, f, {RbfFamily::InverseMultiquadric, eps, 1e-14});
  };
  const TuneResult grid = grid_search(obj, GridSpec{});
  CHECK(grid.objective_star == min_valid(grid));
  const TuneResult gd = gradient_descent(obj, initial_epsilon(nodes, 0), GdSpec{}, TuneMethod::GdFull);
  CHECK(gd.objective_star <= *obj(initial_epsilon(nodes, 0)).objective);
  CHECK(gd.objective_star == min_valid(gd));
}

#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "rbftune/error.hpp"
#include "rbftune/kernel.hpp"
#include "rbftune/linalg.hpp"
#include "rbftune/testbed.hpp"

using namespace rbftune;

namespace {

NodeSet line_nodes(std::initializer_list<double> xs) {
  PointMatrix p(static_cast<Index>(xs.size()), 1);
  Index i = 0;
  for (double x : xs) p(i++, 0) = x;
  return NodeSet(p);
}

KernelSpec imq(double eps, double jitter = 0.0) { return {RbfFamily::InverseMultiquadric, eps, jitter}; }

}  // namespace

TEST_CASE("imq_phi closed-form values") {
  CHECK(imq_phi(0.0, 7.3) == 1.0);
  CHECK(imq_phi(1.0, 1.0) == doctest::Approx(0.7071067811865476).epsilon(1e-15));
  CHECK(imq_phi(2.0, 0.5) == imq_phi(1.0, 1.0));
  for (double r = 0.0; r < 3.0; r += 0.25) CHECK(imq_phi(r + 0.25, 2.0) < imq_phi(r, 2.0));
}

TEST_CASE("NodeSet validation") {
  CHECK_THROWS_AS(line_nodes({0.1, 1.5}), Error);
  try {
    line_nodes({0.25, 0.5, 0.25 + 1e-13});
    FAIL("duplicate accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DuplicateNode);
  }
  PointMatrix four_d(3, 4);
  four_d.setConstant(0.5);
  CHECK_THROWS_AS(static_cast<void>(NodeSet(four_d)), Error);
  CHECK_NOTHROW(line_nodes({0.25, 0.5, 0.25 + 1e-9}));
}

TEST_CASE("KernelSpec validation") {
  CHECK_THROWS_AS(imq(0.0).validate(), Error);
  CHECK_THROWS_AS(imq(1.0, -1e-3).validate(), Error);
  CHECK_NOTHROW(imq(1.0, 0.0).validate());
}

TEST_CASE("assemble_full small cases") {
  SUBCASE("single node") {
    const auto a = assemble_full(line_nodes({0.3}), imq(2.0, 1e-3));
    REQUIRE(a.rows() == 1);
    CHECK(a(0, 0) == 1.0 + 1e-3);
  }
  SUBCASE("two nodes") {
    const auto a = assemble_full(line_nodes({0.2, 0.7}), imq(3.0));
    const double phi = imq_phi(0.5, 3.0);
    CHECK(a(0, 0) == 1.0);
    CHECK(a(1, 1) == 1.0);
    CHECK(a(0, 1) == phi);
    CHECK(a(1, 0) == phi);
  }
}

TEST_CASE("assemble_full matches the double-loop oracle exactly") {
  const PointMatrix x = oracle::random_points(5, 2, 11);
  const NodeSet nodes(x);
  const auto a = assemble_full(nodes, imq(4.2, 1e-10));
  const auto ref = oracle::kernel_double_loop(x, 4.2, 1e-10);
  CHECK((a - ref).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("assemble_full invariants: symmetry, diagonal, monotone in epsilon") {
  const NodeSet nodes(oracle::random_points(40, 3, 5));
  const auto lo = assemble_full(nodes, imq(1.0, 1e-10));
  const auto hi = assemble_full(nodes, imq(1.5, 1e-10));
  CHECK(lo == lo.transpose());
  for (Index i = 0; i < lo.rows(); ++i) {
    CHECK(lo(i, i) == 1.0 + 1e-10);
    for (Index j = 0; j < lo.cols(); ++j) {
      if (i == j) continue;
      CHECK(lo(i, j) > 0.0);
      CHECK(lo(i, j) < 1.0);
      CHECK(hi(i, j) < lo(i, j));
    }
  }
}

TEST_CASE("assemble_reduced") {
  const NodeSet nodes(oracle::random_points(40, 2, 17));
  const auto spec = imq(3.0, 1e-6);
  const auto a = assemble_full(nodes, imq(3.0, 0.0));

  SUBCASE("all nodes as landmarks reproduces A") {
    std::vector<Index> all(40);
    for (Index i = 0; i < 40; ++i) all[static_cast<std::size_t>(i)] = i;
    const auto r = assemble_reduced(nodes, all, spec);
    CHECK((r.c - a).cwiseAbs().maxCoeff() == 0.0);
    CHECK((r.w - a).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single landmark") {
    const std::vector<Index> one = {7};
    const auto r = assemble_reduced(nodes, one, spec);
    CHECK(r.w.rows() == 1);
    CHECK(r.w(0, 0) == 1.0);
    CHECK((r.c.col(0) - a.col(7)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("columns and W are sub-blocks of A") {
    const std::vector<Index> idx = {3, 11, 0, 25, 39, 8, 14, 30};
    const auto r = assemble_reduced(nodes, idx, spec);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      CHECK((r.c.col(static_cast<Index>(j)) - a.col(idx[j])).cwiseAbs().maxCoeff() == 0.0);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        CHECK(r.w(static_cast<Index>(i), static_cast<Index>(j)) == a(idx[i], idx[j]));
      }
    }
    // Nystrom product via explicit small inverse.
    const Eigen::MatrixXd approx_oracle = r.c * r.w.inverse() * r.c.transpose();
    const Eigen::MatrixXd approx = r.c * r.w.llt().solve(r.c.transpose());
    CHECK((approx - approx_oracle).norm() / approx_oracle.norm() <= 1e-10);
  }
  SUBCASE("duplicate and out-of-range landmarks") {
    const std::vector<Index> dup = {1, 2, 1};
    try {
      assemble_reduced(nodes, dup, spec);
      FAIL("duplicate landmark accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DuplicateLandmark);
    }
    const std::vector<Index> bad = {40};
    CHECK_THROWS_AS(assemble_reduced(nodes, bad, spec), Error);
  }
}

TEST_CASE("Nystrom with every node as a landmark reproduces A") {
  for (Index n : {8, 32, 64}) {
    const NodeSet nodes(oracle::random_points(n, 2, static_cast<std::uint64_t>(n)));
    const auto spec = imq(6.0);
    std::vector<Index> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    const auto r = assemble_reduced(nodes, all, spec);
    const Eigen::MatrixXd approx = r.c * SymmetricSolver(r.w).solve_columns(r.c.transpose());
    const auto a = assemble_full(nodes, spec);
    CHECK((approx - a).norm() / a.norm() <= 1e-8);
  }
}

TEST_CASE("fit") {
  SUBCASE("single node") {
    const auto model = fit(line_nodes({0.4}), Eigen::VectorXd::Constant(1, 3.0), imq(2.0, 0.5));
    CHECK(model.coefficients()(0) == doctest::Approx(3.0 / 1.5));
  }
  SUBCASE("column of the system matrix gives a unit vector") {
    const NodeSet nodes(oracle::random_points(12, 2, 3));
    const auto spec = imq(8.0, 1e-10);
    const auto a = assemble_full(nodes, spec);
    for (Index k : {0, 5, 11}) {
      const auto model = fit(nodes, a.col(k), spec);
      Eigen::VectorXd e = Eigen::VectorXd::Zero(12);
      e(k) = 1.0;
      CHECK((model.coefficients() - e).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
  SUBCASE("Runge data, N = 50, eps = 5") {
    const NodeSet nodes = make_nodes(1, 50, NodeScheme::Uniform, 9);
    const Eigen::VectorXd f = eval_function(test_function("f2"), nodes.points());
    const auto spec = imq(5.0, 0.0);
    const auto model = fit(nodes, f, spec);
    const Eigen::VectorXd residual = oracle::kernel_double_loop(nodes.points(), 5.0, 0.0) * model.coefficients() - f;
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(fit(line_nodes({0.1, 0.2}), Eigen::VectorXd::Ones(3), imq(1.0)), Error);
  }
}

TEST_CASE("SymmetricSolver falls back to LU and reports singular systems") {
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  const SymmetricSolver s(indefinite);
  CHECK_FALSE(s.used_cholesky());
  const Eigen::VectorXd x = s.solve(Eigen::VectorXd::Ones(2));
  CHECK((indefinite * x - Eigen::VectorXd::Ones(2)).norm() <= 1e-14);
  CHECK((s.inverse_diagonal() - indefinite.inverse().diagonal()).norm() <= 1e-14);

  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(3, 3);
  try {
    SymmetricSolver bad(singular);
    FAIL("singular matrix accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SingularSystem);
  }
}

TEST_CASE("evaluate") {
  const NodeSet nodes(oracle::random_points(20, 1, 21));
  const auto spec = imq(4.0, 0.0);

  SUBCASE("interpolates at training nodes") {
    const Eigen::VectorXd f = eval_function(test_function("f1"), nodes.points());
    const auto model = fit(nodes, f, spec);
    CHECK((evaluate(model, nodes.points()) - f).cwiseAbs().maxCoeff() <= 1e-6);
  }
  SUBCASE("zero coefficients give zero") {
    const InterpolantModel model(nodes, spec, Eigen::VectorXd::Zero(20));
    CHECK(evaluate(model, oracle::random_points(10, 1, 2)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("matches double-loop summation") {
    Rng rng(99);
    Eigen::VectorXd coef(20);
    for (Index i = 0; i < 20; ++i) coef(i) = rng.uniform() - 0.5;
    const PointMatrix q = oracle::random_points(100, 1, 4);
    const InterpolantModel model(nodes, spec, coef);
    const Eigen::VectorXd s = evaluate(model, q);
    const Eigen::VectorXd ref = oracle::evaluate_double_loop(nodes.points(), coef, 4.0, q);
    CHECK((s - ref).norm() / ref.norm() <= 1e-12);
  }
  SUBCASE("linear in the coefficients") {
    Rng rng(7);
    Eigen::VectorXd a(20), b(20);
    for (Index i = 0; i < 20; ++i) {
      a(i) = rng.uniform() - 0.5;
      b(i) = rng.uniform() - 0.5;
    }
    const PointMatrix q = oracle::random_points(30, 1, 8);
    const Eigen::VectorXd sa = evaluate(InterpolantModel(nodes, spec, a), q);
    const Eigen::VectorXd sb = evaluate(InterpolantModel(nodes, spec, b), q);
    const Eigen::VectorXd sab = evaluate(InterpolantModel(nodes, spec, 2.0 * a - 3.0 * b), q);
    CHECK((sab - (2.0 * sa - 3.0 * sb)).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("dimension mismatch") {
    const InterpolantModel model(nodes, spec, Eigen::VectorXd::Zero(20));
    try {
      evaluate(model, oracle::random_points(3, 2, 1));
      FAIL("dimension mismatch accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DimensionMismatch);
    }
  }
}

TEST_CASE("rms_error") {
  const NodeSet nodes(oracle::random_points(6, 1, 3));
  const InterpolantModel zero(nodes, imq(2.0), Eigen::VectorXd::Zero(6));
  const PointMatrix q = oracle::random_points(9, 1, 4);
  CHECK(rms_error(zero, q, Eigen::VectorXd::Zero(9)) == 0.0);
  CHECK(rms_error(zero, q.topRows(1), Eigen::VectorXd::Constant(1, -0.3)) == doctest::Approx(0.3));
  CHECK(rms_error(zero, q, Eigen::VectorXd::Constant(9, 0.125)) == doctest::Approx(0.125).epsilon(1e-15));
  try {
    rms_error(zero, PointMatrix(0, 1), Eigen::VectorXd(0));
    FAIL("empty test set accepted");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyTestSet);
  }
}

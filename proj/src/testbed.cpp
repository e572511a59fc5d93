#include "rbftune/testbed.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rbftune/error.hpp"
#include "rbftune/random.hpp"

namespace rbftune {
namespace {

using std::numbers::pi;

double f1(const double* x) { return std::exp(std::sin(pi * x[0])); }

double f2(const double* x) { return 1.0 / (1.0 + 16.0 * x[0] * x[0]); }

// Both factors vanish at 0 and 1 and are symmetric about 0.5.
double f3_factor(double t) { return 1.0 + std::exp(-1.0) - std::exp(-t) - std::exp(t - 1.0); }
double f3(const double* x) { return f3_factor(x[0]) * f3_factor(x[1]); }

double f4_factor(double t) {
  return 1.0 + std::exp(-1.0 / 0.1) - std::exp(-t / 0.1) - std::exp((t - 1.0) / 0.1);
}
double f4(const double* x) { return f4_factor(x[0]) * f4_factor(x[1]); }

// Franke's function.
double f5(const double* x) {
  const double a = 9.0 * x[0];
  const double b = 9.0 * x[1];
  return 0.75 * std::exp(-((a - 2.0) * (a - 2.0) + (b - 2.0) * (b - 2.0)) / 4.0) +
         0.75 * std::exp(-(a + 1.0) * (a + 1.0) / 49.0 - (b + 1.0) / 10.0) +
         0.5 * std::exp(-((a - 7.0) * (a - 7.0) + (b - 3.0) * (b - 3.0)) / 4.0) -
         0.2 * std::exp(-(a - 4.0) * (a - 4.0) - (b - 7.0) * (b - 7.0));
}

double f6(const double*) { return 1.0; }

double f7(const double* x) {
  return std::sin(x[0] * x[0] + 2.0 * x[1] * x[1]) -
         std::sin(2.0 * x[0] * x[0] + (x[1] - 0.5) * (x[1] - 0.5) + x[2] * x[2]);
}

double f8(const double* x) {
  return std::sin(2.0 * pi * (x[0] * x[0] + 2.0 * x[1] * x[1])) -
         std::sin(2.0 * pi * (2.0 * x[0] * x[0] + (x[1] - 0.5) * (x[1] - 0.5) + x[2] * x[2]));
}

constexpr std::uint64_t kTestPointSalt = 0x7465737470747321ULL;

}  // namespace

const std::vector<TestFunction>& all_test_functions() {
  static const std::vector<TestFunction> functions = {
      {TestFunctionId::F1, "f1", 1, &f1}, {TestFunctionId::F2, "f2", 1, &f2},
      {TestFunctionId::F3, "f3", 2, &f3}, {TestFunctionId::F4, "f4", 2, &f4},
      {TestFunctionId::F5, "f5", 2, &f5}, {TestFunctionId::F6, "f6", 3, &f6},
      {TestFunctionId::F7, "f7", 3, &f7}, {TestFunctionId::F8, "f8", 3, &f8},
  };
  return functions;
}

const TestFunction& test_function(std::string_view name) {
  for (const auto& f : all_test_functions()) {
    if (f.name == name) return f;
  }
  throw Error(Errc::InvalidArgument, "unknown test function '" + std::string(name) + "'");
}

const TestFunction& test_function(TestFunctionId id) {
  return all_test_functions()[static_cast<std::size_t>(id)];
}

Eigen::VectorXd eval_function(const TestFunction& f, const PointMatrix& points) {
  if (points.cols() != f.dim) {
    throw Error(Errc::DimensionMismatch, std::string(f.name) + " expects " + std::to_string(f.dim) +
                                             "D points, got " + std::to_string(points.cols()) + "D");
  }
  Eigen::VectorXd out(points.rows());
  double x[3] = {0.0, 0.0, 0.0};
  for (Index i = 0; i < points.rows(); ++i) {
    for (int k = 0; k < f.dim; ++k) x[k] = points(i, k);
    out(i) = f.evaluator(x);
  }
  return out;
}

std::string_view node_scheme_name(NodeScheme scheme) noexcept {
  return scheme == NodeScheme::Uniform ? "uniform" : "cosine";
}

NodeScheme default_node_scheme(int dim) noexcept {
  return dim >= 3 ? NodeScheme::CosineMapped : NodeScheme::Uniform;
}

double cosine_map(double x) noexcept { return 0.5 * (1.0 - std::cos(pi * x)); }

NodeSet make_nodes(int dim, Index n, NodeScheme scheme, std::uint64_t seed) {
  if (dim < 1 || dim > 3) throw Error(Errc::InvalidArgument, "dimension must be 1, 2 or 3");
  if (n < 2) throw Error(Errc::InvalidArgument, "need at least two nodes");
  Rng rng(seed);
  PointMatrix p(n, dim);
  for (Index i = 0; i < n; ++i) {
    for (int k = 0; k < dim; ++k) {
      const double u = rng.uniform();
      p(i, k) = scheme == NodeScheme::CosineMapped ? cosine_map(u) : u;
    }
  }
  std::string id = std::to_string(dim) + "d-" + std::string(node_scheme_name(scheme)) + "-n" +
                   std::to_string(n) + "-s" + std::to_string(seed);
  return NodeSet(std::move(p), std::move(id));
}

PointMatrix test_points(const TestFunction& f, Index n_test) {
  if (n_test < 1) throw Error(Errc::EmptyTestSet, "test set size must be positive");
  Rng rng(mix_seed(kTestPointSalt, fnv1a(f.name)));
  PointMatrix p(n_test, f.dim);
  for (Index i = 0; i < n_test; ++i) {
    for (int k = 0; k < f.dim; ++k) p(i, k) = rng.uniform();
  }
  return p;
}

void ExperimentDesign::validate() const {
  if (function == nullptr) throw Error(Errc::InvalidArgument, "experiment has no test function");
  if (n_test < 1) throw Error(Errc::InvalidArgument, "n_test must be positive");
  for (std::size_t i = 1; i < train_sizes.size(); ++i) {
    if (train_sizes[i] < train_sizes[i - 1]) {
      throw Error(Errc::InvalidArgument, "train sizes must be sorted ascending");
    }
  }
}

}  // namespace rbftune

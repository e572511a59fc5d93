#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "rbftune/kernel.hpp"

namespace rbftune {

enum class TestFunctionId { F1, F2, F3, F4, F5, F6, F7, F8 };

struct TestFunction {
  TestFunctionId id;
  std::string_view name;
  int dim;
  double (*evaluator)(const double* x);
};

const std::vector<TestFunction>& all_test_functions();
/// Lookup by name ("f1" ... "f8"); throws InvalidArgument for unknown names.
const TestFunction& test_function(std::string_view name);
const TestFunction& test_function(TestFunctionId id);

/// Evaluates f at each row of `points`. Throws DimensionMismatch.
Eigen::VectorXd eval_function(const TestFunction& f, const PointMatrix& points);

enum class NodeScheme { Uniform, CosineMapped };

std::string_view node_scheme_name(NodeScheme scheme) noexcept;
NodeScheme default_node_scheme(int dim) noexcept;

/// x -> 0.5 (1 - cos(pi x)).
double cosine_map(double x) noexcept;

/// n i.i.d. uniform points on [0,1]^dim, optionally cosine-mapped per coordinate.
NodeSet make_nodes(int dim, Index n, NodeScheme scheme, std::uint64_t seed);

/// Fixed uniform test points for a function: the seed depends only on the
/// function name, so every experiment on that function shares them.
PointMatrix test_points(const TestFunction& f, Index n_test = 5000);

struct ExperimentDesign {
  const TestFunction* function = nullptr;
  std::vector<Index> train_sizes;
  Index n_test = 5000;
  NodeScheme node_scheme = NodeScheme::Uniform;
  std::uint64_t seed = 0;

  void validate() const;
};

inline const std::vector<Index> kFullTrainSizes = {64, 128, 256, 512, 1024, 2048, 4096};
inline const std::vector<Index> kNystromTrainSizes = {512, 1024, 2048, 4096};

}  // namespace rbftune

#pragma once

#include <cmath>
#include <span>
#include <string>

#include <Eigen/Core>

namespace rbftune {

using Index = Eigen::Index;

/// Points are stored one per row: an N x d matrix with d in {1, 2, 3}.
using PointMatrix = Eigen::MatrixXd;

/// Ordered interpolation nodes in [0,1]^d.
///
/// Construction validates the coordinate range and rejects any pair of points
/// closer than kDuplicateTolerance, since such pairs make the kernel matrix
/// singular.
class NodeSet {
 public:
  static constexpr double kDuplicateTolerance = 1e-12;

  NodeSet(PointMatrix points, std::string id = {});

  int dim() const noexcept { return static_cast<int>(points_.cols()); }
  Index size() const noexcept { return points_.rows(); }
  const PointMatrix& points() const noexcept { return points_; }
  const std::string& id() const noexcept { return id_; }

  auto point(Index i) const { return points_.row(i); }

 private:
  PointMatrix points_;
  std::string id_;
};

enum class RbfFamily { InverseMultiquadric };

struct KernelSpec {
  RbfFamily family = RbfFamily::InverseMultiquadric;
  double epsilon = 1.0;
  double jitter = 0.0;

  /// Throws InvalidArgument unless epsilon > 0 and jitter >= 0 (both finite).
  void validate() const;
};

/// Inverse multiquadric 1/sqrt(1 + (eps r)^2).
inline double imq_phi(double r, double epsilon) noexcept {
  const double s = epsilon * r;
  return 1.0 / std::sqrt(1.0 + s * s);
}

double rbf_phi(RbfFamily family, double r, double epsilon) noexcept;

/// Plain Euclidean distance between two rows.
template <typename A, typename B>
double distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  double sum = 0.0;
  for (Index k = 0; k < a.size(); ++k) {
    const double diff = a(k) - b(k);
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

/// Dense N x N kernel matrix with jitter on the diagonal. Built from the lower
/// triangle and mirrored, so the result is exactly symmetric.
Eigen::MatrixXd assemble_full(const NodeSet& nodes, const KernelSpec& spec);

struct ReducedKernel {
  Eigen::MatrixXd c;  ///< N x m, kernel between every node and each landmark
  Eigen::MatrixXd w;  ///< m x m, kernel among landmarks (no jitter)
};

ReducedKernel assemble_reduced(const NodeSet& nodes, std::span<const Index> landmark_indices,
                               const KernelSpec& spec);

class InterpolantModel {
 public:
  InterpolantModel(NodeSet nodes, KernelSpec spec, Eigen::VectorXd coefficients);

  const NodeSet& nodes() const noexcept { return nodes_; }
  const KernelSpec& spec() const noexcept { return spec_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }

  /// ||(A + jitter I) lambda - f||_2 / ||f||_2 measured right after the solve.
  double training_residual() const noexcept { return training_residual_; }
  void set_training_residual(double r) noexcept { training_residual_ = r; }

 private:
  NodeSet nodes_;
  KernelSpec spec_;
  Eigen::VectorXd coefficients_;
  double training_residual_ = 0.0;
};

/// Solves (A + jitter I) lambda = f. Cholesky first, pivoted LU if that fails.
InterpolantModel fit(const NodeSet& nodes, const Eigen::VectorXd& values, const KernelSpec& spec);

Eigen::VectorXd evaluate(const InterpolantModel& model, const PointMatrix& query_points);

double rms_error(const InterpolantModel& model, const PointMatrix& test_points,
                 const Eigen::VectorXd& true_values);

}  // namespace rbftune

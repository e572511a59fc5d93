#pragma once

#include <chrono>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "rbftune/kernel.hpp"
#include "rbftune/landmarks.hpp"

namespace rbftune {

enum class LoocvMethod { NaiveOracle, FullClosedForm, NystromWoodbury };

std::string_view loocv_method_name(LoocvMethod method) noexcept;

/// Leave-one-out residuals E and the objective L = sum E_k^2.
///
/// `objective` is empty when the evaluation is invalid: a singular solve, a
/// non-positive inverse diagonal on the Nystrom path, or any non-finite
/// residual. Invalid evaluations are values, not exceptions, so optimizers can
/// reject them and backtrack.
struct LoocvEvaluation {
  double epsilon = 0.0;
  std::optional<double> objective;
  Eigen::VectorXd residuals;
  LoocvMethod method = LoocvMethod::FullClosedForm;
  std::chrono::nanoseconds wall_time{0};

  bool valid() const noexcept { return objective.has_value(); }

  /// Builds an evaluation from residuals, marking it invalid if any residual
  /// or the sum of squares is not finite.
  static LoocvEvaluation from_residuals(double epsilon, Eigen::VectorXd residuals,
                                        LoocvMethod method);
  static LoocvEvaluation invalid(double epsilon, LoocvMethod method);
};

/// Refits on every N-1 subset. O(N^4); used as a test oracle.
LoocvEvaluation loocv_naive(const NodeSet& nodes, const Eigen::VectorXd& values,
                            const KernelSpec& spec);

/// E_k = (A_reg^-1 f)_k / (A_reg^-1)_kk with one factorization of A + jitter I.
LoocvEvaluation loocv_full_closed_form(const NodeSet& nodes, const Eigen::VectorXd& values,
                                       const KernelSpec& spec);

/// Intermediate quantities of the Woodbury-accelerated evaluation, exposed so
/// the implied inverse can be checked against a dense computation.
struct WoodburySolve {
  Eigen::VectorXd u;  ///< A~_reg^-1 f
  Eigen::VectorXd d;  ///< diag(A~_reg^-1)
};

/// Computes (u, d) for A~_reg = C W^-1 C^T + lambda_reg I with m x m solves
/// only. Uses W = L L^T to whiten C when W is numerically positive definite,
/// otherwise M = W + C^T C / lambda_reg. Throws SingularSystem if the m x m
/// system cannot be factorized.
WoodburySolve woodbury_solve(const ReducedKernel& reduced, const Eigen::VectorXd& values,
                             double lambda_reg);

/// Nystrom + Woodbury LOOCV: E_k = u_k / d_k. Cost O(N m^2 + m^3).
LoocvEvaluation loocv_nystrom(const NodeSet& nodes, const Eigen::VectorXd& values,
                              const LandmarkSet& landmarks, double epsilon, double lambda_reg);

}  // namespace rbftune

#pragma once

#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/LU>

namespace rbftune {

using Index = Eigen::Index;

/// Factorization of a symmetric system matrix. Tries LLT first; if the
/// Cholesky pivots break down it falls back to partial-pivot LU. Throws
/// Error(SingularSystem) when LU hits a zero or non-finite pivot too.
class SymmetricSolver {
 public:
  explicit SymmetricSolver(const Eigen::MatrixXd& a);

  bool used_cholesky() const noexcept { return llt_.has_value(); }
  Index size() const noexcept { return n_; }

  Eigen::MatrixXd solve_columns(const Eigen::MatrixXd& rhs) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// Solve followed by `steps` rounds of iterative refinement with the
  /// residual rhs - a x accumulated in long double. `a` must be the matrix
  /// this solver factorized. Recovers digits lost to cond(a) as long as
  /// cond(a) * 2^-53 < 1.
  Eigen::VectorXd solve_refined(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs,
                                int steps = 2) const;

  /// diag(A^-1) without forming A^-1 on the Cholesky path:
  /// (A^-1)_kk = ||L^-1 e_k||^2.
  Eigen::VectorXd inverse_diagonal() const;

 private:
  Index n_ = 0;
  std::optional<Eigen::LLT<Eigen::MatrixXd>> llt_;
  std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
};

}  // namespace rbftune

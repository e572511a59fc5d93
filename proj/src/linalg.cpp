#include "rbftune/linalg.hpp"

#include <algorithm>
#include <vector>

#include "rbftune/error.hpp"

namespace rbftune {

SymmetricSolver::SymmetricSolver(const Eigen::MatrixXd& a) : n_(a.rows()) {
  if (a.rows() != a.cols()) throw Error(Errc::DimensionMismatch, "system matrix is not square");
  if (!a.allFinite()) throw Error(Errc::SingularSystem, "system matrix has non-finite entries");

  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().allFinite()) {
    llt_.emplace(std::move(llt));
    return;
  }

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const auto pivots = lu.matrixLU().diagonal();
  for (Index i = 0; i < pivots.size(); ++i) {
    if (pivots(i) == 0.0 || !std::isfinite(pivots(i))) {
      throw Error(Errc::SingularSystem, "zero pivot in LU factorization");
    }
  }
  lu_.emplace(std::move(lu));
}

Eigen::MatrixXd SymmetricSolver::solve_columns(const Eigen::MatrixXd& rhs) const {
  if (rhs.rows() != n_) throw Error(Errc::DimensionMismatch, "right-hand side has wrong row count");
  return llt_ ? Eigen::MatrixXd(llt_->solve(rhs)) : Eigen::MatrixXd(lu_->solve(rhs));
}

Eigen::VectorXd SymmetricSolver::solve(const Eigen::VectorXd& rhs) const {
  if (rhs.size() != n_) throw Error(Errc::DimensionMismatch, "right-hand side has wrong length");
  return llt_ ? Eigen::VectorXd(llt_->solve(rhs)) : Eigen::VectorXd(lu_->solve(rhs));
}

Eigen::VectorXd SymmetricSolver::solve_refined(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs,
                                               int steps) const {
  if (a.rows() != n_ || a.cols() != n_) throw Error(Errc::DimensionMismatch, "matrix size changed");
  Eigen::VectorXd x = solve(rhs);
  std::vector<long double> r(static_cast<std::size_t>(n_));
  Eigen::VectorXd correction_rhs(n_);
  for (int step = 0; step < steps && x.allFinite(); ++step) {
    for (Index i = 0; i < n_; ++i) r[static_cast<std::size_t>(i)] = rhs(i);
    for (Index j = 0; j < n_; ++j) {
      const long double xj = x(j);
      const double* col = a.data() + j * n_;
      for (Index i = 0; i < n_; ++i) r[static_cast<std::size_t>(i)] -= col[i] * xj;
    }
    for (Index i = 0; i < n_; ++i) correction_rhs(i) = static_cast<double>(r[static_cast<std::size_t>(i)]);
    x += solve(correction_rhs);
  }
  return x;
}

Eigen::VectorXd SymmetricSolver::inverse_diagonal() const {
  if (llt_) {
    // Column block [j0, j0 + b) of L^-1 is zero above row j0, so each block
    // only needs the trailing triangle of L. About a third of the flops of a
    // full triangular solve against the identity.
    constexpr Index kBlock = 128;
    const auto& l = llt_->matrixLLT();
    Eigen::VectorXd diag(n_);
    Eigen::MatrixXd block;
    for (Index j0 = 0; j0 < n_; j0 += kBlock) {
      const Index b = std::min(kBlock, n_ - j0);
      const Index rows = n_ - j0;
      block.setZero(rows, b);
      block.topRows(b).setIdentity();
      l.bottomRightCorner(rows, rows).triangularView<Eigen::Lower>().solveInPlace(block);
      diag.segment(j0, b) = block.colwise().squaredNorm().transpose();
    }
    return diag;
  }
  return lu_->inverse().diagonal();
}

}  // namespace rbftune

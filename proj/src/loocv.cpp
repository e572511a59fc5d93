#include "rbftune/loocv.hpp"

#include <cmath>
#include <utility>

#include "rbftune/error.hpp"
#include "rbftune/linalg.hpp"

namespace rbftune {
namespace {

using Clock = std::chrono::steady_clock;

void check_inputs(const NodeSet& nodes, const Eigen::VectorXd& values) {
  if (nodes.size() < 2) throw Error(Errc::InvalidArgument, "leave-one-out needs at least two nodes");
  if (values.size() != nodes.size()) {
    throw Error(Errc::LengthMismatch, "value count does not match node count");
  }
}

LoocvEvaluation timed(LoocvEvaluation eval, Clock::time_point start) {
  eval.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
  return eval;
}

}  // namespace

std::string_view loocv_method_name(LoocvMethod method) noexcept {
  switch (method) {
    case LoocvMethod::NaiveOracle: return "naive";
    case LoocvMethod::FullClosedForm: return "full";
    case LoocvMethod::NystromWoodbury: return "nystrom";
  }
  return "unknown";
}

LoocvEvaluation LoocvEvaluation::from_residuals(double epsilon, Eigen::VectorXd residuals,
                                                LoocvMethod method) {
  LoocvEvaluation out;
  out.epsilon = epsilon;
  out.method = method;
  if (residuals.allFinite()) {
    const double l = residuals.squaredNorm();
    if (std::isfinite(l)) out.objective = l;
  }
  out.residuals = std::move(residuals);
  return out;
}

LoocvEvaluation LoocvEvaluation::invalid(double epsilon, LoocvMethod method) {
  LoocvEvaluation out;
  out.epsilon = epsilon;
  out.method = method;
  return out;
}

LoocvEvaluation loocv_naive(const NodeSet& nodes, const Eigen::VectorXd& values,
                            const KernelSpec& spec) {
  check_inputs(nodes, values);
  spec.validate();
  const auto start = Clock::now();
  const Index n = nodes.size();
  const int d = nodes.dim();
  Eigen::VectorXd residuals(n);

  PointMatrix reduced(n - 1, d);
  Eigen::VectorXd reduced_values(n - 1);
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0, r = 0; i < n; ++i) {
      if (i == k) continue;
      reduced.row(r) = nodes.point(i);
      reduced_values(r) = values(i);
      ++r;
    }
    try {
      const InterpolantModel model = fit(NodeSet(reduced), reduced_values, spec);
      const PointMatrix query = nodes.point(k);
      residuals(k) = values(k) - evaluate(model, query)(0);
    } catch (const Error& e) {
      if (e.code() != Errc::SingularSystem) throw;
      return timed(LoocvEvaluation::invalid(spec.epsilon, LoocvMethod::NaiveOracle), start);
    }
  }
  return timed(LoocvEvaluation::from_residuals(spec.epsilon, std::move(residuals),
                                               LoocvMethod::NaiveOracle),
               start);
}

LoocvEvaluation loocv_full_closed_form(const NodeSet& nodes, const Eigen::VectorXd& values,
                                       const KernelSpec& spec) {
  check_inputs(nodes, values);
  spec.validate();
  const auto start = Clock::now();
  try {
    const Eigen::MatrixXd a = assemble_full(nodes, spec);
    const SymmetricSolver solver(a);
    const Eigen::VectorXd lambda = solver.solve_refined(a, values);
    const Eigen::VectorXd inv_diag = solver.inverse_diagonal();
    if (!(inv_diag.array() != 0.0).all()) {
      return timed(LoocvEvaluation::invalid(spec.epsilon, LoocvMethod::FullClosedForm), start);
    }
    Eigen::VectorXd residuals = lambda.cwiseQuotient(inv_diag);
    return timed(LoocvEvaluation::from_residuals(spec.epsilon, std::move(residuals),
                                                 LoocvMethod::FullClosedForm),
                 start);
  } catch (const Error& e) {
    if (e.code() != Errc::SingularSystem) throw;
    return timed(LoocvEvaluation::invalid(spec.epsilon, LoocvMethod::FullClosedForm), start);
  }
}

WoodburySolve woodbury_solve(const ReducedKernel& reduced, const Eigen::VectorXd& values,
                             double lambda_reg) {
  if (!(lambda_reg > 0.0) || !std::isfinite(lambda_reg)) {
    throw Error(Errc::InvalidArgument, "lambda_reg must be strictly positive");
  }
  const auto& c = reduced.c;
  if (values.size() != c.rows()) throw Error(Errc::LengthMismatch, "value count != rows of C");

  const double inv_lambda = 1.0 / lambda_reg;
  WoodburySolve out;

  // Preferred path: with W = L L^T and B = C L^-T the identity becomes
  // A_reg^-1 = (I - B K^-1 B^T) / lambda, K = lambda I + B^T B. K is
  // bounded below by lambda, so this avoids squaring cond(W) the way
  // W + C^T C / lambda does.
  Eigen::LLT<Eigen::MatrixXd> w_llt(reduced.w);
  if (w_llt.info() == Eigen::Success && w_llt.matrixLLT().diagonal().allFinite()) {
    const Eigen::MatrixXd bt = w_llt.matrixL().solve(c.transpose());  // m x N
    Eigen::MatrixXd k = bt * bt.transpose();
    k.diagonal().array() += lambda_reg;
    const SymmetricSolver k_solver(k);
    const Eigen::MatrixXd g = k_solver.solve_columns(bt);  // K^-1 B^T
    out.u = inv_lambda * (values - bt.transpose() * (g * values));
    out.d = (inv_lambda * (1.0 - g.cwiseProduct(bt).colwise().sum().array())).matrix().transpose();
    return out;
  }

  // W not numerically positive definite: textbook form with M = W + C^T C / lambda.
  Eigen::MatrixXd m_matrix = reduced.w;
  m_matrix.noalias() += inv_lambda * (c.transpose() * c);
  m_matrix = (0.5 * (m_matrix + m_matrix.transpose())).eval();
  const SymmetricSolver solver(m_matrix);

  // T = C M^-1, obtained as (M^-1 C^T)^T since M is symmetric.
  const Eigen::MatrixXd t = solver.solve_columns(c.transpose()).transpose();

  const double inv_lambda2 = inv_lambda * inv_lambda;
  const Eigen::VectorXd ctf = c.transpose() * values;
  out.u = inv_lambda * values - inv_lambda2 * (t * ctf);
  out.d = (inv_lambda - inv_lambda2 * t.cwiseProduct(c).rowwise().sum().array()).matrix();
  return out;
}

LoocvEvaluation loocv_nystrom(const NodeSet& nodes, const Eigen::VectorXd& values,
                              const LandmarkSet& landmarks, double epsilon, double lambda_reg) {
  check_inputs(nodes, values);
  if (!(lambda_reg > 0.0) || !std::isfinite(lambda_reg)) {
    throw Error(Errc::InvalidArgument, "lambda_reg must be strictly positive");
  }
  const auto start = Clock::now();
  const KernelSpec spec{RbfFamily::InverseMultiquadric, epsilon, 0.0};
  const ReducedKernel reduced = assemble_reduced(nodes, landmarks.indices, spec);
  try {
    const WoodburySolve ws = woodbury_solve(reduced, values, lambda_reg);
    if (!ws.d.allFinite() || (ws.d.array() <= 0.0).any()) {
      return timed(LoocvEvaluation::invalid(epsilon, LoocvMethod::NystromWoodbury), start);
    }
    return timed(LoocvEvaluation::from_residuals(epsilon, ws.u.cwiseQuotient(ws.d),
                                                 LoocvMethod::NystromWoodbury),
                 start);
  } catch (const Error& e) {
    if (e.code() != Errc::SingularSystem) throw;
    return timed(LoocvEvaluation::invalid(epsilon, LoocvMethod::NystromWoodbury), start);
  }
}

}  // namespace rbftune

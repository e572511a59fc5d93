#include "rbftune/kernel.hpp"

#include <cmath>
#include <utility>

#include "rbftune/error.hpp"
#include "rbftune/linalg.hpp"

namespace rbftune {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DuplicateNode: return "DuplicateNode";
    case Errc::DuplicateLandmark: return "DuplicateLandmark";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::EmptyTestSet: return "EmptyTestSet";
    case Errc::TooManyLandmarks: return "TooManyLandmarks";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::AllEvaluationsInvalid: return "AllEvaluationsInvalid";
    case Errc::InvalidStart: return "InvalidStart";
    case Errc::NoValidRecords: return "NoValidRecords";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

NodeSet::NodeSet(PointMatrix points, std::string id) : points_(std::move(points)), id_(std::move(id)) {
  const Index n = points_.rows();
  const Index d = points_.cols();
  if (d < 1 || d > 3) throw Error(Errc::InvalidArgument, "node dimension must be 1, 2 or 3");
  if (n < 1) throw Error(Errc::InvalidArgument, "node set is empty");
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < d; ++k) {
      const double x = points_(i, k);
      if (!(x >= 0.0 && x <= 1.0)) {
        throw Error(Errc::InvalidArgument, "node coordinate outside [0,1] at row " + std::to_string(i));
      }
    }
  }
  // O(N^2) is fine for the sizes this library targets (N <= ~8192).
  for (Index i = 1; i < n; ++i) {
    for (Index j = 0; j < i; ++j) {
      if (distance(points_.row(i), points_.row(j)) < kDuplicateTolerance) {
        throw Error(Errc::DuplicateNode,
                    "nodes " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
      }
    }
  }
}

void KernelSpec::validate() const {
  if (!(std::isfinite(epsilon) && epsilon > 0.0)) {
    throw Error(Errc::InvalidArgument, "shape parameter must be positive and finite");
  }
  if (!(std::isfinite(jitter) && jitter >= 0.0)) {
    throw Error(Errc::InvalidArgument, "jitter must be non-negative and finite");
  }
}

double rbf_phi(RbfFamily family, double r, double epsilon) noexcept {
  switch (family) {
    case RbfFamily::InverseMultiquadric: return imq_phi(r, epsilon);
  }
  return imq_phi(r, epsilon);
}

Eigen::MatrixXd assemble_full(const NodeSet& nodes, const KernelSpec& spec) {
  spec.validate();
  const Index n = nodes.size();
  const auto& x = nodes.points();
  Eigen::MatrixXd a(n, n);
  for (Index j = 0; j < n; ++j) {
    a(j, j) = 1.0 + spec.jitter;
    for (Index i = j + 1; i < n; ++i) {
      const double v = rbf_phi(spec.family, distance(x.row(i), x.row(j)), spec.epsilon);
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return a;
}

ReducedKernel assemble_reduced(const NodeSet& nodes, std::span<const Index> landmark_indices,
                               const KernelSpec& spec) {
  spec.validate();
  const Index n = nodes.size();
  const Index m = static_cast<Index>(landmark_indices.size());
  if (m < 1) throw Error(Errc::InvalidArgument, "at least one landmark is required");

  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Index idx : landmark_indices) {
    if (idx < 0 || idx >= n) throw Error(Errc::InvalidArgument, "landmark index out of range");
    if (seen[static_cast<std::size_t>(idx)]) {
      throw Error(Errc::DuplicateLandmark, "landmark index " + std::to_string(idx) + " repeated");
    }
    seen[static_cast<std::size_t>(idx)] = true;
  }

  const auto& x = nodes.points();
  ReducedKernel out{Eigen::MatrixXd(n, m), Eigen::MatrixXd(m, m)};
  for (Index j = 0; j < m; ++j) {
    const Index lj = landmark_indices[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i) {
      out.c(i, j) = i == lj ? 1.0 : rbf_phi(spec.family, distance(x.row(i), x.row(lj)), spec.epsilon);
    }
  }
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      out.w(i, j) = out.c(landmark_indices[static_cast<std::size_t>(i)], j);
    }
  }
  return out;
}

InterpolantModel::InterpolantModel(NodeSet nodes, KernelSpec spec, Eigen::VectorXd coefficients)
    : nodes_(std::move(nodes)), spec_(spec), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != nodes_.size()) {
    throw Error(Errc::LengthMismatch, "coefficient count does not match node count");
  }
}

InterpolantModel fit(const NodeSet& nodes, const Eigen::VectorXd& values, const KernelSpec& spec) {
  if (values.size() != nodes.size()) {
    throw Error(Errc::LengthMismatch, "value count does not match node count");
  }
  const Eigen::MatrixXd a = assemble_full(nodes, spec);
  const SymmetricSolver solver(a);
  Eigen::VectorXd lambda = solver.solve_refined(a, values);
  if (!lambda.allFinite()) throw Error(Errc::SingularSystem, "interpolation coefficients not finite");

  const double fnorm = values.norm();
  const double rnorm = (a * lambda - values).norm();
  InterpolantModel model(nodes, spec, std::move(lambda));
  model.set_training_residual(fnorm > 0.0 ? rnorm / fnorm : rnorm);
  return model;
}

Eigen::VectorXd evaluate(const InterpolantModel& model, const PointMatrix& query_points) {
  const auto& x = model.nodes().points();
  if (query_points.cols() != x.cols()) {
    throw Error(Errc::DimensionMismatch, "query dimension " + std::to_string(query_points.cols()) +
                                             " != model dimension " + std::to_string(x.cols()));
  }
  const auto& lambda = model.coefficients();
  const auto& spec = model.spec();
  Eigen::VectorXd out(query_points.rows());
  for (Index q = 0; q < query_points.rows(); ++q) {
    double s = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
      s += lambda(i) * rbf_phi(spec.family, distance(query_points.row(q), x.row(i)), spec.epsilon);
    }
    out(q) = s;
  }
  return out;
}

double rms_error(const InterpolantModel& model, const PointMatrix& test_points,
                 const Eigen::VectorXd& true_values) {
  if (test_points.rows() == 0) throw Error(Errc::EmptyTestSet, "no test points");
  if (test_points.rows() != true_values.size()) {
    throw Error(Errc::LengthMismatch, "test point count does not match value count");
  }
  const Eigen::VectorXd diff = evaluate(model, test_points) - true_values;
  return std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
}

}  // namespace rbftune

#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the code paths it is meant to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rbftune/kernel.hpp"
#include "rbftune/random.hpp"

namespace rbftune::oracle {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

inline double scalar_imq(double r, double eps) { return 1.0 / std::sqrt(1.0 + (eps * r) * (eps * r)); }

inline double scalar_distance(const PointMatrix& p, Index i, const PointMatrix& q, Index j) {
  double s = 0.0;
  for (Index k = 0; k < p.cols(); ++k) {
    const double t = p(i, k) - q(j, k);
    s += t * t;
  }
  return std::sqrt(s);
}

/// Plain double loop over every entry, no symmetry shortcut.
inline Eigen::MatrixXd kernel_double_loop(const PointMatrix& x, double eps, double jitter) {
  const Index n = x.rows();
  Eigen::MatrixXd a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      a(i, j) = i == j ? 1.0 + jitter : scalar_imq(scalar_distance(x, i, x, j), eps);
    }
  }
  return a;
}

/// s(q) by direct summation, accumulated in long double.
inline Eigen::VectorXd evaluate_double_loop(const PointMatrix& x, const Eigen::VectorXd& coef,
                                            double eps, const PointMatrix& q) {
  Eigen::VectorXd out(q.rows());
  for (Index a = 0; a < q.rows(); ++a) {
    long double s = 0.0L;
    for (Index i = 0; i < x.rows(); ++i) s += coef(i) * scalar_imq(scalar_distance(q, a, x, i), eps);
    out(a) = static_cast<double>(s);
  }
  return out;
}

inline LMatrix to_long(const Eigen::MatrixXd& m) { return m.cast<long double>(); }

/// Dense inverse of C W^-1 C^T + lambda I, formed explicitly in extended precision.
inline LMatrix dense_nystrom_inverse(const Eigen::MatrixXd& c, const Eigen::MatrixXd& w, double lambda) {
  const LMatrix cl = to_long(c);
  const LMatrix winv = to_long(w).fullPivLu().inverse();
  LMatrix a = cl * winv * cl.transpose();
  a.diagonal().array() += static_cast<long double>(lambda);
  return a.fullPivLu().inverse();
}

/// Random points in [0,1]^d, well separated enough for tests.
inline PointMatrix random_points(Index n, int d, std::uint64_t seed) {
  Rng rng(seed);
  PointMatrix p(n, d);
  for (Index i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) p(i, k) = rng.uniform();
  }
  return p;
}

/// Median of all pairwise distances (exhaustive, sorts the full list).
inline double median_pairwise(const PointMatrix& p) {
  std::vector<double> d;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = i + 1; j < p.rows(); ++j) d.push_back(scalar_distance(p, i, p, j));
  }
  std::sort(d.begin(), d.end());
  const std::size_t h = d.size() / 2;
  return d.size() % 2 ? d[h] : 0.5 * (d[h - 1] + d[h]);
}

inline double max_rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a(i) - b(i)) / std::max(std::abs(b(i)), 1e-300));
  }
  return worst;
}

}  // namespace rbftune::oracle

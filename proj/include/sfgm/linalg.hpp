#pragma once

#include <Eigen/Dense>

#include "sfgm/errors.hpp"
#include "sfgm/rng.hpp"

namespace sfgm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Symmetric positive-definite matrix with a cached lower Cholesky factor.
/// Immutable after construction.
class SPDMatrix {
 public:
  explicit SPDMatrix(MatrixXd m);
  static SPDMatrix identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const MatrixXd& matrix() const { return m_; }
  const MatrixXd& cholesky() const { return chol_; }
  double operator()(int i, int j) const { return m_(i, j); }

  double log_det() const;
  MatrixXd inverse() const;
  VectorXd solve(const VectorXd& b) const;

 private:
  MatrixXd m_;
  MatrixXd chol_;
};

/// Lower L with L L^T = a. Validates symmetry (1e-12 relative) and positivity.
MatrixXd cholesky_lower(const MatrixXd& a);

/// Wishart draw in the rate parameterization: density proportional to
/// (det K)^{(delta-2)/2} exp(-<K,D>/2), i.e. the standard Wishart with
/// nu = delta + p - 1 degrees of freedom and scale D^{-1}.
SPDMatrix sample_wishart(double delta, const SPDMatrix& D, RngStream& rng);

/// Draw from N(mean, P^{-1}) given the lower Cholesky factor of the precision P.
VectorXd sample_mvn_precision(const VectorXd& mean, const MatrixXd& precision_chol,
                              RngStream& rng);

/// Draw from N(0, C) given the lower Cholesky factor of the covariance C.
VectorXd sample_mvn_covariance_chol(const MatrixXd& covariance_chol, RngStream& rng);

}  // namespace sfgm

#include "sfgm/linalg.hpp"

#include <cmath>

namespace sfgm {

namespace {

void check_symmetric(const MatrixXd& m, ErrorCode code, const char* where) {
  if (m.rows() != m.cols()) fail(ErrorCode::DimensionMismatch, std::string(where) + ": not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) fail(code, std::string(where) + ": matrix not symmetric");
}

}  // namespace

MatrixXd cholesky_lower(const MatrixXd& a) {
  check_symmetric(a, ErrorCode::NotPositiveDefinite, "cholesky");
  Eigen::LLT<MatrixXd> llt(0.5 * (a + a.transpose()));
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::NotPositiveDefinite, "cholesky: factorization failed");
  return llt.matrixL();
}

SPDMatrix::SPDMatrix(MatrixXd m) : m_(std::move(m)) {
  chol_ = cholesky_lower(m_);
  m_ = 0.5 * (m_ + m_.transpose().eval());
}

SPDMatrix SPDMatrix::identity(int dim) {
  return SPDMatrix(MatrixXd::Identity(dim, dim));
}

double SPDMatrix::log_det() const {
  return 2.0 * chol_.diagonal().array().log().sum();
}

MatrixXd SPDMatrix::inverse() const {
  const int p = dim();
  MatrixXd inv = chol_.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(p, p));
  inv = chol_.transpose().triangularView<Eigen::Upper>().solve(inv);
  return 0.5 * (inv + inv.transpose().eval());
}

VectorXd SPDMatrix::solve(const VectorXd& b) const {
  VectorXd y = chol_.triangularView<Eigen::Lower>().solve(b);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

SPDMatrix sample_wishart(double delta, const SPDMatrix& D, RngStream& rng) {
  if (!(delta > 2.0))
    fail(ErrorCode::InvalidDegreesOfFreedom, "sample_wishart: delta must exceed 2");
  const int p = D.dim();
  const double nu = delta + p - 1;
  // Bartlett factor A (lower triangular), A A^T ~ Wishart(nu, I).
  MatrixXd bart = MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    bart(i, i) = std::sqrt(rng.chi_squared(nu - i));
    for (int j = 0; j < i; ++j) bart(i, j) = rng.normal();
  }
  // With U = chol(D)^{-1} (lower), U^T U = D^{-1}, so B = U^T satisfies
  // B B^T = D^{-1} and B A A^T B^T ~ Wishart(nu, D^{-1}).
  MatrixXd u = D.cholesky().triangularView<Eigen::Lower>().solve(MatrixXd::Identity(p, p));
  MatrixXd root = u.transpose() * bart;
  MatrixXd k = root * root.transpose();
  return SPDMatrix(0.5 * (k + k.transpose().eval()));
}

VectorXd sample_mvn_precision(const VectorXd& mean, const MatrixXd& precision_chol,
                              RngStream& rng) {
  const int p = static_cast<int>(mean.size());
  VectorXd z(p);
  for (int i = 0; i < p; ++i) z(i) = rng.normal();
  // x = mean + L^{-T} z has covariance (L L^T)^{-1}.
  VectorXd shift = precision_chol.transpose().triangularView<Eigen::Upper>().solve(z);
  return mean + shift;
}

VectorXd sample_mvn_covariance_chol(const MatrixXd& covariance_chol, RngStream& rng) {
  const int p = static_cast<int>(covariance_chol.rows());
  VectorXd z(p);
  for (int i = 0; i < p; ++i) z(i) = rng.normal();
  return covariance_chol.triangularView<Eigen::Lower>() * z;
}

}  // namespace sfgm

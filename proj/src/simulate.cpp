#include "sfgm/fit.hpp"

namespace sfgm {

UndirectedGraph SimulationSpec::graph() const {
  const int p = static_cast<int>(K.rows());
  UndirectedGraph g(p);
  for (int v = 0; v < p; ++v)
    for (int w = v + 1; w < p; ++w)
      if (K(v, w) != 0.0) g.set_edge(v, w, true);
  return g;
}

SimulationSpec SimulationSpec::m1() {
  SimulationSpec s;
  s.alpha.resize(5);
  s.alpha << 0.1, 0.1, 0.1, -0.1, -0.1;
  s.lambda.resize(5);
  s.lambda << 0.8, 1.0, 1.2, 1.2, 0.8;
  s.K.resize(5, 5);
  s.K << 1.0, 0.5, 0.4, 0.0, 0.0,
         0.5, 1.0, 0.5, 0.0, 0.0,
         0.4, 0.5, 1.0, 0.0, 0.0,
         0.0, 0.0, 0.0, 1.0, 0.0,
         0.0, 0.0, 0.0, 0.0, 1.0;
  return s;
}

SimulationSpec SimulationSpec::m2() {
  SimulationSpec s;
  s.alpha.resize(5);
  s.alpha << 0.1, 0.1, 0.1, -0.1, -0.1;
  s.lambda.resize(5);
  s.lambda << 0.8, 1.0, 1.2, 1.2, 0.8;
  s.K.resize(5, 5);
  s.K << 1.0, 0.5, 0.0, 0.0, 0.4,
         0.5, 1.0, 0.5, 0.0, 0.0,
         0.0, 0.5, 1.0, 0.5, 0.0,
         0.0, 0.0, 0.5, 1.0, 0.5,
         0.4, 0.0, 0.0, 0.5, 1.0;
  return s;
}

MatrixXd simulate_dataset(const SimulationSpec& spec, int n, RngStream& rng) {
  const int p = static_cast<int>(spec.K.rows());
  if (spec.alpha.size() != p || spec.lambda.size() != p)
    fail(ErrorCode::DimensionMismatch, "simulate: alpha/lambda/K dims disagree");
  if (n < 1) fail(ErrorCode::InvalidParameter, "simulate: n must be positive");
  if (!is_identifiable(spec.graph()))
    fail(ErrorCode::NonIdentifiableGraph, "simulate: residual graph is not identifiable");
  const SPDMatrix K(spec.K);
  MatrixXd data(n, p);
  VectorXd z(p);
  for (int j = 0; j < n; ++j) {
    const double f = rng.normal();
    for (int v = 0; v < p; ++v) z(v) = rng.normal();
    const VectorXd resid =
        K.cholesky().transpose().triangularView<Eigen::Upper>().solve(z);
    data.row(j) = (spec.alpha + spec.lambda * f + resid).transpose();
  }
  return data;
}

}  // namespace sfgm

#include "sfgm/model.hpp"

#include <cmath>

namespace sfgm {

Hyperparams::Hyperparams(SPDMatrix rate) : D(std::move(rate)) {}

Hyperparams Hyperparams::standard(int p) {
  return Hyperparams(SPDMatrix::identity(p));
}

namespace {

void validate(const Hyperparams& h) {
  if (!(h.n0 > 0 && h.c > 0 && h.d > 0 && h.epsilon > 0))
    fail(ErrorCode::InvalidParameter, "hyperparams: n0, c, d, epsilon must be positive");
  if (!(h.delta > 2.0))
    fail(ErrorCode::InvalidDegreesOfFreedom, "hyperparams: delta must exceed 2");
}

// Permutation sending the pair (v, w) to the last two positions; the other
// vertices keep their relative order.
std::vector<int> pair_last_order(int p, int v, int w) {
  std::vector<int> order;
  order.reserve(p);
  for (int i = 0; i < p; ++i)
    if (i != v && i != w) order.push_back(i);
  order.push_back(v);
  order.push_back(w);
  return order;
}

MatrixXd permute(const MatrixXd& m, const std::vector<int>& order) {
  const int p = static_cast<int>(order.size());
  MatrixXd out(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) out(i, j) = m(order[i], order[j]);
  return out;
}

// Log of the conditional integral ratio (free edge vs constrained completion)
// for the last pair of a Cholesky factor phi under the given rate entries:
// log phi_qq + (1/2)(-log d_rr + d_rr m^2), m = -s/phi_qq + phi_qq d_qr/d_rr,
// s = sum_{k<q} phi_qk phi_rk. Uses only entries that the pair move holds fixed.
double log_edge_factor(const MatrixXd& phi, double rate_rr, double rate_qr) {
  const int p = static_cast<int>(phi.rows());
  double s = 0.0;
  for (int k = 0; k + 2 < p; ++k) s += phi(p - 2, k) * phi(p - 1, k);
  const double m = -s / phi(p - 2, p - 2) + phi(p - 2, p - 2) * rate_qr / rate_rr;
  return std::log(phi(p - 2, p - 2)) + 0.5 * (-std::log(rate_rr) + rate_rr * m * m);
}

}  // namespace

void idcbf_sweep(UndirectedGraph& G, SPDMatrix& K, const MatrixXd& residuals,
                 const Hyperparams& hyper, RngStream& rng, GraphRestriction restriction) {
  validate(hyper);
  const int p = G.p();
  if (K.dim() != p || hyper.D.dim() != p || residuals.cols() != p)
    fail(ErrorCode::DimensionMismatch, "idcbf_sweep: dimension mismatch");
  const int n = static_cast<int>(residuals.rows());
  const MatrixXd scatter = residuals.transpose() * residuals;
  const SPDMatrix post_rate(hyper.D.matrix() + scatter);
  const double post_df = hyper.delta + n;
  const GraphPrior prior{p};

  for (const auto& [v, w] : vertex_pairs(p)) {
    const UndirectedGraph proposal = G.flipped(v, w);
    if (restriction == GraphRestriction::Identifiable && !is_identifiable(proposal))
      continue;

    const auto order = pair_last_order(p, v, w);
    const MatrixXd phi = cholesky_lower(permute(K.matrix(), order));

    const SPDMatrix aux =
        sample_gwishart_direct(GWishartParams(hyper.delta, hyper.D, proposal), rng);
    const MatrixXd phi0 = cholesky_lower(permute(aux.matrix(), order));

    const double log_n_post =
        log_edge_factor(phi, post_rate(w, w), post_rate(v, w));
    const double log_n_prior =
        log_edge_factor(phi0, hyper.D(w, w), hyper.D(v, w));

    const double direction = G.has_edge(v, w) ? -1.0 : 1.0;
    const double log_accept = prior.log_prior(proposal) - prior.log_prior(G) +
                              direction * (log_n_post - log_n_prior);
    if (std::log(rng.uniform_pos()) < log_accept) G = proposal;

    K = sample_gwishart_direct(GWishartParams(post_df, post_rate, G), rng);
  }
}

SFGMState make_initial_state(const MatrixXd& data, const Hyperparams& hyper,
                             GraphRestriction restriction) {
  validate(hyper);
  const int p = static_cast<int>(data.cols());
  const int n = static_cast<int>(data.rows());
  if (hyper.D.dim() != p) fail(ErrorCode::DimensionMismatch, "initial state: D dim");
  UndirectedGraph g(p);
  if (restriction == GraphRestriction::Identifiable && !is_identifiable(g))
    fail(ErrorCode::NonIdentifiableStart,
         "no identifiable graph exists at p = " + std::to_string(p));
  SFGMState s{VectorXd::Zero(p), VectorXd::Ones(p), VectorXd::Zero(n),
              SPDMatrix::identity(p), g, hyper.d};
  if (n > 0) s.alpha = data.colwise().mean();
  return s;
}

void update_factors(SFGMState& state, const MatrixXd& data, RngStream& rng) {
  const VectorXd klambda = state.K.matrix() * state.lambda;
  const double prec = 1.0 + state.lambda.dot(klambda);
  const double sd = std::sqrt(1.0 / prec);
  for (int j = 0; j < state.n(); ++j) {
    const double loading = klambda.dot(data.row(j).transpose() - state.alpha);
    state.f(j) = rng.normal(loading / prec, sd);
  }
}

void update_alpha(SFGMState& state, const MatrixXd& data, const Hyperparams& hyper,
                  RngStream& rng) {
  const int p = state.p();
  const int n = state.n();
  const MatrixXd precision =
      n * state.K.matrix() + hyper.n0 * MatrixXd::Identity(p, p);
  const MatrixXd chol = cholesky_lower(precision);
  const VectorXd resid_sum =
      data.colwise().sum().transpose() - state.f.sum() * state.lambda;
  const VectorXd rhs = state.K.matrix() * resid_sum;
  VectorXd mean = chol.triangularView<Eigen::Lower>().solve(rhs);
  mean = chol.transpose().triangularView<Eigen::Upper>().solve(mean);
  state.alpha = sample_mvn_precision(mean, chol, rng);
}

void update_lambda(SFGMState& state, const MatrixXd& data, RngStream& rng) {
  if (!(state.Delta > 0)) fail(ErrorCode::InvalidParameter, "update_lambda: Delta <= 0");
  const double scale = 1.0 / state.Delta + state.f.squaredNorm();
  VectorXd weighted = VectorXd::Zero(state.p());
  for (int j = 0; j < state.n(); ++j)
    weighted += state.f(j) * (data.row(j).transpose() - state.alpha);
  const VectorXd mean = weighted / scale;
  const MatrixXd chol = std::sqrt(scale) * state.K.cholesky();
  state.lambda = sample_mvn_precision(mean, chol, rng);
}

void update_delta(SFGMState& state, const Hyperparams& hyper, RngStream& rng) {
  const double quad = state.lambda.dot(state.K.matrix() * state.lambda);
  state.Delta = rng.inverse_gamma(hyper.c + 0.5 * state.p(),
                                  0.5 * (hyper.c * hyper.d + quad));
}

void gibbs_iteration(SFGMState& state, const MatrixXd& data, const Hyperparams& hyper,
                     RngStream& rng, const GibbsOptions& opts) {
  if (data.cols() != state.p() || data.rows() != state.n())
    fail(ErrorCode::DimensionMismatch, "gibbs_iteration: data dims");
  if (opts.update_structure) {
    MatrixXd resid = data;
    resid.rowwise() -= state.alpha.transpose();
    resid -= state.f * state.lambda.transpose();
    idcbf_sweep(state.G, state.K, resid, hyper, rng, opts.restriction);
  }
  update_factors(state, data, rng);
  if (opts.update_means) update_alpha(state, data, hyper, rng);
  update_lambda(state, data, rng);
  update_delta(state, hyper, rng);
}

}  // namespace sfgm

#include "sfgm/multigroup.hpp"

#include <cmath>

namespace sfgm {

MultiGroupState make_multigroup_state(const std::vector<MatrixXd>& data,
                                      const Hyperparams& hyper,
                                      UndirectedGraph structure, double delta_mu,
                                      SPDMatrix Dmu, GraphRestriction restriction) {
  if (data.empty()) fail(ErrorCode::InvalidParameter, "multigroup: no groups");
  const int L = static_cast<int>(data.size());
  if (structure.p() != L || Dmu.dim() != L)
    fail(ErrorCode::DimensionMismatch, "multigroup: structure dims must equal L");
  if (!(delta_mu > 2.0))
    fail(ErrorCode::InvalidDegreesOfFreedom, "multigroup: delta_mu must exceed 2");
  const int p = static_cast<int>(data.front().cols());
  for (const auto& d : data)
    if (d.cols() != p) fail(ErrorCode::DimensionMismatch, "multigroup: unequal p across groups");

  MultiGroupState s{{}, VectorXd::Zero(L), SPDMatrix::identity(L),
                    std::move(structure), delta_mu, std::move(Dmu)};
  s.groups.reserve(L);
  for (const auto& d : data) s.groups.push_back(make_initial_state(d, hyper, restriction));
  return s;
}

void update_group_factors(SFGMState& group, double mu_l, const MatrixXd& data,
                          RngStream& rng) {
  const VectorXd klambda = group.K.matrix() * group.lambda;
  const double prec = 1.0 + group.lambda.dot(klambda);
  const double sd = std::sqrt(1.0 / prec);
  for (int j = 0; j < group.n(); ++j) {
    const double loading = klambda.dot(data.row(j).transpose() - group.alpha);
    group.f(j) = rng.normal((loading + mu_l) / prec, sd);
  }
}

void update_mu(MultiGroupState& state, const std::vector<int>& group_sizes,
               RngStream& rng) {
  const int L = state.L();
  for (int l = 0; l < L; ++l) {
    const double prec = group_sizes[l] + state.Kmu(l, l);
    double cross = 0.0;
    for (int m = 0; m < L; ++m)
      if (m != l) cross += state.Kmu(l, m) * state.mu(m);
    const double fsum = state.groups[l].f.sum();
    state.mu(l) = rng.normal((fsum - cross) / prec, std::sqrt(1.0 / prec));
  }
}

void update_kmu(MultiGroupState& state, RngStream& rng) {
  const SPDMatrix rate(state.Dmu.matrix() + state.mu * state.mu.transpose());
  state.Kmu =
      sample_gwishart_direct(GWishartParams(state.delta_mu + 1.0, rate, state.Gmu), rng);
}

void multigroup_iteration(MultiGroupState& state, const std::vector<MatrixXd>& data,
                          const Hyperparams& hyper, RngStream& rng,
                          const MultiGroupOptions& opts) {
  const int L = state.L();
  if (static_cast<int>(data.size()) != L)
    fail(ErrorCode::DimensionMismatch, "multigroup iteration: group count");
  std::vector<int> sizes(L);
  for (int l = 0; l < L; ++l) {
    SFGMState& g = state.groups[l];
    sizes[l] = g.n();
    MatrixXd resid = data[l];
    resid.rowwise() -= g.alpha.transpose();
    resid -= g.f * g.lambda.transpose();
    idcbf_sweep(g.G, g.K, resid, hyper, rng, opts.restriction);
    update_group_factors(g, state.mu(l), data[l], rng);
    if (opts.update_means) update_alpha(g, data[l], hyper, rng);
    update_lambda(g, data[l], rng);
    update_delta(g, hyper, rng);
  }
  update_mu(state, sizes, rng);
  update_kmu(state, rng);
}

}  // namespace sfgm

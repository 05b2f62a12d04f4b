#pragma once

#include <vector>

#include "sfgm/latent.hpp"
#include "sfgm/model.hpp"
#include "sfgm/trace.hpp"

namespace sfgm {

/// Per-group SFGM states plus the factor-mean layer: f_{lj} ~ N(mu_l, 1),
/// mu ~ N_L(0, Kmu^{-1}) with Kmu in M+(Gmu) on a fixed structure graph.
struct MultiGroupState {
  std::vector<SFGMState> groups;
  VectorXd mu;
  SPDMatrix Kmu;
  UndirectedGraph Gmu;
  double delta_mu = 3.0;
  SPDMatrix Dmu;

  int L() const { return static_cast<int>(groups.size()); }
};

MultiGroupState make_multigroup_state(const std::vector<MatrixXd>& data,
                                      const Hyperparams& hyper,
                                      UndirectedGraph structure, double delta_mu,
                                      SPDMatrix Dmu,
                                      GraphRestriction restriction = GraphRestriction::Identifiable);

/// Group factors under the f ~ N(mu_l, 1) prior: precision 1 + lambda'K lambda,
/// mean (lambda'K(x - alpha) + mu_l) / precision.
void update_group_factors(SFGMState& group, double mu_l, const MatrixXd& data,
                          RngStream& rng);

/// Sequential scalar updates: precision n_l + (Kmu)_ll,
/// mean (sum_j f_lj - sum_{l' != l} (Kmu)_{ll'} mu_l') / precision.
void update_mu(MultiGroupState& state, const std::vector<int>& group_sizes, RngStream& rng);

/// Kmu ~ Wis_{Gmu}(delta_mu + 1, Dmu + mu mu^T) via the direct sampler.
void update_kmu(MultiGroupState& state, RngStream& rng);

struct MultiGroupTrace {
  std::vector<Trace> groups;   // one per group
  MatrixXd mu;                 // iters x L
  MatrixXd kmu_tri;            // iters x L(L+1)/2
};

struct MultiGroupOptions {
  GraphRestriction restriction = GraphRestriction::Identifiable;
  bool update_means = true;  // per-group alpha updates (off for copula groups)
};

/// One full iteration: per-group Algorithm 2 with the group-factor
/// conditional, then mu and Kmu.
void multigroup_iteration(MultiGroupState& state, const std::vector<MatrixXd>& data,
                          const Hyperparams& hyper, RngStream& rng,
                          const MultiGroupOptions& opts = {});

}  // namespace sfgm

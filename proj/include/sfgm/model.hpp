#pragma once

#include "sfgm/graph.hpp"
#include "sfgm/gwishart.hpp"
#include "sfgm/linalg.hpp"
#include "sfgm/rng.hpp"

namespace sfgm {

struct Hyperparams {
  double n0 = 0.1;
  double c = 2.0;
  double d = 1.0;
  double delta = 3.0;
  SPDMatrix D;
  double epsilon = 0.01;

  explicit Hyperparams(SPDMatrix rate);
  /// Paper defaults: delta 3, D identity, n0 0.1, c 2, d 1, epsilon 0.01.
  static Hyperparams standard(int p);
};

/// The identifiability restriction is the model contract; the unrestricted
/// walk over all graphs is used by the exact-enumeration checks and for the
/// degenerate dimensions (p < 3) where no identifiable graph exists.
enum class GraphRestriction { Identifiable, None };

struct SFGMState {
  VectorXd alpha;
  VectorXd lambda;
  VectorXd f;
  SPDMatrix K;
  UndirectedGraph G;
  double Delta = 1.0;

  int p() const { return static_cast<int>(alpha.size()); }
  int n() const { return static_cast<int>(f.size()); }
};

SFGMState make_initial_state(const MatrixXd& data, const Hyperparams& hyper,
                             GraphRestriction restriction = GraphRestriction::Identifiable);

/// One IDCBF pass: for every vertex pair in lexicographic order, propose the
/// single-edge flip, skip proposals that leave the identifiable set, accept
/// with the exchange probability built from an auxiliary prior draw on the
/// proposed graph, and redraw K from Wis_G(delta + n, D + S).
void idcbf_sweep(UndirectedGraph& G, SPDMatrix& K, const MatrixXd& residuals,
                 const Hyperparams& hyper, RngStream& rng,
                 GraphRestriction restriction = GraphRestriction::Identifiable);

void update_factors(SFGMState& state, const MatrixXd& data, RngStream& rng);
void update_alpha(SFGMState& state, const MatrixXd& data, const Hyperparams& hyper,
                  RngStream& rng);
void update_lambda(SFGMState& state, const MatrixXd& data, RngStream& rng);
void update_delta(SFGMState& state, const Hyperparams& hyper, RngStream& rng);

struct GibbsOptions {
  GraphRestriction restriction = GraphRestriction::Identifiable;
  bool update_structure = true;  // Step 1 (G, K)
  bool update_means = true;      // Step 3 (alpha); off in the copula model
};

void gibbs_iteration(SFGMState& state, const MatrixXd& data, const Hyperparams& hyper,
                     RngStream& rng, const GibbsOptions& opts = {});

}  // namespace sfgm

#pragma once

#include "sfgm/graph.hpp"
#include "sfgm/linalg.hpp"
#include "sfgm/rng.hpp"

namespace sfgm {

struct GWishartParams {
  double delta;
  SPDMatrix D;
  UndirectedGraph G;

  GWishartParams(double delta_, SPDMatrix D_, UndirectedGraph G_);
};

/// Largest non-edge magnitude tolerated before a matrix is declared outside
/// M+(G).
inline constexpr double kConeTolerance = 1e-8;

bool in_cone(const MatrixXd& k, const UndirectedGraph& g, double tol = kConeTolerance);

/// ((delta-2)/2) logdet K - <K, D>/2. Throws NotInCone if K violates G's
/// zero pattern.
double log_unnormalized_density(const SPDMatrix& K, const GWishartParams& params);

struct DirectSamplerOptions {
  double tol = 1e-8;   // max entrywise change between sweeps
  int max_sweeps = 1000;
};

/// Exact G-Wishart draw: unconstrained Wishart draw followed by iterative
/// completion of its inverse over the non-neighbors, then inversion and
/// hard-zeroing of the non-edge entries.
SPDMatrix sample_gwishart_direct(const GWishartParams& params, RngStream& rng,
                                 const DirectSamplerOptions& opts = {});

/// Normalizing constant of the Wishart over the full cone (complete graph),
/// rate parameterization. d_sub must be SPD.
double log_wishart_norm_const(double delta, const MatrixXd& d_sub);

bool is_decomposable(const UndirectedGraph& g);

/// Exact log I_G(delta, D) for decomposable G via the clique/separator
/// factorization. Test oracle only; the samplers never call it.
double log_norm_const_decomposable(const GWishartParams& params);

}  // namespace sfgm

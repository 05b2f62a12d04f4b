#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "sfgm/errors.hpp"
#include "sfgm/linalg.hpp"

namespace sfgm {

/// Undirected graph on vertices 0..p-1. No self loops; each edge stored once.
/// File formats and reports are 1-indexed, the API is 0-indexed.
class UndirectedGraph {
 public:
  explicit UndirectedGraph(int p);
  static UndirectedGraph empty(int p) { return UndirectedGraph(p); }
  static UndirectedGraph complete(int p);

  int p() const { return p_; }
  int size() const { return size_; }
  int max_edges() const { return p_ * (p_ - 1) / 2; }

  bool has_edge(int v, int w) const;
  void set_edge(int v, int w, bool present);
  UndirectedGraph flipped(int v, int w) const;

  std::vector<std::pair<int, int>> edges() const;
  std::vector<int> neighbors(int v) const;

  /// Graph with vertex i mapped from source vertex order[i].
  UndirectedGraph permuted(const std::vector<int>& order) const;

  bool operator==(const UndirectedGraph& other) const;

 private:
  int p_;
  int size_;
  std::vector<std::uint8_t> adj_;
};

UndirectedGraph complement(const UndirectedGraph& g);

/// Identifiability of the single-factor model with residual graph g: every
/// connected component of the complement must contain an odd cycle, i.e. be
/// non-bipartite. Single-vertex components are bipartite and fail.
bool is_identifiable(const UndirectedGraph& g);

std::vector<std::vector<int>> connected_components(const UndirectedGraph& g);

/// Size-based prior: Pr(G) = 1/((m+1) C(m, size(G))), m = p(p-1)/2.
struct GraphPrior {
  int p = 0;
  double log_prior(const UndirectedGraph& g) const;
};

/// Temporal structure graphs: edges (l-k, l) for lags k = 1..order.
UndirectedGraph build_ar_graph(int groups, int order);

/// CAR-consistent G-Wishart rate: (delta_mu - 2) (E_W - rho W)^{-1} with
/// E_W = diag(row sums of W). rho must lie strictly between the reciprocals
/// of W's extreme eigenvalues.
SPDMatrix build_car_rate(const MatrixXd& proximity, double rho, double delta_mu);

UndirectedGraph neighborhood_graph(const MatrixXd& proximity);

/// All pairs (v, w), v < w, in lexicographic order.
std::vector<std::pair<int, int>> vertex_pairs(int p);

}  // namespace sfgm

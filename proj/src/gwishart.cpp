#include "sfgm/gwishart.hpp"

#include <algorithm>
#include <cmath>

namespace sfgm {

GWishartParams::GWishartParams(double delta_, SPDMatrix D_, UndirectedGraph G_)
    : delta(delta_), D(std::move(D_)), G(std::move(G_)) {
  if (!(delta > 2.0))
    fail(ErrorCode::InvalidDegreesOfFreedom, "gwishart: delta must exceed 2");
  if (D.dim() != G.p()) fail(ErrorCode::DimensionMismatch, "gwishart: D.dim != G.p");
}

bool in_cone(const MatrixXd& k, const UndirectedGraph& g, double tol) {
  for (int v = 0; v < g.p(); ++v)
    for (int w = v + 1; w < g.p(); ++w)
      if (!g.has_edge(v, w) && std::abs(k(v, w)) > tol) return false;
  return true;
}

double log_unnormalized_density(const SPDMatrix& K, const GWishartParams& params) {
  if (K.dim() != params.G.p()) fail(ErrorCode::DimensionMismatch, "gwishart density: dim");
  if (!in_cone(K.matrix(), params.G))
    fail(ErrorCode::NotInCone, "gwishart density: K has non-zero entries off G");
  const double trace = (K.matrix().cwiseProduct(params.D.matrix())).sum();
  return 0.5 * (params.delta - 2.0) * K.log_det() - 0.5 * trace;
}

SPDMatrix sample_gwishart_direct(const GWishartParams& params, RngStream& rng,
                                 const DirectSamplerOptions& opts) {
  const int p = params.G.p();
  const SPDMatrix w = sample_wishart(params.delta, params.D, rng);
  if (params.G.size() == params.G.max_edges()) return w;  // complete graph: no projection

  const MatrixXd sigma = w.inverse();
  MatrixXd omega = sigma;

  std::vector<std::vector<int>> nbrs(p);
  for (int v = 0; v < p; ++v) nbrs[v] = params.G.neighbors(v);

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (int v = 0; v < p; ++v) {
      const auto& nv = nbrs[v];
      VectorXd col;
      if (nv.empty()) {
        col = VectorXd::Zero(p);
      } else {
        const int q = static_cast<int>(nv.size());
        MatrixXd sub(q, q);
        VectorXd rhs(q);
        for (int i = 0; i < q; ++i) {
          rhs(i) = sigma(nv[i], v);
          for (int j = 0; j < q; ++j) sub(i, j) = omega(nv[i], nv[j]);
        }
        const VectorXd beta_sub = sub.llt().solve(rhs);
        VectorXd beta = VectorXd::Zero(p);
        for (int i = 0; i < q; ++i) beta(nv[i]) = beta_sub(i);
        col = omega * beta;
      }
      for (int j = 0; j < p; ++j) {
        if (j == v) continue;
        max_change = std::max(max_change, std::abs(omega(v, j) - col(j)));
        omega(v, j) = col(j);
        omega(j, v) = col(j);
      }
    }
    if (max_change < opts.tol) {
      SPDMatrix cov(omega);
      MatrixXd k = cov.inverse();
      for (int v = 0; v < p; ++v)
        for (int u = v + 1; u < p; ++u)
          if (!params.G.has_edge(v, u)) {
            k(v, u) = 0.0;
            k(u, v) = 0.0;
          }
      return SPDMatrix(k);
    }
  }
  fail(ErrorCode::NoConvergence, "gwishart direct sampler: sweep cap reached");
}

double log_wishart_norm_const(double delta, const MatrixXd& d_sub) {
  const int c = static_cast<int>(d_sub.rows());
  const double a = 0.5 * (delta + c - 1);
  double lmgamma = 0.25 * c * (c - 1) * std::log(M_PI);
  for (int i = 0; i < c; ++i) lmgamma += std::lgamma(a - 0.5 * i);
  const double logdet = SPDMatrix(d_sub).log_det();
  return a * c * std::log(2.0) + lmgamma - a * logdet;
}

namespace {

// Maximum cardinality search; returns the visit order.
std::vector<int> mcs_order(const UndirectedGraph& g) {
  const int p = g.p();
  std::vector<int> weight(p, 0), order;
  std::vector<char> used(p, 0);
  for (int step = 0; step < p; ++step) {
    int best = -1;
    for (int v = 0; v < p; ++v)
      if (!used[v] && (best == -1 || weight[v] > weight[best])) best = v;
    used[best] = 1;
    order.push_back(best);
    for (int w : g.neighbors(best))
      if (!used[w]) ++weight[w];
  }
  return order;
}

struct CliqueDecomposition {
  std::vector<std::vector<int>> cliques;
  std::vector<std::vector<int>> separators;
};

// For a chordal graph, the MCS order reversed is a perfect elimination
// ordering; the maximal cliques are among the sets {v} + earlier neighbors,
// and the separators are the running intersections in MCS order.
CliqueDecomposition decompose(const UndirectedGraph& g, const std::vector<int>& order) {
  const int p = g.p();
  std::vector<int> rank(p);
  for (int i = 0; i < p; ++i) rank[order[i]] = i;

  std::vector<std::vector<int>> cands(p);
  for (int i = 0; i < p; ++i) {
    const int v = order[i];
    cands[i].push_back(v);
    for (int w : g.neighbors(v))
      if (rank[w] < i) cands[i].push_back(w);
    std::sort(cands[i].begin(), cands[i].end());
  }

  CliqueDecomposition out;
  std::vector<char> earlier(p, 0);
  for (int i = 0; i < p; ++i) {
    bool maximal = true;
    for (int j = 0; j < p && maximal; ++j) {
      if (j == i || cands[j].size() < cands[i].size()) continue;
      if (cands[j].size() == cands[i].size() && j > i) continue;
      if (std::includes(cands[j].begin(), cands[j].end(), cands[i].begin(),
                        cands[i].end()) &&
          cands[j] != cands[i])
        maximal = false;
      else if (cands[j] == cands[i] && j < i)
        maximal = false;  // duplicate, keep the first occurrence
    }
    if (!maximal) continue;
    if (!out.cliques.empty()) {
      std::vector<int> sep;
      for (int w : cands[i])
        if (earlier[w]) sep.push_back(w);
      if (!sep.empty()) out.separators.push_back(std::move(sep));
    }
    for (int w : cands[i]) earlier[w] = 1;
    out.cliques.push_back(cands[i]);
  }
  return out;
}

}  // namespace

bool is_decomposable(const UndirectedGraph& g) {
  // The MCS order, reversed, must be a perfect elimination ordering.
  const auto order = mcs_order(g);
  const int p = g.p();
  std::vector<int> rank(p);
  for (int i = 0; i < p; ++i) rank[order[i]] = i;
  for (int i = 0; i < p; ++i) {
    const int v = order[i];
    std::vector<int> earlier;
    for (int w : g.neighbors(v))
      if (rank[w] < i) earlier.push_back(w);
    for (size_t a = 0; a < earlier.size(); ++a)
      for (size_t b = a + 1; b < earlier.size(); ++b)
        if (!g.has_edge(earlier[a], earlier[b])) return false;
  }
  return true;
}

double log_norm_const_decomposable(const GWishartParams& params) {
  if (!is_decomposable(params.G))
    fail(ErrorCode::NotDecomposable, "log_norm_const_decomposable: graph not decomposable");
  const auto order = mcs_order(params.G);
  const auto decomp = decompose(params.G, order);

  auto submatrix = [&](const std::vector<int>& idx) {
    MatrixXd sub(idx.size(), idx.size());
    for (size_t i = 0; i < idx.size(); ++i)
      for (size_t j = 0; j < idx.size(); ++j) sub(i, j) = params.D(idx[i], idx[j]);
    return sub;
  };

  double total = 0.0;
  for (const auto& c : decomp.cliques)
    total += log_wishart_norm_const(params.delta, submatrix(c));
  for (const auto& s : decomp.separators)
    total -= log_wishart_norm_const(params.delta, submatrix(s));
  return total;
}

}  // namespace sfgm

#include "sfgm/graph.hpp"

#include <cmath>
#include <deque>

namespace sfgm {

UndirectedGraph::UndirectedGraph(int p) : p_(p), size_(0), adj_(p * p, 0) {
  if (p < 1) fail(ErrorCode::InvalidParameter, "graph: p must be positive");
}

UndirectedGraph UndirectedGraph::complete(int p) {
  UndirectedGraph g(p);
  for (int v = 0; v < p; ++v)
    for (int w = v + 1; w < p; ++w) g.set_edge(v, w, true);
  return g;
}

bool UndirectedGraph::has_edge(int v, int w) const {
  return adj_[v * p_ + w] != 0;
}

void UndirectedGraph::set_edge(int v, int w, bool present) {
  if (v == w || v < 0 || w < 0 || v >= p_ || w >= p_)
    fail(ErrorCode::InvalidParameter, "graph: bad vertex pair");
  const bool had = has_edge(v, w);
  if (had == present) return;
  adj_[v * p_ + w] = present ? 1 : 0;
  adj_[w * p_ + v] = present ? 1 : 0;
  size_ += present ? 1 : -1;
}

UndirectedGraph UndirectedGraph::flipped(int v, int w) const {
  UndirectedGraph g(*this);
  g.set_edge(v, w, !has_edge(v, w));
  return g;
}

std::vector<std::pair<int, int>> UndirectedGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(size_);
  for (int v = 0; v < p_; ++v)
    for (int w = v + 1; w < p_; ++w)
      if (has_edge(v, w)) out.emplace_back(v, w);
  return out;
}

std::vector<int> UndirectedGraph::neighbors(int v) const {
  std::vector<int> out;
  for (int w = 0; w < p_; ++w)
    if (w != v && has_edge(v, w)) out.push_back(w);
  return out;
}

UndirectedGraph UndirectedGraph::permuted(const std::vector<int>& order) const {
  UndirectedGraph g(p_);
  for (int i = 0; i < p_; ++i)
    for (int j = i + 1; j < p_; ++j)
      if (has_edge(order[i], order[j])) g.set_edge(i, j, true);
  return g;
}

bool UndirectedGraph::operator==(const UndirectedGraph& other) const {
  return p_ == other.p_ && adj_ == other.adj_;
}

UndirectedGraph complement(const UndirectedGraph& g) {
  UndirectedGraph out(g.p());
  for (int v = 0; v < g.p(); ++v)
    for (int w = v + 1; w < g.p(); ++w)
      if (!g.has_edge(v, w)) out.set_edge(v, w, true);
  return out;
}

std::vector<std::vector<int>> connected_components(const UndirectedGraph& g) {
  std::vector<std::vector<int>> comps;
  std::vector<char> seen(g.p(), 0);
  for (int start = 0; start < g.p(); ++start) {
    if (seen[start]) continue;
    std::vector<int> comp;
    std::deque<int> queue{start};
    seen[start] = 1;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      comp.push_back(v);
      for (int w : g.neighbors(v)) {
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
      }
    }
    comps.push_back(std::move(comp));
  }
  return comps;
}

namespace {

// Two-way coloring BFS restricted to one component.
bool component_bipartite(const UndirectedGraph& g, const std::vector<int>& comp) {
  if (comp.size() <= 1) return true;
  std::vector<int> color(g.p(), -1);
  std::deque<int> queue{comp.front()};
  color[comp.front()] = 0;
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    for (int w : g.neighbors(v)) {
      if (color[w] == -1) {
        color[w] = 1 - color[v];
        queue.push_back(w);
      } else if (color[w] == color[v]) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

bool is_identifiable(const UndirectedGraph& g) {
  const UndirectedGraph comp = complement(g);
  for (const auto& component : connected_components(comp))
    if (component_bipartite(comp, component)) return false;
  return true;
}

double GraphPrior::log_prior(const UndirectedGraph& g) const {
  if (g.p() != p) fail(ErrorCode::DimensionMismatch, "graph prior: p mismatch");
  const int m = g.max_edges();
  const int k = g.size();
  const double log_binom =
      std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
  return -std::log(m + 1.0) - log_binom;
}

UndirectedGraph build_ar_graph(int groups, int order) {
  if (order < 1 || order > 4)
    fail(ErrorCode::InvalidOrder, "build_ar_graph: order must be in 1..4");
  if (groups < 2) fail(ErrorCode::InvalidParameter, "build_ar_graph: need at least 2 groups");
  UndirectedGraph g(groups);
  for (int lag = 1; lag <= order; ++lag)
    for (int l = lag; l < groups; ++l) g.set_edge(l - lag, l, true);
  return g;
}

SPDMatrix build_car_rate(const MatrixXd& proximity, double rho, double delta_mu) {
  const int L = static_cast<int>(proximity.rows());
  if (proximity.cols() != L || (proximity - proximity.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorCode::NonSymmetricW, "build_car_rate: W must be square symmetric");
  if (proximity.diagonal().cwiseAbs().maxCoeff() > 0.0)
    fail(ErrorCode::NonSymmetricW, "build_car_rate: W must have zero diagonal");
  if (proximity.minCoeff() < 0.0)
    fail(ErrorCode::NonSymmetricW, "build_car_rate: W must be non-negative");
  if (!(delta_mu > 2.0))
    fail(ErrorCode::InvalidDegreesOfFreedom, "build_car_rate: delta_mu must exceed 2");

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(proximity, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  // Permissible interval is (1/lambda_min, 1/lambda_max); rho = 0 is always valid.
  if (rho != 0.0) {
    const bool below_ok = (lo < 0.0) ? (rho > 1.0 / lo) : (rho > 0.0);
    const bool above_ok = (hi > 0.0) ? (rho < 1.0 / hi) : (rho < 0.0);
    if (!(below_ok && above_ok))
      fail(ErrorCode::RhoOutOfRange, "build_car_rate: rho outside eigenvalue bounds");
  }

  MatrixXd ew = proximity.rowwise().sum().asDiagonal();
  SPDMatrix precision(ew - rho * proximity);
  return SPDMatrix((delta_mu - 2.0) * precision.inverse());
}

UndirectedGraph neighborhood_graph(const MatrixXd& proximity) {
  const int L = static_cast<int>(proximity.rows());
  if (proximity.cols() != L || (proximity - proximity.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    fail(ErrorCode::NonSymmetricW, "neighborhood_graph: W must be square symmetric");
  UndirectedGraph g(L);
  for (int v = 0; v < L; ++v)
    for (int w = v + 1; w < L; ++w)
      if (proximity(v, w) > 0.0) g.set_edge(v, w, true);
  return g;
}

std::vector<std::pair<int, int>> vertex_pairs(int p) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(p * (p - 1) / 2);
  for (int v = 0; v < p; ++v)
    for (int w = v + 1; w < p; ++w) pairs.emplace_back(v, w);
  return pairs;
}

}  // namespace sfgm

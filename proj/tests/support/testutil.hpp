#pragma once

// Shared oracles for the test suites: grid-quadrature CDFs, KS statistics,
// exhaustive graph enumeration, and a brute-force odd-cycle search. These stay
// independent of the library's sampling paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "sfgm/graph.hpp"
#include "sfgm/linalg.hpp"

namespace testutil {

/// CDF of a density known up to a constant, tabulated on [lo, hi] by the
/// trapezoid rule.
class GridCdf {
 public:
  GridCdf(const std::function<double(double)>& log_density, double lo, double hi,
          int points = 4001) {
    x_.resize(points);
    cdf_.resize(points);
    const double dx = (hi - lo) / (points - 1);
    std::vector<double> logw(points);
    double max_log = -1e300;
    for (int i = 0; i < points; ++i) {
      x_[i] = lo + i * dx;
      logw[i] = log_density(x_[i]);
      max_log = std::max(max_log, logw[i]);
    }
    std::vector<double> w(points);
    for (int i = 0; i < points; ++i) w[i] = std::exp(logw[i] - max_log);
    cdf_[0] = 0.0;
    for (int i = 1; i < points; ++i)
      cdf_[i] = cdf_[i - 1] + 0.5 * (w[i] + w[i - 1]) * dx;
    const double total = cdf_.back();
    for (auto& c : cdf_) c /= total;
  }

  double operator()(double v) const {
    if (v <= x_.front()) return 0.0;
    if (v >= x_.back()) return 1.0;
    const auto it = std::upper_bound(x_.begin(), x_.end(), v);
    const size_t hi = it - x_.begin();
    const size_t lo = hi - 1;
    const double frac = (v - x_[lo]) / (x_[hi] - x_[lo]);
    return cdf_[lo] + frac * (cdf_[hi] - cdf_[lo]);
  }

 private:
  std::vector<double> x_, cdf_;
};

inline double ks_distance(std::vector<double> draws,
                          const std::function<double(double)>& cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double ks = 0.0;
  for (size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    ks = std::max(ks, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return ks;
}

inline double ks_distance_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  size_t i = 0, j = 0;
  double ks = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    ks = std::max(ks, std::abs(static_cast<double>(i) / a.size() -
                               static_cast<double>(j) / b.size()));
  }
  return ks;
}

/// All graphs on p vertices, by edge bitmask over the canonical pair order.
inline std::vector<sfgm::UndirectedGraph> all_graphs(int p) {
  const auto pairs = sfgm::vertex_pairs(p);
  const int m = static_cast<int>(pairs.size());
  std::vector<sfgm::UndirectedGraph> out;
  out.reserve(1u << m);
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    sfgm::UndirectedGraph g(p);
    for (int e = 0; e < m; ++e)
      if (mask & (1u << e)) g.set_edge(pairs[e].first, pairs[e].second, true);
    out.push_back(std::move(g));
  }
  return out;
}

/// Does the component (given as a vertex list) contain an odd simple cycle?
/// Checks every odd-size vertex subset in every circular order.
inline bool component_has_odd_cycle_bruteforce(const sfgm::UndirectedGraph& g,
                                               const std::vector<int>& comp) {
  const int c = static_cast<int>(comp.size());
  for (unsigned mask = 1; mask < (1u << c); ++mask) {
    std::vector<int> subset;
    for (int i = 0; i < c; ++i)
      if (mask & (1u << i)) subset.push_back(comp[i]);
    if (subset.size() < 3 || subset.size() % 2 == 0) continue;
    std::vector<int> rest(subset.begin() + 1, subset.end());
    std::sort(rest.begin(), rest.end());
    do {
      bool ok = g.has_edge(subset[0], rest.front()) && g.has_edge(rest.back(), subset[0]);
      for (size_t i = 0; ok && i + 1 < rest.size(); ++i)
        ok = g.has_edge(rest[i], rest[i + 1]);
      if (ok) return true;
    } while (std::next_permutation(rest.begin(), rest.end()));
  }
  return false;
}

/// Brute-force identifiability: every complement component must contain an odd
/// simple cycle.
inline bool is_identifiable_bruteforce(const sfgm::UndirectedGraph& g) {
  const sfgm::UndirectedGraph comp = sfgm::complement(g);
  for (const auto& component : sfgm::connected_components(comp))
    if (!component_has_odd_cycle_bruteforce(comp, component)) return false;
  return true;
}

inline double frobenius(const Eigen::MatrixXd& m) { return m.norm(); }

}  // namespace testutil

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfgm/model.hpp"

namespace sfgm {

/// Post-burn-in draws of one chain, stored columnwise. K is kept as the
/// flattened lower triangle (row-major, diagonal included).
struct Trace {
  int p = 0;
  int chain_id = 0;
  std::vector<std::pair<int, int>> pairs;  // canonical (v, w), v < w

  MatrixXd alpha;    // iters x p
  MatrixXd lambda;   // iters x p
  VectorXd delta;    // iters
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> edges;  // iters x m
  MatrixXd ktri;     // iters x p(p+1)/2
  MatrixXd factors;  // iters x n when requested, else 0 x 0

  int iterations() const { return static_cast<int>(alpha.rows()); }

  static Trace allocate(int p, int iterations, int chain_id, int n_factors = 0);
  void record(int iter, const SFGMState& state);
  MatrixXd k_at(int iter) const;
};

Trace merge_traces(const std::vector<Trace>& traces);

struct BayesFactor {
  double value = 0.0;
  double mean_abs = 0.0;
  double lower95 = 0.0;
  double upper95 = 0.0;
  std::string evidence;
};

/// Kass-Raftery reading of B_{1,0}.
std::string evidence_label(double bf);

/// Posterior odds that |lambda_v| exceeds epsilon, by sample counting with a
/// half count added to each bucket when one is empty.
BayesFactor bayes_factor_loading(const Trace& trace, int v, double epsilon);

struct ParamSummary {
  VectorXd mean, lower95, upper95;
};

struct Summary {
  int p = 0;
  MatrixXd pip;                                  // p x p, zero diagonal
  std::vector<std::pair<int, int>> median_graph; // PIP > 0.5
  ParamSummary alpha, lambda;
  double delta_mean = 0.0, delta_lower95 = 0.0, delta_upper95 = 0.0;
  MatrixXd k_mean;
  std::vector<BayesFactor> loadings;
};

Summary posterior_summaries(const Trace& merged, double epsilon);
Summary posterior_summaries(const std::vector<Trace>& traces, double epsilon);

/// Running mean of the edge count, the convergence diagnostic series.
VectorXd cumulative_expected_edges(const std::vector<int>& edge_counts);

double quantile(std::vector<double> values, double q);

}  // namespace sfgm

#pragma once

#include <limits>
#include <string>
#include <vector>

#include "sfgm/model.hpp"
#include "sfgm/trace.hpp"

namespace sfgm {

enum class VariableKind { Binary, Ordinal, Continuous };

struct CategoricalDataset {
  MatrixXd x;  // observed values; entries under the mask are ignored
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> missing;  // n x p
  std::vector<VariableKind> kinds;

  int n() const { return static_cast<int>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }
  bool is_missing(int j, int v) const { return missing(j, v) != 0; }

  void validate() const;
};

/// Binary contingency table, counts listed with the last variable varying
/// fastest (the first variable is the slowest).
struct ContingencyTable {
  std::vector<std::string> vars;
  std::vector<long> counts;  // 2^p entries

  int p() const { return static_cast<int>(vars.size()); }
  long total() const;
  /// Expand to one row per observation.
  CategoricalDataset expand() const;
  /// Index of the cell with the given 0/1 pattern (pattern[0] slowest).
  int cell_index(const std::vector<int>& pattern) const;
};

/// Latent Gaussian data and its rescaled version Ztilde_v = Z_v / sqrt((K^-1)_vv).
struct LatentMatrix {
  MatrixXd z;
  MatrixXd ztilde;

  void rescale(const SPDMatrix& K);
};

LatentMatrix init_probit_latent(const CategoricalDataset& data, const SPDMatrix& K);
LatentMatrix init_copula_latent(const CategoricalDataset& data, const SPDMatrix& K);

struct ScalarConditional {
  double mean = 0.0;
  double variance = 1.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

/// Full conditional of Z_v^(j) under the probit truncation rule.
ScalarConditional probit_entry_conditional(const LatentMatrix& latent,
                                           const CategoricalDataset& data,
                                           const SFGMState& state, int j, int v);

/// Full conditional of Z_v^(j) under the extended-rank-likelihood bounds
/// (alpha is zero in the copula model).
ScalarConditional copula_entry_conditional(const LatentMatrix& latent,
                                           const CategoricalDataset& data,
                                           const SFGMState& state, int j, int v);

/// Rank-likelihood bounds for sample j of one variable: the largest latent
/// value among strictly smaller observations and the smallest among strictly
/// larger ones; infinite when the defining set is empty. Ties constrain nothing.
std::pair<double, double> rank_bounds(const VectorXd& latent_col, const VectorXd& x_col,
                                      const std::vector<std::uint8_t>& missing_col, int j);

void probit_latent_update(LatentMatrix& latent, const CategoricalDataset& data,
                          const SFGMState& state, RngStream& rng);
void copula_latent_update(LatentMatrix& latent, const CategoricalDataset& data,
                          const SFGMState& state, RngStream& rng);

bool sign_consistent(const LatentMatrix& latent, const CategoricalDataset& data);
bool rank_consistent(const LatentMatrix& latent, const CategoricalDataset& data);

/// Monte Carlo expected cell counts: per posterior draw, simulate latent
/// vectors under the lambda lambda^T + K^{-1} covariance and average the cell
/// frequencies. Copula mode thresholds each variable at the normal quantile of
/// its observed zero rate instead of zero.
VectorXd expected_cell_counts(const Trace& trace, const ContingencyTable& table,
                              bool copula_mode, RngStream& rng, int sims_per_draw = 200);

}  // namespace sfgm

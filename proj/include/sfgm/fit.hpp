#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sfgm/latent.hpp"
#include "sfgm/model.hpp"
#include "sfgm/multigroup.hpp"
#include "sfgm/trace.hpp"

namespace sfgm {

// ---------------------------------------------------------------------------
// Simulation

struct SimulationSpec {
  VectorXd alpha;
  VectorXd lambda;
  MatrixXd K;  // residual precision; the graph is its off-diagonal support

  UndirectedGraph graph() const;
  /// The two built-in simulation-study models (p = 5).
  static SimulationSpec m1();
  static SimulationSpec m2();
};

/// X^(j) = alpha + lambda f_j + delta_j with f ~ N(0,1), delta ~ N(0, K^{-1}).
/// Throws NonIdentifiableGraph when the implied graph is outside the
/// identifiable set.
MatrixXd simulate_dataset(const SimulationSpec& spec, int n, RngStream& rng);

// ---------------------------------------------------------------------------
// Fitting

enum class ModelKind { Sfgm, Probit, Csfgm, Multigroup };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

struct RunConfig {
  ModelKind model = ModelKind::Sfgm;
  std::string data_path;        // csv (sfgm/csfgm), or via table_path/manifest_path
  std::string table_path;       // binary contingency table (probit/csfgm)
  std::string manifest_path;    // multigroup dataset manifest
  int chains = 2;
  int iterations = 30000;
  int burn_in = 10000;
  std::uint64_t seed = 1;
  double n0 = 0.1, c = 2.0, d = 1.0, delta = 3.0, epsilon = 0.01;
  std::string d_matrix_path;    // empty: identity rate matrix
  std::string structure;        // multigroup: "ar:<order>" or "spatial:<W.csv>:<rho>"
  std::string out_dir;          // empty: no artifacts written
  bool store_factors = false;

  void validate() const;
  static RunConfig from_json_file(const std::filesystem::path& path);
};

struct ChainResult {
  Trace trace;
  VectorXd cum_edges;  // full-run convergence series, burn-in included
};

struct GroupChainResult {
  std::vector<Trace> groups;
  MatrixXd mu;       // post-burn-in iters x L
  MatrixXd kmu_tri;  // post-burn-in iters x L(L+1)/2
  std::vector<VectorXd> cum_edges;  // per group
};

struct FitResult {
  // Single-dataset models.
  std::vector<ChainResult> chains;
  Summary summary;
  VectorXd cell_counts;  // expected counts when the input was a table

  // Multigroup.
  std::vector<GroupChainResult> group_chains;
  std::vector<Summary> group_summaries;
  MatrixXd mu_draws;   // merged post-burn-in draws
  VectorXd mu_mean;
  MatrixXd kmu_mean;

  nlohmann::ordered_json to_json(const RunConfig& config) const;
};

/// Runs `chains` independent chains (parallel workers, per-chain derived
/// seeds), writes trace/diagnostic/summary artifacts when an output directory
/// is configured, and returns everything in memory.
FitResult run_fit(const RunConfig& config);

/// Merge previously written trace CSVs into a summary report.
nlohmann::ordered_json summarize(const std::vector<std::filesystem::path>& trace_paths,
                                 double epsilon);

// Shared chain runners (also used by the test suites).
ChainResult run_sfgm_chain(const MatrixXd& data, const Hyperparams& hyper,
                           int iterations, int burn_in, int chain_id,
                           std::uint64_t seed, const GibbsOptions& opts,
                           bool store_factors = false);
ChainResult run_latent_chain(const CategoricalDataset& data, const Hyperparams& hyper,
                             bool copula, int iterations, int burn_in, int chain_id,
                             std::uint64_t seed,
                             GraphRestriction restriction = GraphRestriction::Identifiable);
GroupChainResult run_multigroup_chain(const std::vector<MatrixXd>& data,
                                      const Hyperparams& hyper,
                                      const UndirectedGraph& structure, double delta_mu,
                                      const SPDMatrix& Dmu, int iterations, int burn_in,
                                      int chain_id, std::uint64_t seed);

}  // namespace sfgm

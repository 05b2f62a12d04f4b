#include "sfgm/fit.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "sfgm/io.hpp"

namespace sfgm {

using nlohmann::ordered_json;

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "sfgm") return ModelKind::Sfgm;
  if (name == "probit") return ModelKind::Probit;
  if (name == "csfgm") return ModelKind::Csfgm;
  if (name == "multigroup") return ModelKind::Multigroup;
  fail(ErrorCode::ConfigError, "unknown model '" + name + "'");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Sfgm: return "sfgm";
    case ModelKind::Probit: return "probit";
    case ModelKind::Csfgm: return "csfgm";
    case ModelKind::Multigroup: return "multigroup";
  }
  return "sfgm";
}

void RunConfig::validate() const {
  if (chains < 1) fail(ErrorCode::ConfigError, "chains must be >= 1");
  if (!(iterations > burn_in && burn_in >= 0))
    fail(ErrorCode::ConfigError, "need iterations > burn_in >= 0");
  if (!(n0 > 0 && c > 0 && d > 0 && epsilon > 0))
    fail(ErrorCode::ConfigError, "hyperparameters n0, c, d, epsilon must be positive");
  if (!(delta > 2)) fail(ErrorCode::ConfigError, "delta must exceed 2");
  if (model == ModelKind::Multigroup) {
    if (manifest_path.empty()) fail(ErrorCode::ConfigError, "multigroup needs a manifest");
    if (structure.empty()) fail(ErrorCode::ConfigError, "multigroup needs a structure spec");
  } else if (data_path.empty() && table_path.empty()) {
    fail(ErrorCode::ConfigError, "no input data configured");
  }
}

RunConfig RunConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::ConfigError, std::string("config parse error: ") + e.what());
  }
  RunConfig cfg;
  try {
    if (j.contains("model")) cfg.model = model_kind_from_string(j["model"]);
    if (j.contains("data")) cfg.data_path = j["data"];
    if (j.contains("table")) cfg.table_path = j["table"];
    if (j.contains("manifest")) cfg.manifest_path = j["manifest"];
    if (j.contains("chains")) cfg.chains = j["chains"];
    if (j.contains("iterations")) cfg.iterations = j["iterations"];
    if (j.contains("burn_in")) cfg.burn_in = j["burn_in"];
    if (j.contains("seed")) cfg.seed = j["seed"];
    if (j.contains("structure")) cfg.structure = j["structure"];
    if (j.contains("out")) cfg.out_dir = j["out"];
    if (j.contains("store_factors")) cfg.store_factors = j["store_factors"];
    if (j.contains("hyper")) {
      const auto& h = j["hyper"];
      if (h.contains("n0")) cfg.n0 = h["n0"];
      if (h.contains("c")) cfg.c = h["c"];
      if (h.contains("d")) cfg.d = h["d"];
      if (h.contains("delta")) cfg.delta = h["delta"];
      if (h.contains("epsilon")) cfg.epsilon = h["epsilon"];
      if (h.contains("D") && h["D"].is_string() && h["D"] != "identity")
        cfg.d_matrix_path = h["D"];
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::ConfigError, std::string("bad config value: ") + e.what());
  }
  return cfg;
}

namespace {

Hyperparams hyper_for(const RunConfig& cfg, int p) {
  SPDMatrix rate = cfg.d_matrix_path.empty()
                       ? SPDMatrix::identity(p)
                       : SPDMatrix(load_csv_matrix(cfg.d_matrix_path));
  if (rate.dim() != p) fail(ErrorCode::ConfigError, "rate matrix D has wrong dimension");
  Hyperparams h(std::move(rate));
  h.n0 = cfg.n0;
  h.c = cfg.c;
  h.d = cfg.d;
  h.delta = cfg.delta;
  h.epsilon = cfg.epsilon;
  return h;
}

// Runs job(i) for i in [0, count) on up to hardware_concurrency workers.
void parallel_for(int count, const std::function<void(int)>& job) {
  const int workers =
      std::max(1, std::min<int>(count, std::thread::hardware_concurrency()));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

ChainResult run_sfgm_chain(const MatrixXd& data, const Hyperparams& hyper,
                           int iterations, int burn_in, int chain_id,
                           std::uint64_t seed, const GibbsOptions& opts,
                           bool store_factors) {
  RngStream rng(seed, static_cast<std::uint64_t>(chain_id));
  SFGMState state = make_initial_state(data, hyper, opts.restriction);
  const int kept = iterations - burn_in;
  ChainResult out;
  out.trace = Trace::allocate(state.p(), kept, chain_id,
                              store_factors ? state.n() : 0);
  std::vector<int> edge_counts;
  edge_counts.reserve(iterations);
  for (int it = 0; it < iterations; ++it) {
    gibbs_iteration(state, data, hyper, rng, opts);
    edge_counts.push_back(state.G.size());
    if (it >= burn_in) out.trace.record(it - burn_in, state);
  }
  out.cum_edges = cumulative_expected_edges(edge_counts);
  return out;
}

ChainResult run_latent_chain(const CategoricalDataset& data, const Hyperparams& hyper,
                             bool copula, int iterations, int burn_in, int chain_id,
                             std::uint64_t seed, GraphRestriction restriction) {
  data.validate();
  if (!copula)
    for (auto kind : data.kinds)
      if (kind != VariableKind::Binary)
        fail(ErrorCode::DataFormatError, "probit model requires binary variables");

  RngStream rng(seed, static_cast<std::uint64_t>(chain_id));
  GibbsOptions opts;
  opts.restriction = restriction;
  opts.update_means = !copula;  // the copula model fixes alpha at zero

  SFGMState state = make_initial_state(MatrixXd::Zero(data.n(), data.p()), hyper,
                                       restriction);
  LatentMatrix latent = copula ? init_copula_latent(data, state.K)
                               : init_probit_latent(data, state.K);
  state.alpha.setZero();

  const int kept = iterations - burn_in;
  ChainResult out;
  out.trace = Trace::allocate(state.p(), kept, chain_id);
  std::vector<int> edge_counts;
  edge_counts.reserve(iterations);
  for (int it = 0; it < iterations; ++it) {
    gibbs_iteration(state, latent.z, hyper, rng, opts);
    latent.rescale(state.K);
    if (copula)
      copula_latent_update(latent, data, state, rng);
    else
      probit_latent_update(latent, data, state, rng);
    edge_counts.push_back(state.G.size());
    if (it >= burn_in) out.trace.record(it - burn_in, state);
  }
  out.cum_edges = cumulative_expected_edges(edge_counts);
  return out;
}

GroupChainResult run_multigroup_chain(const std::vector<MatrixXd>& data,
                                      const Hyperparams& hyper,
                                      const UndirectedGraph& structure, double delta_mu,
                                      const SPDMatrix& Dmu, int iterations, int burn_in,
                                      int chain_id, std::uint64_t seed) {
  RngStream rng(seed, static_cast<std::uint64_t>(chain_id));
  MultiGroupState state =
      make_multigroup_state(data, hyper, structure, delta_mu, Dmu);
  const int L = state.L();
  const int kept = iterations - burn_in;

  GroupChainResult out;
  out.groups.reserve(L);
  for (int l = 0; l < L; ++l)
    out.groups.push_back(Trace::allocate(state.groups[l].p(), kept, chain_id));
  out.mu.resize(kept, L);
  out.kmu_tri.resize(kept, L * (L + 1) / 2);
  std::vector<std::vector<int>> edge_counts(L);

  for (int it = 0; it < iterations; ++it) {
    multigroup_iteration(state, data, hyper, rng);
    for (int l = 0; l < L; ++l) edge_counts[l].push_back(state.groups[l].G.size());
    if (it >= burn_in) {
      const int row = it - burn_in;
      for (int l = 0; l < L; ++l) out.groups[l].record(row, state.groups[l]);
      out.mu.row(row) = state.mu.transpose();
      int idx = 0;
      for (int v = 0; v < L; ++v)
        for (int w = 0; w <= v; ++w) out.kmu_tri(row, idx++) = state.Kmu(v, w);
    }
  }
  out.cum_edges.reserve(L);
  for (int l = 0; l < L; ++l)
    out.cum_edges.push_back(cumulative_expected_edges(edge_counts[l]));
  return out;
}

namespace {

ordered_json param_json(const ParamSummary& s) {
  ordered_json j;
  j["mean"] = std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size());
  j["lower95"] = std::vector<double>(s.lower95.data(), s.lower95.data() + s.lower95.size());
  j["upper95"] = std::vector<double>(s.upper95.data(), s.upper95.data() + s.upper95.size());
  return j;
}

ordered_json matrix_json(const MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json summary_json(const Summary& s, bool include_k) {
  ordered_json j;
  j["p"] = s.p;
  j["pip"] = matrix_json(s.pip);
  ordered_json med = ordered_json::array();
  for (const auto& [v, w] : s.median_graph) med.push_back({v + 1, w + 1});
  j["median_graph"] = std::move(med);
  j["alpha"] = param_json(s.alpha);
  j["lambda"] = param_json(s.lambda);
  j["Delta"] = {{"mean", s.delta_mean},
                {"lower95", s.delta_lower95},
                {"upper95", s.delta_upper95}};
  if (include_k) j["K_mean"] = matrix_json(s.k_mean);
  ordered_json bfs = ordered_json::array();
  for (size_t v = 0; v < s.loadings.size(); ++v) {
    const BayesFactor& bf = s.loadings[v];
    bfs.push_back({{"variable", v + 1},
                   {"b10", bf.value},
                   {"mean_abs", bf.mean_abs},
                   {"lower95", bf.lower95},
                   {"upper95", bf.upper95},
                   {"evidence", bf.evidence}});
  }
  j["bayes_factors"] = std::move(bfs);
  return j;
}

struct ManifestGroup {
  std::string id;
  std::string path;
  std::vector<VariableKind> kinds;
  int n = 0;
};

std::vector<ManifestGroup> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::ConfigError, std::string("manifest parse error: ") + e.what());
  }
  if (!j.contains("groups") || !j["groups"].is_array() || j["groups"].empty())
    fail(ErrorCode::ConfigError, "manifest needs a non-empty 'groups' array");
  std::vector<ManifestGroup> out;
  for (const auto& g : j["groups"]) {
    ManifestGroup mg;
    mg.id = g.value("id", std::to_string(out.size() + 1));
    if (!g.contains("path")) fail(ErrorCode::ConfigError, "manifest group missing 'path'");
    mg.path = g["path"];
    mg.n = g.value("n", 0);
    if (g.contains("kinds"))
      for (const std::string k : g["kinds"]) {
        if (k == "binary") mg.kinds.push_back(VariableKind::Binary);
        else if (k == "ordinal") mg.kinds.push_back(VariableKind::Ordinal);
        else if (k == "continuous") mg.kinds.push_back(VariableKind::Continuous);
        else fail(ErrorCode::ConfigError, "manifest: unknown kind '" + k + "'");
      }
    out.push_back(std::move(mg));
  }
  return out;
}

struct StructureSpec {
  UndirectedGraph graph{1};
  double delta_mu = 3.0;
  SPDMatrix Dmu = SPDMatrix::identity(1);
};

StructureSpec parse_structure(const std::string& spec, int L) {
  StructureSpec out;
  if (spec.rfind("ar:", 0) == 0) {
    const int order = std::stoi(spec.substr(3));
    out.graph = build_ar_graph(L, order);
    out.delta_mu = 3.0;
    out.Dmu = SPDMatrix::identity(L);
    return out;
  }
  if (spec.rfind("spatial:", 0) == 0) {
    const std::string rest = spec.substr(8);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos)
      fail(ErrorCode::ConfigError, "spatial structure needs 'spatial:<W.csv>:<rho>'");
    const std::string wpath = rest.substr(0, colon);
    const double rho = std::stod(rest.substr(colon + 1));
    const MatrixXd w = load_csv_matrix(wpath);
    if (w.rows() != L) fail(ErrorCode::ConfigError, "proximity matrix size != group count");
    out.graph = neighborhood_graph(w);
    out.delta_mu = 3.0;
    out.Dmu = build_car_rate(w, rho, out.delta_mu);
    return out;
  }
  fail(ErrorCode::ConfigError, "unknown structure spec '" + spec + "'");
}

std::filesystem::path ensure_out_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

FitResult run_fit(const RunConfig& config) {
  config.validate();
  FitResult result;

  if (config.model == ModelKind::Multigroup) {
    const auto manifest = load_manifest(config.manifest_path);
    const int L = static_cast<int>(manifest.size());
    std::vector<MatrixXd> data;
    data.reserve(L);
    for (const auto& g : manifest) {
      data.push_back(load_csv_matrix(g.path));
      if (g.n > 0 && data.back().rows() != g.n)
        fail(ErrorCode::DataFormatError, "group " + g.id + ": row count != manifest n");
    }
    const StructureSpec structure = parse_structure(config.structure, L);
    const Hyperparams hyper = hyper_for(config, static_cast<int>(data.front().cols()));

    result.group_chains.resize(config.chains);
    parallel_for(config.chains, [&](int c) {
      result.group_chains[c] =
          run_multigroup_chain(data, hyper, structure.graph, structure.delta_mu,
                               structure.Dmu, config.iterations, config.burn_in, c,
                               config.seed);
    });

    // Merge per group across chains, and mu/Kmu across chains.
    const int kept = config.iterations - config.burn_in;
    result.mu_draws.resize(static_cast<Eigen::Index>(kept) * config.chains, L);
    MatrixXd kmu_all(static_cast<Eigen::Index>(kept) * config.chains, L * (L + 1) / 2);
    for (int c = 0; c < config.chains; ++c) {
      result.mu_draws.middleRows(static_cast<Eigen::Index>(c) * kept, kept) =
          result.group_chains[c].mu;
      kmu_all.middleRows(static_cast<Eigen::Index>(c) * kept, kept) =
          result.group_chains[c].kmu_tri;
    }
    result.mu_mean = result.mu_draws.colwise().mean();
    result.kmu_mean.resize(L, L);
    VectorXd kmu_tri_mean = kmu_all.colwise().mean();
    int idx = 0;
    for (int v = 0; v < L; ++v)
      for (int w = 0; w <= v; ++w) {
        result.kmu_mean(v, w) = kmu_tri_mean(idx);
        result.kmu_mean(w, v) = kmu_tri_mean(idx);
        ++idx;
      }
    result.group_summaries.reserve(L);
    for (int l = 0; l < L; ++l) {
      std::vector<Trace> per_group;
      per_group.reserve(config.chains);
      for (int c = 0; c < config.chains; ++c)
        per_group.push_back(result.group_chains[c].groups[l]);
      result.group_summaries.push_back(posterior_summaries(per_group, config.epsilon));
    }
  } else {
    MatrixXd data;
    CategoricalDataset categorical;
    ContingencyTable table;
    const bool from_table = !config.table_path.empty();
    if (from_table) {
      table = load_contingency_table(config.table_path);
      categorical = table.expand();
    } else if (config.model == ModelKind::Sfgm) {
      data = load_csv_matrix(config.data_path);
    } else {
      const MatrixXd raw = load_csv_matrix(config.data_path);
      categorical.x = raw;
      categorical.missing = Eigen::Matrix<std::uint8_t, Eigen::Dynamic,
                                          Eigen::Dynamic>::Zero(raw.rows(), raw.cols());
      const bool binary01 =
          ((raw.array() == 0.0) || (raw.array() == 1.0)).all();
      categorical.kinds.assign(raw.cols(), config.model == ModelKind::Probit
                                               ? VariableKind::Binary
                                               : (binary01 ? VariableKind::Binary
                                                           : VariableKind::Continuous));
    }

    const int p = config.model == ModelKind::Sfgm ? static_cast<int>(data.cols())
                                                  : categorical.p();
    const Hyperparams hyper = hyper_for(config, p);
    // SFGM and CSFGM walk the identifiable set; that set is empty below p = 3,
    // where the latent models fall back to the unrestricted walk.
    GraphRestriction restriction = GraphRestriction::Identifiable;
    if (config.model != ModelKind::Sfgm && p < 3) restriction = GraphRestriction::None;
    if (config.model == ModelKind::Sfgm && p < 3)
      fail(ErrorCode::NonIdentifiableStart, "no identifiable graph exists at p < 3");

    result.chains.resize(config.chains);
    parallel_for(config.chains, [&](int c) {
      if (config.model == ModelKind::Sfgm) {
        GibbsOptions opts;
        result.chains[c] =
            run_sfgm_chain(data, hyper, config.iterations, config.burn_in, c,
                           config.seed, opts, config.store_factors);
      } else {
        result.chains[c] = run_latent_chain(
            categorical, hyper, config.model == ModelKind::Csfgm, config.iterations,
            config.burn_in, c, config.seed, restriction);
      }
    });

    std::vector<Trace> traces;
    traces.reserve(config.chains);
    for (const auto& cr : result.chains) traces.push_back(cr.trace);
    const Trace merged = merge_traces(traces);
    result.summary = posterior_summaries(merged, config.epsilon);

    if (from_table) {
      RngStream cell_rng(config.seed, 0x9E3779B9u + config.chains);
      result.cell_counts = expected_cell_counts(
          merged, table, config.model == ModelKind::Csfgm, cell_rng);
    }
  }

  if (!config.out_dir.empty()) {
    const auto dir = ensure_out_dir(config.out_dir);
    if (config.model == ModelKind::Multigroup) {
      for (size_t c = 0; c < result.group_chains.size(); ++c) {
        const auto& gc = result.group_chains[c];
        for (size_t l = 0; l < gc.groups.size(); ++l) {
          const std::string stem =
              "trace_group" + std::to_string(l + 1) + "_chain" + std::to_string(c + 1);
          save_trace_csv(dir / (stem + ".csv"), gc.groups[l]);
          save_trace_k_sidecar(dir / (stem + "_K.csv"), gc.groups[l]);
          save_cumulative_edges(dir / ("cumedges_group" + std::to_string(l + 1) +
                                       "_chain" + std::to_string(c + 1) + ".csv"),
                                gc.cum_edges[l]);
        }
        std::vector<std::string> mu_header;
        for (int l = 0; l < gc.mu.cols(); ++l)
          mu_header.push_back("mu_" + std::to_string(l + 1));
        save_csv_matrix(dir / ("mu_chain" + std::to_string(c + 1) + ".csv"), gc.mu,
                        mu_header);
      }
    } else {
      for (size_t c = 0; c < result.chains.size(); ++c) {
        const std::string stem = "trace_chain" + std::to_string(c + 1);
        save_trace_csv(dir / (stem + ".csv"), result.chains[c].trace);
        save_trace_k_sidecar(dir / (stem + "_K.csv"), result.chains[c].trace);
        save_cumulative_edges(
            dir / ("cumedges_chain" + std::to_string(c + 1) + ".csv"),
            result.chains[c].cum_edges);
      }
    }
    std::ofstream out(dir / "summary.json");
    out << result.to_json(config).dump(2) << "\n";
  }
  return result;
}

ordered_json FitResult::to_json(const RunConfig& config) const {
  ordered_json j;
  j["model"] = to_string(config.model);
  j["chains"] = config.chains;
  j["iterations"] = config.iterations;
  j["burn_in"] = config.burn_in;
  j["seed"] = config.seed;
  j["epsilon"] = config.epsilon;
  if (config.model == ModelKind::Multigroup) {
    j["structure"] = config.structure;
    j["mu_mean"] = std::vector<double>(mu_mean.data(), mu_mean.data() + mu_mean.size());
    j["Kmu_mean"] = matrix_json(kmu_mean);
    ordered_json groups = ordered_json::array();
    for (size_t l = 0; l < group_summaries.size(); ++l) {
      ordered_json g = summary_json(group_summaries[l], true);
      g["group"] = l + 1;
      groups.push_back(std::move(g));
    }
    j["groups"] = std::move(groups);
  } else {
    j.update(summary_json(summary, true));
    if (cell_counts.size() > 0)
      j["expected_cell_counts"] =
          std::vector<double>(cell_counts.data(), cell_counts.data() + cell_counts.size());
  }
  return j;
}

ordered_json summarize(const std::vector<std::filesystem::path>& trace_paths,
                       double epsilon) {
  if (trace_paths.empty()) fail(ErrorCode::EmptyTrace, "summarize: no trace files");
  std::vector<Trace> traces;
  traces.reserve(trace_paths.size());
  for (const auto& path : trace_paths) traces.push_back(load_trace_csv(path));
  const Summary s = posterior_summaries(traces, epsilon);
  ordered_json j = summary_json(s, false);
  int total = 0;
  for (const auto& t : traces) total += t.iterations();
  j["samples"] = total;
  j["epsilon"] = epsilon;
  return j;
}

}  // namespace sfgm

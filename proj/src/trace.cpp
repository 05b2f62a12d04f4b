#include "sfgm/trace.hpp"

#include <algorithm>
#include <cmath>

namespace sfgm {

Trace Trace::allocate(int p, int iterations, int chain_id, int n_factors) {
  Trace t;
  t.p = p;
  t.chain_id = chain_id;
  t.pairs = vertex_pairs(p);
  const int m = static_cast<int>(t.pairs.size());
  t.alpha.resize(iterations, p);
  t.lambda.resize(iterations, p);
  t.delta.resize(iterations);
  t.edges.resize(iterations, m);
  t.ktri.resize(iterations, p * (p + 1) / 2);
  if (n_factors > 0) t.factors.resize(iterations, n_factors);
  return t;
}

void Trace::record(int iter, const SFGMState& state) {
  alpha.row(iter) = state.alpha.transpose();
  lambda.row(iter) = state.lambda.transpose();
  delta(iter) = state.Delta;
  for (size_t e = 0; e < pairs.size(); ++e)
    edges(iter, static_cast<int>(e)) =
        state.G.has_edge(pairs[e].first, pairs[e].second) ? 1 : 0;
  int idx = 0;
  for (int v = 0; v < p; ++v)
    for (int w = 0; w <= v; ++w) ktri(iter, idx++) = state.K(v, w);
  if (factors.size() > 0) factors.row(iter) = state.f.transpose();
}

MatrixXd Trace::k_at(int iter) const {
  MatrixXd k(p, p);
  int idx = 0;
  for (int v = 0; v < p; ++v)
    for (int w = 0; w <= v; ++w) {
      k(v, w) = ktri(iter, idx);
      k(w, v) = ktri(iter, idx);
      ++idx;
    }
  return k;
}

Trace merge_traces(const std::vector<Trace>& traces) {
  if (traces.empty()) fail(ErrorCode::EmptyTrace, "merge_traces: no traces");
  const Trace& first = traces.front();
  int total = 0;
  for (const auto& t : traces) {
    if (t.p != first.p || t.pairs != first.pairs)
      fail(ErrorCode::SchemaMismatch, "merge_traces: traces disagree on schema");
    total += t.iterations();
  }
  Trace out = Trace::allocate(first.p, total, 0,
                              first.factors.size() > 0 ? static_cast<int>(first.factors.cols()) : 0);
  int row = 0;
  for (const auto& t : traces) {
    const int it = t.iterations();
    out.alpha.middleRows(row, it) = t.alpha;
    out.lambda.middleRows(row, it) = t.lambda;
    out.delta.segment(row, it) = t.delta;
    out.edges.middleRows(row, it) = t.edges;
    out.ktri.middleRows(row, it) = t.ktri;
    if (out.factors.size() > 0) out.factors.middleRows(row, it) = t.factors;
    row += it;
  }
  return out;
}

std::string evidence_label(double bf) {
  if (bf > 100.0) return "Decisive";
  if (bf > 10.0) return "Strong";
  if (bf > 3.2) return "Substantial";
  return "Not worth more than a bare mention";
}

BayesFactor bayes_factor_loading(const Trace& trace, int v, double epsilon) {
  const int iters = trace.iterations();
  if (iters == 0) fail(ErrorCode::EmptyTrace, "bayes_factor_loading: empty trace");
  if (v < 0 || v >= trace.p) fail(ErrorCode::InvalidParameter, "bayes_factor_loading: v");
  double above = 0, below = 0;
  std::vector<double> abs_values(iters);
  for (int i = 0; i < iters; ++i) {
    abs_values[i] = std::abs(trace.lambda(i, v));
    (abs_values[i] > epsilon ? above : below) += 1.0;
  }
  if (above == 0.0 || below == 0.0) {
    above += 0.5;
    below += 0.5;
  }
  BayesFactor out;
  out.value = above / below;
  out.mean_abs = std::accumulate(abs_values.begin(), abs_values.end(), 0.0) / iters;
  out.lower95 = quantile(abs_values, 0.025);
  out.upper95 = quantile(abs_values, 0.975);
  out.evidence = evidence_label(out.value);
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) fail(ErrorCode::EmptyTrace, "quantile: no values");
  std::sort(values.begin(), values.end());
  const double pos = q * (values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

namespace {

ParamSummary summarize_columns(const MatrixXd& draws) {
  const int cols = static_cast<int>(draws.cols());
  ParamSummary s;
  s.mean = draws.colwise().mean();
  s.lower95.resize(cols);
  s.upper95.resize(cols);
  for (int c = 0; c < cols; ++c) {
    std::vector<double> col(draws.rows());
    for (int r = 0; r < draws.rows(); ++r) col[r] = draws(r, c);
    s.lower95(c) = quantile(col, 0.025);
    s.upper95(c) = quantile(col, 0.975);
  }
  return s;
}

}  // namespace

Summary posterior_summaries(const Trace& merged, double epsilon) {
  const int iters = merged.iterations();
  if (iters == 0) fail(ErrorCode::EmptyTrace, "posterior_summaries: empty trace");
  const int p = merged.p;

  Summary s;
  s.p = p;
  s.pip = MatrixXd::Zero(p, p);
  for (size_t e = 0; e < merged.pairs.size(); ++e) {
    const double freq =
        merged.edges.col(static_cast<int>(e)).cast<double>().mean();
    const auto [v, w] = merged.pairs[e];
    s.pip(v, w) = freq;
    s.pip(w, v) = freq;
    if (freq > 0.5) s.median_graph.emplace_back(v, w);
  }

  s.alpha = summarize_columns(merged.alpha);
  s.lambda = summarize_columns(merged.lambda);

  std::vector<double> dvals(merged.delta.data(), merged.delta.data() + iters);
  s.delta_mean = merged.delta.mean();
  s.delta_lower95 = quantile(dvals, 0.025);
  s.delta_upper95 = quantile(dvals, 0.975);

  VectorXd ktri_mean = merged.ktri.colwise().mean();
  s.k_mean.resize(p, p);
  int idx = 0;
  for (int v = 0; v < p; ++v)
    for (int w = 0; w <= v; ++w) {
      s.k_mean(v, w) = ktri_mean(idx);
      s.k_mean(w, v) = ktri_mean(idx);
      ++idx;
    }

  s.loadings.reserve(p);
  for (int v = 0; v < p; ++v) s.loadings.push_back(bayes_factor_loading(merged, v, epsilon));
  return s;
}

Summary posterior_summaries(const std::vector<Trace>& traces, double epsilon) {
  return posterior_summaries(merge_traces(traces), epsilon);
}

VectorXd cumulative_expected_edges(const std::vector<int>& edge_counts) {
  VectorXd out(edge_counts.size());
  double running = 0.0;
  for (size_t i = 0; i < edge_counts.size(); ++i) {
    running += edge_counts[i];
    out(static_cast<Eigen::Index>(i)) = running / static_cast<double>(i + 1);
  }
  return out;
}

}  // namespace sfgm

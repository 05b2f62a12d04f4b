#include "sfgm/latent.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sfgm {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void CategoricalDataset::validate() const {
  if (static_cast<int>(kinds.size()) != p())
    fail(ErrorCode::DimensionMismatch, "dataset: kinds size != p");
  if (missing.rows() != x.rows() || missing.cols() != x.cols())
    fail(ErrorCode::DimensionMismatch, "dataset: mask shape");
  for (int v = 0; v < p(); ++v) {
    std::set<double> levels;
    for (int j = 0; j < n(); ++j) {
      if (is_missing(j, v)) continue;
      if (kinds[v] == VariableKind::Binary && x(j, v) != 0.0 && x(j, v) != 1.0)
        fail(ErrorCode::DataFormatError, "dataset: binary values must be 0/1");
      levels.insert(x(j, v));
    }
    if (kinds[v] == VariableKind::Ordinal && levels.size() < 2)
      fail(ErrorCode::DataFormatError, "dataset: ordinal variable with < 2 levels");
  }
}

long ContingencyTable::total() const {
  long t = 0;
  for (long c : counts) t += c;
  return t;
}

int ContingencyTable::cell_index(const std::vector<int>& pattern) const {
  int idx = 0;
  for (int v = 0; v < p(); ++v) idx = idx * 2 + pattern[v];
  return idx;
}

CategoricalDataset ContingencyTable::expand() const {
  const int nvars = p();
  if (counts.size() != (1u << nvars))
    fail(ErrorCode::DataFormatError, "contingency table: need 2^p counts");
  const long n = total();
  CategoricalDataset out;
  out.x.resize(n, nvars);
  out.missing = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, nvars);
  out.kinds.assign(nvars, VariableKind::Binary);
  long row = 0;
  for (size_t cell = 0; cell < counts.size(); ++cell) {
    for (long rep = 0; rep < counts[cell]; ++rep) {
      for (int v = 0; v < nvars; ++v)
        out.x(row, v) = static_cast<double>((cell >> (nvars - 1 - v)) & 1u);
      ++row;
    }
  }
  return out;
}

void LatentMatrix::rescale(const SPDMatrix& K) {
  const MatrixXd cov = K.inverse();
  ztilde = z;
  for (int v = 0; v < z.cols(); ++v) ztilde.col(v) /= std::sqrt(cov(v, v));
}

LatentMatrix init_probit_latent(const CategoricalDataset& data, const SPDMatrix& K) {
  LatentMatrix latent;
  latent.z.resize(data.n(), data.p());
  for (int j = 0; j < data.n(); ++j)
    for (int v = 0; v < data.p(); ++v)
      latent.z(j, v) = data.is_missing(j, v) ? 0.0 : (data.x(j, v) > 0.5 ? 0.5 : -0.5);
  latent.rescale(K);
  return latent;
}

LatentMatrix init_copula_latent(const CategoricalDataset& data, const SPDMatrix& K) {
  // Normal scores from mid-ranks; ties share a score, which satisfies the
  // strict rank constraints.
  LatentMatrix latent;
  const int n = data.n();
  latent.z.resize(n, data.p());
  for (int v = 0; v < data.p(); ++v) {
    for (int j = 0; j < n; ++j) {
      if (data.is_missing(j, v)) {
        latent.z(j, v) = 0.0;
        continue;
      }
      int below = 0, equal = 0, observed = 0;
      for (int k = 0; k < n; ++k) {
        if (data.is_missing(k, v)) continue;
        ++observed;
        if (data.x(k, v) < data.x(j, v)) ++below;
        if (data.x(k, v) == data.x(j, v)) ++equal;
      }
      const double midrank = below + 0.5 * equal;
      latent.z(j, v) = normal_quantile((midrank + 0.5) / (observed + 1.0));
    }
  }
  latent.rescale(K);
  return latent;
}

namespace {

// Conditional of one coordinate of N(mu, K^{-1}) given the others, written in
// precision form: mean mu_v - sum_{v' in bd(v)} (K_vv'/K_vv)(z_v' - mu_v'),
// variance 1/K_vv.
ScalarConditional gaussian_entry_conditional(const LatentMatrix& latent,
                                             const SFGMState& state, int j, int v,
                                             bool with_alpha) {
  ScalarConditional c;
  const double kvv = state.K(v, v);
  double mean = (with_alpha ? state.alpha(v) : 0.0) + state.lambda(v) * state.f(j);
  for (int w : state.G.neighbors(v)) {
    const double mu_w = (with_alpha ? state.alpha(w) : 0.0) + state.lambda(w) * state.f(j);
    mean -= state.K(v, w) / kvv * (latent.z(j, w) - mu_w);
  }
  c.mean = mean;
  c.variance = 1.0 / kvv;
  return c;
}

}  // namespace

ScalarConditional probit_entry_conditional(const LatentMatrix& latent,
                                           const CategoricalDataset& data,
                                           const SFGMState& state, int j, int v) {
  ScalarConditional c = gaussian_entry_conditional(latent, state, j, v, true);
  if (!data.is_missing(j, v)) {
    if (data.x(j, v) > 0.5)
      c.lower = 0.0;
    else
      c.upper = 0.0;
  }
  return c;
}

std::pair<double, double> rank_bounds(const VectorXd& latent_col, const VectorXd& x_col,
                                      const std::vector<std::uint8_t>& missing_col, int j) {
  double lower = -kInf, upper = kInf;
  const double xj = x_col(j);
  for (int k = 0; k < latent_col.size(); ++k) {
    if (k == j || (k < static_cast<int>(missing_col.size()) && missing_col[k])) continue;
    if (x_col(k) < xj) lower = std::max(lower, latent_col(k));
    if (x_col(k) > xj) upper = std::min(upper, latent_col(k));
  }
  return {lower, upper};
}

ScalarConditional copula_entry_conditional(const LatentMatrix& latent,
                                           const CategoricalDataset& data,
                                           const SFGMState& state, int j, int v) {
  ScalarConditional c = gaussian_entry_conditional(latent, state, j, v, false);
  if (data.is_missing(j, v)) return c;
  // The bounds are defined on the rescaled column; rescaling is a positive
  // scalar per column, so comparing raw z values is equivalent.
  double lower = -kInf, upper = kInf;
  const double xj = data.x(j, v);
  for (int k = 0; k < data.n(); ++k) {
    if (k == j || data.is_missing(k, v)) continue;
    if (data.x(k, v) < xj) lower = std::max(lower, latent.z(k, v));
    if (data.x(k, v) > xj) upper = std::min(upper, latent.z(k, v));
  }
  c.lower = lower;
  c.upper = upper;
  return c;
}

namespace {

void sweep_entries(LatentMatrix& latent, const CategoricalDataset& data,
                   const SFGMState& state, RngStream& rng, bool copula) {
  for (int j = 0; j < data.n(); ++j) {
    for (int v = 0; v < data.p(); ++v) {
      const ScalarConditional c =
          copula ? copula_entry_conditional(latent, data, state, j, v)
                 : probit_entry_conditional(latent, data, state, j, v);
      if (c.lower == -kInf && c.upper == kInf)
        latent.z(j, v) = rng.normal(c.mean, std::sqrt(c.variance));
      else
        latent.z(j, v) = rng.truncated_normal(c.mean, c.variance, c.lower, c.upper);
    }
  }
  latent.rescale(state.K);
}

}  // namespace

void probit_latent_update(LatentMatrix& latent, const CategoricalDataset& data,
                          const SFGMState& state, RngStream& rng) {
  sweep_entries(latent, data, state, rng, false);
}

void copula_latent_update(LatentMatrix& latent, const CategoricalDataset& data,
                          const SFGMState& state, RngStream& rng) {
  sweep_entries(latent, data, state, rng, true);
}

bool sign_consistent(const LatentMatrix& latent, const CategoricalDataset& data) {
  for (int j = 0; j < data.n(); ++j)
    for (int v = 0; v < data.p(); ++v) {
      if (data.is_missing(j, v)) continue;
      const bool positive = latent.ztilde(j, v) > 0.0;
      if (positive != (data.x(j, v) > 0.5)) return false;
    }
  return true;
}

bool rank_consistent(const LatentMatrix& latent, const CategoricalDataset& data) {
  for (int v = 0; v < data.p(); ++v)
    for (int j1 = 0; j1 < data.n(); ++j1) {
      if (data.is_missing(j1, v)) continue;
      for (int j2 = 0; j2 < data.n(); ++j2) {
        if (j2 == j1 || data.is_missing(j2, v)) continue;
        if (data.x(j1, v) < data.x(j2, v) &&
            !(latent.ztilde(j1, v) < latent.ztilde(j2, v)))
          return false;
      }
    }
  return true;
}

VectorXd expected_cell_counts(const Trace& trace, const ContingencyTable& table,
                              bool copula_mode, RngStream& rng, int sims_per_draw) {
  const int iters = trace.iterations();
  if (iters == 0) fail(ErrorCode::EmptyTrace, "expected_cell_counts: empty trace");
  const int p = trace.p;
  if (p != table.p()) fail(ErrorCode::DimensionMismatch, "expected_cell_counts: p");
  const long n = table.total();
  const size_t ncells = table.counts.size();

  // Copula thresholds: normal quantiles of the observed zero rates.
  VectorXd thresholds = VectorXd::Zero(p);
  if (copula_mode) {
    const CategoricalDataset expanded = table.expand();
    for (int v = 0; v < p; ++v) {
      double zeros = 0;
      for (int j = 0; j < expanded.n(); ++j) zeros += (expanded.x(j, v) < 0.5);
      const double rate = std::min(std::max(zeros / expanded.n(), 1e-12), 1.0 - 1e-12);
      thresholds(v) = normal_quantile(rate);
    }
  }

  VectorXd tally = VectorXd::Zero(static_cast<Eigen::Index>(ncells));
  VectorXd z(p);
  std::vector<int> pattern(p);
  for (int it = 0; it < iters; ++it) {
    const MatrixXd k = trace.k_at(it);
    const MatrixXd chol = cholesky_lower(k);
    const VectorXd lambda = trace.lambda.row(it).transpose();
    const VectorXd alpha = trace.alpha.row(it).transpose();
    VectorXd marg_sd(p);
    if (copula_mode) {
      const MatrixXd cov = SPDMatrix(k).inverse();
      for (int v = 0; v < p; ++v)
        marg_sd(v) = std::sqrt(lambda(v) * lambda(v) + cov(v, v));
    }
    for (int s = 0; s < sims_per_draw; ++s) {
      const double f = rng.normal();
      for (int v = 0; v < p; ++v) z(v) = rng.normal();
      // residual ~ N(0, K^{-1}) via L^{-T} z
      VectorXd resid = chol.transpose().triangularView<Eigen::Upper>().solve(z);
      for (int v = 0; v < p; ++v) {
        double value = lambda(v) * f + resid(v);
        if (copula_mode)
          pattern[v] = (value / marg_sd(v) > thresholds(v)) ? 1 : 0;
        else
          pattern[v] = (alpha(v) + value > 0.0) ? 1 : 0;
      }
      tally(table.cell_index(pattern)) += 1.0;
    }
  }
  const double total_sims = static_cast<double>(iters) * sims_per_draw;
  return tally * (static_cast<double>(n) / total_sims);
}

}  // namespace sfgm

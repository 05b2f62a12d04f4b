#include <cmath>

#include <doctest.h>

#include "sfgm/fit.hpp"
#include "sfgm/model.hpp"
#include "sfgm/trace.hpp"
#include "support/testutil.hpp"

using namespace sfgm;

namespace {

// Exact posterior over all graphs at p=3 (all decomposable): size-based prior
// times I_G(delta+n, D+S)/I_G(delta, D).
std::vector<double> exact_graph_posterior_p3(const MatrixXd& data,
                                             const Hyperparams& hyper,
                                             const std::vector<UndirectedGraph>& graphs) {
  const int n = static_cast<int>(data.rows());
  const SPDMatrix post_rate(hyper.D.matrix() + data.transpose() * data);
  const GraphPrior prior{3};
  std::vector<double> logp;
  logp.reserve(graphs.size());
  double max_lp = -1e300;
  for (const auto& g : graphs) {
    const double lp =
        prior.log_prior(g) +
        log_norm_const_decomposable(GWishartParams(hyper.delta + n, post_rate, g)) -
        log_norm_const_decomposable(GWishartParams(hyper.delta, hyper.D, g));
    logp.push_back(lp);
    max_lp = std::max(max_lp, lp);
  }
  double total = 0;
  for (double& lp : logp) {
    lp = std::exp(lp - max_lp);
    total += lp;
  }
  for (double& lp : logp) lp /= total;
  return logp;
}

SFGMState fixed_state_p4() {
  MatrixXd kmat(4, 4);
  kmat << 1.3, 0.4, 0.0, 0.0,
          0.4, 1.1, 0.3, 0.0,
          0.0, 0.3, 1.2, 0.0,
          0.0, 0.0, 0.0, 0.9;
  UndirectedGraph g(4);
  g.set_edge(0, 1, true);
  g.set_edge(1, 2, true);
  SFGMState s{VectorXd::Zero(4), VectorXd::Zero(4), VectorXd::Zero(2), SPDMatrix(kmat),
              g, 1.0};
  s.alpha << 0.2, -0.1, 0.3, 0.0;
  s.lambda << 0.8, 1.1, -0.5, 0.7;
  s.f << 0.4, -1.2;
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("factor update matches the joint-density slice") {
  RngStream rng(101);

  SUBCASE("lambda zero reverts to the prior") {
    SFGMState s = fixed_state_p4();
    s.lambda.setZero();
    MatrixXd data(2, 4);
    data << 0.5, -0.2, 1.0, 0.3, -0.4, 0.8, 0.1, -1.0;
    std::vector<double> draws(50000);
    for (auto& x : draws) {
      update_factors(s, data, rng);
      x = s.f(0);
    }
    CHECK(testutil::ks_distance(draws, [](double v) { return normal_cdf(v); }) < 0.02);
  }

  SUBCASE("scalar conjugate case: K=I, p=1, lambda=1, X=2 gives N(1, 1/2)") {
    SFGMState s{VectorXd::Zero(1), VectorXd::Ones(1), VectorXd::Zero(1),
                SPDMatrix::identity(1), UndirectedGraph(1), 1.0};
    MatrixXd data(1, 1);
    data << 2.0;
    std::vector<double> draws(50000);
    for (auto& x : draws) {
      update_factors(s, data, rng);
      x = s.f(0);
    }
    testutil::GridCdf cdf([](double f) { return -(f - 1.0) * (f - 1.0); }, -4.0, 6.0);
    CHECK(testutil::ks_distance(draws, cdf) < 0.02);
    double mean = 0;
    for (double x : draws) mean += x;
    CHECK(mean / draws.size() == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("general state matches grid quadrature of the joint slice") {
    SFGMState s = fixed_state_p4();
    MatrixXd data(2, 4);
    data << 0.9, -0.3, 1.4, 0.2, -0.2, 0.5, 0.0, -0.8;
    const VectorXd row = data.row(0).transpose();
    auto logjoint = [&](double f) {
      const VectorXd resid = row - s.alpha - s.lambda * f;
      return -0.5 * resid.dot(s.K.matrix() * resid) - 0.5 * f * f;
    };
    std::vector<double> draws(50000);
    for (auto& x : draws) {
      update_factors(s, data, rng);
      x = s.f(0);
      s.f.setZero();  // keep the conditioning state fixed
    }
    CHECK(testutil::ks_distance(draws, testutil::GridCdf(logjoint, -8.0, 8.0)) < 0.02);
  }
}

TEST_CASE("alpha update") {
  RngStream rng(102);
  Hyperparams hyper = Hyperparams::standard(4);

  SUBCASE("huge n0 pins alpha at zero") {
    hyper.n0 = 1e8;
    SFGMState s = fixed_state_p4();
    MatrixXd data(2, 4);
    data << 1.0, 2.0, -1.0, 0.5, 0.3, -0.7, 1.2, 0.1;
    for (int i = 0; i < 50; ++i) {
      update_alpha(s, data, hyper, rng);
      CHECK(s.alpha.norm() < 1e-3);
    }
  }

  SUBCASE("K=I factorizes into scalar conjugate coordinates") {
    Hyperparams h = Hyperparams::standard(3);
    const int n = 6;
    MatrixXd data(n, 3);
    RngStream gen(55);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < 3; ++j) data(i, j) = gen.normal(0.5, 1.0);
    SFGMState s{VectorXd::Zero(3), VectorXd::Zero(3), VectorXd::Zero(n),
                SPDMatrix::identity(3), UndirectedGraph(3), 1.0};
    const double post_mean = data.col(1).sum() / (n + h.n0);
    const double post_sd = std::sqrt(1.0 / (n + h.n0));
    std::vector<double> draws(50000);
    for (auto& x : draws) {
      update_alpha(s, data, h, rng);
      x = s.alpha(1);
    }
    CHECK(testutil::ks_distance(draws, [&](double v) {
            return normal_cdf((v - post_mean) / post_sd);
          }) < 0.02);
  }

  SUBCASE("p=1 slice oracle") {
    Hyperparams h = Hyperparams::standard(1);
    MatrixXd data(3, 1);
    data << 1.4, 0.2, 2.2;
    SFGMState s{VectorXd::Zero(1), VectorXd::Ones(1), VectorXd::Zero(3),
                SPDMatrix((MatrixXd(1, 1) << 1.7).finished()), UndirectedGraph(1), 1.0};
    s.f << 0.3, -0.5, 1.1;
    auto logjoint = [&](double a) {
      double total = -0.5 * h.n0 * a * a;
      for (int j = 0; j < 3; ++j) {
        const double r = data(j, 0) - a - s.lambda(0) * s.f(j);
        total += -0.5 * 1.7 * r * r;
      }
      return total;
    };
    std::vector<double> draws(50000);
    for (auto& x : draws) {
      update_alpha(s, data, h, rng);
      x = s.alpha(0);
      s.alpha.setZero();
    }
    CHECK(testutil::ks_distance(draws, testutil::GridCdf(logjoint, -4.0, 6.0)) < 0.02);
  }

  SUBCASE("p=2 correlated K: strip-conditioned slice oracle") {
    Hyperparams h = Hyperparams::standard(2);
    MatrixXd kmat(2, 2);
    kmat << 1.5, 0.7, 0.7, 1.2;
    MatrixXd data(4, 2);
    data << 0.8, 0.1, 1.5, -0.2, 0.4, 0.9, 1.1, 0.6;
    SFGMState s{VectorXd::Zero(2), VectorXd::Zero(2), VectorXd::Zero(4),
                SPDMatrix(kmat), UndirectedGraph::complete(2), 1.0};
    const int total = 200000;
    std::vector<double> a0, a1_all(total);
    MatrixXd draws(total, 2);
    for (int i = 0; i < total; ++i) {
      update_alpha(s, data, h, rng);
      draws.row(i) = s.alpha.transpose();
      a1_all[i] = s.alpha(1);
      s.alpha.setZero();
    }
    const double center = quantile(a1_all, 0.5);
    std::vector<double> sorted = a1_all;
    const double spread = quantile(sorted, 0.84) - quantile(sorted, 0.16);
    const double h_strip = 0.1 * spread / 2.0;
    for (int i = 0; i < total; ++i)
      if (std::abs(draws(i, 1) - center) < h_strip) a0.push_back(draws(i, 0));
    REQUIRE(a0.size() > 5000);
    auto logjoint = [&](double a) {
      VectorXd alpha(2);
      alpha << a, center;
      double t = -0.5 * h.n0 * alpha.squaredNorm();
      for (int j = 0; j < 4; ++j) {
        const VectorXd r = data.row(j).transpose() - alpha;
        t += -0.5 * r.dot(kmat * r);
      }
      return t;
    };
    CHECK(testutil::ks_distance(a0, testutil::GridCdf(logjoint, -3.0, 4.0)) < 0.02);
  }
}

TEST_CASE("lambda update") {
  RngStream rng(103);

  SUBCASE("no factors reverts to the prior N(0, Delta K^{-1})") {
    MatrixXd kmat(1, 1);
    kmat << 2.0;
    SFGMState s{VectorXd::Zero(1), VectorXd::Zero(1), VectorXd::Zero(2),
                SPDMatrix(kmat), UndirectedGraph(1), 1.5};
    MatrixXd data = MatrixXd::Zero(2, 1);
    s.f.setZero();
    const double sd = std::sqrt(1.5 / 2.0);
    std::vector<double> draws(50000);
    for (auto& x : draws) {
      update_lambda(s, data, rng);
      x = s.lambda(0);
      s.lambda.setZero();
    }
    CHECK(testutil::ks_distance(draws, [&](double v) { return normal_cdf(v / sd); }) <
          0.02);
  }

  SUBCASE("scalar conjugate case: N(1, 1/2)") {
    SFGMState s{VectorXd::Zero(1), VectorXd::Zero(1), VectorXd::Ones(1),
                SPDMatrix::identity(1), UndirectedGraph(1), 1.0};
    MatrixXd data(1, 1);
    data << 2.0;
    std::vector<double> draws(50000);
    for (auto& x : draws) {
      update_lambda(s, data, rng);
      x = s.lambda(0);
      s.lambda.setZero();
    }
    testutil::GridCdf cdf([](double l) { return -(l - 1.0) * (l - 1.0); }, -4.0, 6.0);
    CHECK(testutil::ks_distance(draws, cdf) < 0.02);
  }

  SUBCASE("p=2 slice oracle via strip conditioning") {
    MatrixXd kmat(2, 2);
    kmat << 1.4, -0.5, -0.5, 1.1;
    SFGMState s{VectorXd::Zero(2), VectorXd::Zero(2), VectorXd::Zero(3),
                SPDMatrix(kmat), UndirectedGraph::complete(2), 0.8};
    s.f << 0.9, -0.4, 1.3;
    MatrixXd data(3, 2);
    data << 1.2, 0.3, -0.5, 0.2, 1.8, 1.0;
    const int total = 200000;
    MatrixXd draws(total, 2);
    std::vector<double> l1(total);
    for (int i = 0; i < total; ++i) {
      update_lambda(s, data, rng);
      draws.row(i) = s.lambda.transpose();
      l1[i] = s.lambda(1);
      s.lambda.setZero();
    }
    const double center = quantile(l1, 0.5);
    const double spread = quantile(l1, 0.84) - quantile(l1, 0.16);
    std::vector<double> strip;
    for (int i = 0; i < total; ++i)
      if (std::abs(draws(i, 1) - center) < 0.05 * spread) strip.push_back(draws(i, 0));
    REQUIRE(strip.size() > 5000);
    auto logjoint = [&](double l0) {
      VectorXd lam(2);
      lam << l0, center;
      double t = -0.5 / s.Delta * lam.dot(kmat * lam);  // prior N(0, Delta K^{-1})
      for (int j = 0; j < 3; ++j) {
        const VectorXd r = data.row(j).transpose() - lam * s.f(j);
        t += -0.5 * r.dot(kmat * r);
      }
      return t;
    };
    CHECK(testutil::ks_distance(strip, testutil::GridCdf(logjoint, -3.0, 4.0)) < 0.02);
  }
}

TEST_CASE("delta update") {
  RngStream rng(104);
  Hyperparams hyper = Hyperparams::standard(5);

  // Expected values follow IG(c + p/2, (cd + lambda'K lambda)/2) with the
  // rate convention, i.e. mean rate/(shape - 1); c=2, d=1, p=5 gives shape 4.5.
  SUBCASE("lambda zero: IG(4.5, 1) with mean 2/7") {
    SFGMState s{VectorXd::Zero(5), VectorXd::Zero(5), VectorXd::Zero(1),
                SPDMatrix::identity(5), UndirectedGraph(5), 1.0};
    double sum = 0;
    const int n = 100000;
    std::vector<double> draws(n);
    for (auto& x : draws) {
      update_delta(s, hyper, rng);
      x = s.Delta;
      sum += x;
      CHECK(x > 0.0);
    }
    CHECK(sum / n == doctest::Approx(2.0 / 7.0).epsilon(0.05));
    testutil::GridCdf cdf(
        [](double v) { return v <= 0 ? -1e300 : -5.5 * std::log(v) - 1.0 / v; }, 1e-4,
        3.0, 16001);
    CHECK(testutil::ks_distance(draws, cdf) < 0.02);
  }

  SUBCASE("lambda'K lambda = 1: IG(4.5, 1.5) with mean 3/7") {
    SFGMState s{VectorXd::Zero(5), VectorXd::Zero(5), VectorXd::Zero(1),
                SPDMatrix::identity(5), UndirectedGraph(5), 1.0};
    s.lambda(0) = 1.0;  // lambda'K lambda = 1 under K = I
    double sum = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      update_delta(s, hyper, rng);
      sum += s.Delta;
    }
    CHECK(sum / n == doctest::Approx(3.0 / 7.0).epsilon(0.05));
  }
}

TEST_CASE("idcbf: exact enumeration oracle at p=3, unrestricted") {
  RngStream rng(2718);
  // correlated truth so the posterior is spread over several graphs
  MatrixXd ktrue(3, 3);
  ktrue << 1.0, 0.45, 0.0, 0.45, 1.0, 0.3, 0.0, 0.3, 1.0;
  SimulationSpec spec;
  spec.alpha = VectorXd::Zero(3);
  spec.lambda = VectorXd::Zero(3);
  spec.K = ktrue;
  // simulate_dataset rejects non-identifiable graphs, so draw rows directly.
  const SPDMatrix kspd(ktrue);
  const int n = 30;
  MatrixXd data(n, 3);
  for (int j = 0; j < n; ++j) {
    VectorXd z(3);
    for (int v = 0; v < 3; ++v) z(v) = rng.normal();
    data.row(j) =
        kspd.cholesky().transpose().triangularView<Eigen::Upper>().solve(z).transpose();
  }

  const Hyperparams hyper = Hyperparams::standard(3);
  const auto graphs = testutil::all_graphs(3);
  const auto exact = exact_graph_posterior_p3(data, hyper, graphs);
  VectorXd exact_pip = VectorXd::Zero(3);
  const auto pairs = vertex_pairs(3);
  for (size_t gi = 0; gi < graphs.size(); ++gi)
    for (int e = 0; e < 3; ++e)
      if (graphs[gi].has_edge(pairs[e].first, pairs[e].second))
        exact_pip(e) += exact[gi];

  UndirectedGraph g(3);
  SPDMatrix k = SPDMatrix::identity(3);
  const int burn = 2000, keep = 60000;
  VectorXd freq = VectorXd::Zero(3);
  for (int it = 0; it < burn + keep; ++it) {
    idcbf_sweep(g, k, data, hyper, rng, GraphRestriction::None);
    if (it >= burn)
      for (int e = 0; e < 3; ++e)
        freq(e) += g.has_edge(pairs[e].first, pairs[e].second) ? 1.0 : 0.0;
  }
  freq /= keep;
  for (int e = 0; e < 3; ++e)
    CHECK(std::abs(freq(e) - exact_pip(e)) < 0.02);
}

TEST_CASE("idcbf: flat likelihood targets the size-based prior on identifiable graphs") {
  // n = 0 makes the invariant distribution the prior restricted to the
  // identifiable set; enumeration gives it exactly.
  RngStream rng(11235);
  const int p = 5;
  const auto graphs = testutil::all_graphs(p);
  const GraphPrior prior{p};
  const auto pairs = vertex_pairs(p);
  VectorXd exact_pip = VectorXd::Zero(pairs.size());
  double total = 0;
  for (const auto& g : graphs) {
    if (!is_identifiable(g)) continue;
    const double w = std::exp(prior.log_prior(g));
    total += w;
    for (size_t e = 0; e < pairs.size(); ++e)
      if (g.has_edge(pairs[e].first, pairs[e].second)) exact_pip(e) += w;
  }
  exact_pip /= total;

  const Hyperparams hyper = Hyperparams::standard(p);
  UndirectedGraph g(p);
  SPDMatrix k = SPDMatrix::identity(p);
  const MatrixXd no_data(0, p);
  const int burn = 1000, keep = 30000;
  VectorXd freq = VectorXd::Zero(pairs.size());
  for (int it = 0; it < burn + keep; ++it) {
    idcbf_sweep(g, k, no_data, hyper, rng, GraphRestriction::Identifiable);
    REQUIRE(is_identifiable(g));
    if (it >= burn)
      for (size_t e = 0; e < pairs.size(); ++e)
        freq(e) += g.has_edge(pairs[e].first, pairs[e].second) ? 1.0 : 0.0;
  }
  freq /= keep;
  for (Eigen::Index e = 0; e < freq.size(); ++e)
    CHECK(std::abs(freq(e) - exact_pip(e)) < 0.025);
}

TEST_CASE("idcbf: skip rule keeps the walk inside the identifiable set") {
  RngStream rng(99);
  const int p = 4;
  // From G = {(0,1)}, flipping (2,3) gives two disjoint edges whose complement
  // is the bipartite 4-cycle; the proposal must always be skipped.
  UndirectedGraph start(p);
  start.set_edge(0, 1, true);
  REQUIRE(is_identifiable(start));
  UndirectedGraph forbidden = start.flipped(2, 3);
  REQUIRE_FALSE(is_identifiable(forbidden));

  const Hyperparams hyper = Hyperparams::standard(p);
  MatrixXd data(20, p);
  RngStream gen(7);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < p; ++j) data(i, j) = gen.normal();

  UndirectedGraph g = start;
  SPDMatrix k = SPDMatrix::identity(p);
  for (int it = 0; it < 500; ++it) {
    idcbf_sweep(g, k, data, hyper, rng);
    CHECK(is_identifiable(g));
    CHECK_FALSE(g == forbidden);
    CHECK(in_cone(k.matrix(), g));
  }
}

TEST_CASE("gibbs iteration keeps invariants and is reproducible") {
  const SimulationSpec spec = SimulationSpec::m1();
  RngStream sim_rng(5150);
  const MatrixXd data = simulate_dataset(spec, 60, sim_rng);
  const Hyperparams hyper = Hyperparams::standard(5);

  SUBCASE("invariants along a short run") {
    SFGMState s = make_initial_state(data, hyper);
    RngStream rng(1);
    for (int it = 0; it < 60; ++it) {
      gibbs_iteration(s, data, hyper, rng);
      CHECK(is_identifiable(s.G));
      CHECK(in_cone(s.K.matrix(), s.G));
      CHECK(s.Delta > 0.0);
    }
  }

  SUBCASE("clamped structure still moves the continuous blocks") {
    SFGMState s = make_initial_state(data, hyper);
    GibbsOptions opts;
    opts.update_structure = false;
    RngStream rng(2);
    const UndirectedGraph g0 = s.G;
    for (int it = 0; it < 40; ++it) gibbs_iteration(s, data, hyper, rng, opts);
    CHECK(s.G == g0);
    CHECK(s.K.matrix() == MatrixXd::Identity(5, 5));
    CHECK(s.f.cwiseAbs().maxCoeff() > 0.0);
  }

  SUBCASE("identical seeds give identical traces") {
    const ChainResult a = run_sfgm_chain(data, hyper, 150, 50, 0, 42, {});
    const ChainResult b = run_sfgm_chain(data, hyper, 150, 50, 0, 42, {});
    CHECK(a.trace.alpha == b.trace.alpha);
    CHECK(a.trace.lambda == b.trace.lambda);
    CHECK(a.trace.ktri == b.trace.ktri);
    CHECK((a.trace.edges.cast<int>() - b.trace.edges.cast<int>()).cwiseAbs().maxCoeff() == 0);
    const ChainResult c = run_sfgm_chain(data, hyper, 150, 50, 1, 42, {});
    CHECK(a.trace.alpha != c.trace.alpha);
  }
}

TEST_CASE("bayes factor counting rules") {
  Trace t = Trace::allocate(1, 1000, 0);
  t.alpha.setZero();
  t.delta.setOnes();
  t.ktri.setOnes();
  t.edges.setZero();

  SUBCASE("balanced buckets give 1") {
    for (int i = 0; i < 1000; ++i) t.lambda(i, 0) = i < 500 ? 0.5 : 0.001;
    CHECK(bayes_factor_loading(t, 0, 0.01).value == doctest::Approx(1.0));
  }
  SUBCASE("4:1 split") {
    for (int i = 0; i < 1000; ++i) t.lambda(i, 0) = i < 800 ? 0.5 : 0.001;
    CHECK(bayes_factor_loading(t, 0, 0.01).value == doctest::Approx(4.0));
  }
  SUBCASE("empty bucket uses the half-count rule") {
    for (int i = 0; i < 1000; ++i) t.lambda(i, 0) = 0.5;
    const BayesFactor bf = bayes_factor_loading(t, 0, 0.01);
    CHECK(bf.value == doctest::Approx(2001.0));
    CHECK(bf.evidence == "Decisive");
  }
  SUBCASE("labels") {
    CHECK(evidence_label(2.0) == "Not worth more than a bare mention");
    CHECK(evidence_label(5.0) == "Substantial");
    CHECK(evidence_label(50.0) == "Strong");
    CHECK(evidence_label(500.0) == "Decisive");
  }
}

TEST_CASE("posterior summaries") {
  Trace t = Trace::allocate(3, 10, 0);
  t.alpha.setConstant(0.5);
  t.lambda.setConstant(1.0);
  t.delta.setConstant(2.0);
  t.ktri.setZero();
  for (int i = 0; i < 10; ++i) {
    t.ktri(i, 0) = 1.0;
    t.ktri(i, 2) = 1.0;
    t.ktri(i, 5) = 1.0;
    t.edges(i, 0) = i < 6 ? 1 : 0;  // edge (1,2) in 60% of draws
    t.edges(i, 1) = 0;
    t.edges(i, 2) = 1;
  }
  const Summary s = posterior_summaries(t, 0.01);
  CHECK(s.pip(0, 1) == doctest::Approx(0.6));
  CHECK(s.pip(0, 2) == doctest::Approx(0.0));
  CHECK(s.pip(1, 2) == doctest::Approx(1.0));
  REQUIRE(s.median_graph.size() == 2);
  CHECK(s.median_graph[0] == std::pair<int, int>{0, 1});
  CHECK(s.median_graph[1] == std::pair<int, int>{1, 2});
  // constant trace: zero-width intervals
  CHECK(s.alpha.lower95(0) == doctest::Approx(0.5));
  CHECK(s.alpha.upper95(0) == doctest::Approx(0.5));
  CHECK(s.delta_lower95 == doctest::Approx(2.0));
  CHECK(s.k_mean(0, 0) == doctest::Approx(1.0));

  CHECK_THROWS_AS((void)posterior_summaries(std::vector<Trace>{}, 0.01), Error);
}

TEST_CASE("split-chain stability of PIPs on a medium run") {
  RngStream sim_rng(31415);
  const MatrixXd data = simulate_dataset(SimulationSpec::m1(), 200, sim_rng);
  const Hyperparams hyper = Hyperparams::standard(5);
  const ChainResult a = run_sfgm_chain(data, hyper, 9000, 1000, 0, 7, {});
  const int half = a.trace.iterations() / 2;
  MatrixXd first = MatrixXd::Zero(5, 5), second = MatrixXd::Zero(5, 5);
  const auto pairs = vertex_pairs(5);
  for (int i = 0; i < a.trace.iterations(); ++i)
    for (size_t e = 0; e < pairs.size(); ++e) {
      auto& target = i < half ? first : second;
      target(pairs[e].first, pairs[e].second) += a.trace.edges(i, e);
    }
  first /= half;
  second /= a.trace.iterations() - half;
  for (auto [v, w] : pairs) CHECK(std::abs(first(v, w) - second(v, w)) < 0.03);
}

TEST_SUITE_END();

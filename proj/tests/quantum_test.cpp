#include <cmath>
#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "isorc/quantum.hpp"
#include "isorc/stats.hpp"

using namespace isorc;
using namespace isorc_test;

TEST_CASE("G^eps structure and edge lengths") {
  double eps = 0.3;
  auto g = build_geps(eps, QuantumRegion{3, 1.5});
  g.validate();
  const auto& meta = *g.square;
  CHECK(meta.width == 5);
  CHECK(meta.height == 10);  // 2 h / eps rows
  for (int e = 0; e < g.edge_count(); ++e) {
    auto [u, v] = g.primal_edge(e);
    double len = (g.pos(u) - g.pos(v)).norm();
    if (geps_is_short_edge(g, e)) {
      CHECK(len == doctest::Approx(geps_short_edge_length(eps)).epsilon(1e-12));
      CHECK(g.theta(e) == doctest::Approx(eps).epsilon(1e-9));
    } else {
      CHECK(len == doctest::Approx(geps_long_edge_length(eps)).epsilon(1e-12));
      CHECK(g.theta(e) == doctest::Approx(kPi - eps).epsilon(1e-9));
    }
  }
  // eps = pi/2 degenerates to equal lengths
  CHECK(geps_short_edge_length(kPi / 2.0) == doctest::Approx(geps_long_edge_length(kPi / 2.0)));
  CHECK_THROWS(build_geps(0.0, QuantumRegion{3, 1.0}));
  CHECK_THROWS(build_geps(2.0, QuantumRegion{3, 1.0}));
}

TEST_CASE("discretization spec bundles and validates the lattice") {
  auto spec = DiscretizationSpec::make(0.2, QuantumRegion{3, 1.0});
  spec.validate();
  CHECK(spec.lattice.edge_count() > 0);
  spec.eps = 0.3;  // no longer matches the built lattice
  CHECK_THROWS(spec.validate());
}

TEST_CASE("edge probabilities approach the rate asymptotics") {
  double q = 2.0;
  auto rates = quantum_rates(q);
  {
    double eps = 0.1;
    double one_minus_p = 1.0 - edge_weight(eps, ModelParams{q, 1.0}).p;
    CHECK(std::fabs(one_minus_p - rates.lambda0 * eps) < 0.1 * rates.lambda0 * eps);
  }
  {
    double eps = 0.05;
    double p_long = edge_weight(kPi - eps, ModelParams{q, 1.0}).p;
    CHECK(std::fabs(p_long - rates.mu0 * eps) < 0.1 * rates.mu0 * eps);
  }
}

TEST_CASE("continuum clusters: counting and the interval oracle") {
  QuantumRegion region{4, 2.0};
  ContinuumConfig cc;
  cc.region = region;
  cc.cuts.resize(4);
  cc.bridges.resize(3);
  {
    ContinuumClusters cl(cc);
    CHECK(cl.cluster_count() == 4);  // w untouched columns
  }
  cc.bridges[1].push_back(1.0);  // join columns 1 and 2
  {
    ContinuumClusters cl(cc);
    CHECK(cl.cluster_count() == 3);
    CHECK(cl.connected(1, 0.2, 2, 1.8));
    CHECK(!cl.connected(0, 0.2, 1, 0.2));
  }
  cc.cuts[1].push_back(0.7);  // split column 1 below the bridge
  {
    ContinuumClusters cl(cc);
    CHECK(cl.cluster_count() == 4);
    CHECK(!cl.connected(1, 0.2, 2, 1.8));
    CHECK(cl.connected(1, 0.9, 2, 1.8));
    CHECK(cl.reaches_top(1, 0.9));
    CHECK(!cl.reaches_bottom(1, 0.9));
    CHECK_THROWS(cl.interval_node(7, 0.5));
    CHECK_THROWS(cl.interval_node(0, 5.0));
  }

  // randomized oracle: a fine discretisation must give identical answers
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    ContinuumConfig rc;
    rc.region = {3, 1.0};
    rc.cuts.resize(3);
    rc.bridges.resize(2);
    for (auto& col : rc.cuts)
      for (int i = rng.poisson(2.0); i > 0; --i) col.push_back(rng.uniform01());
    for (auto& gap : rc.bridges)
      for (int i = rng.poisson(2.0); i > 0; --i) gap.push_back(rng.uniform01());
    for (auto& col : rc.cuts) std::sort(col.begin(), col.end());
    for (auto& gap : rc.bridges) std::sort(gap.begin(), gap.end());

    ContinuumClusters cl(rc);
    // oracle: grid of sample points unioned through a dense graph; skip
    // trials where events collide within a grid cell
    const int G = 4096;
    bool collision = false;
    std::vector<double> events;
    for (auto& col : rc.cuts) events.insert(events.end(), col.begin(), col.end());
    for (auto& gap : rc.bridges) events.insert(events.end(), gap.begin(), gap.end());
    std::sort(events.begin(), events.end());
    for (std::size_t i = 0; i + 1 < events.size(); ++i)
      if (events[i + 1] - events[i] < 3.0 / G) collision = true;
    if (collision) continue;
    auto node = [&](int col, int k) { return col * (G + 1) + k; };
    UnionFind uf(3 * (G + 1));
    auto height = [&](int k) { return k / static_cast<double>(G); };
    for (int col = 0; col < 3; ++col)
      for (int k = 0; k < G; ++k) {
        bool cut_between = false;
        for (double h : rc.cuts[col])
          if (h > height(k) && h <= height(k + 1)) cut_between = true;
        if (!cut_between) uf.merge(node(col, k), node(col, k + 1));
      }
    for (int gap = 0; gap < 2; ++gap)
      for (double h : rc.bridges[gap]) {
        int k = std::min(G, static_cast<int>(h * G));
        uf.merge(node(gap, k), node(gap + 1, k));
      }
    for (int col = 0; col < 3; ++col)
      for (int k = 0; k <= G; k += 1024)
        for (int col2 = 0; col2 < 3; ++col2)
          for (int k2 = 0; k2 <= G; k2 += 1024) {
            double h1 = height(k), h2 = height(k2);
            bool near_event = false;
            for (double h : events)
              if (std::fabs(h - h1) < 2.0 / G || std::fabs(h - h2) < 2.0 / G) near_event = true;
            if (near_event) continue;
            bool expect = uf.connected(node(col, k), node(col2, k2));
            CHECK(expect == cl.connected(col, h1, col2, h2));
          }
  }
}

TEST_CASE("discrete-to-continuum mapping preserves connectivity") {
  double eps = 0.1, q = 2.0;
  QuantumRegion region{3, 1.0};
  auto g = build_geps(eps, region);
  const auto& meta = *g.square;
  Rng rng(808);
  auto view = make_view(g, ModelParams{q, 1.0});
  for (int trial = 0; trial < 20; ++trial) {
    Configuration c = Configuration::zeros(g.edge_count(), g.version);
    for (auto& b : c.open) b = rng.bernoulli(0.5);
    auto cc = map_to_continuum(g, c, eps, region);
    ContinuumClusters cl(cc);

    UnionFind uf(g.vertex_count());
    for (int e = 0; e < g.edge_count(); ++e) {
      if (!c.is_open(e)) continue;
      auto [u, v] = g.primal_edge(e);
      uf.merge(u, v);
    }
    // marked lattice points: primal vertices on even rows
    for (int j = 0; j + 2 <= meta.height; j += 2)
      for (int j2 = j; j2 <= meta.height; j2 += 2)
        for (int i = 0; i <= meta.width; i += 2)
          for (int i2 = 0; i2 <= meta.width; i2 += 2) {
            int va = meta.vid(i, j), vb = meta.vid(i2, j2);
            if (!g.verts[va].primal || !g.verts[vb].primal) continue;
            double ha = j * eps / 2.0, hb = j2 * eps / 2.0;
            if (ha > region.height || hb > region.height) continue;
            CHECK(uf.connected(va, vb) == cl.connected(i / 2, ha, i2 / 2, hb));
          }
  }
}

TEST_CASE("free poisson sampling and the q=1 cut-count law") {
  QuantumParams params{0.7, 0.7, 1.0};
  QuantumRegion region{2, 3.0};
  Rng rng(1234);
  QuantumSampleSettings settings;
  settings.method = QuantumMethod::FreePoisson;

  double mean = params.lambda * region.height;
  std::vector<std::int64_t> hist(40, 0);
  const int samples = 20000;
  for (int s = 0; s < samples; ++s) {
    auto cc = sample_quantum(params, region, settings, rng);
    std::size_t count = cc.cuts[0].size();
    if (count >= hist.size()) hist.resize(count + 1, 0);
    ++hist[count];
  }
  auto empirical = normalized_histogram(hist);
  auto pmf = poisson_pmf(mean, hist.size() - 1);
  std::vector<std::int64_t> obs = hist;
  double chi2 = 0.0;
  int dof = 0;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    double e = pmf[k] * samples;
    if (e < 5.0) continue;
    chi2 += (obs[k] - e) * (obs[k] - e) / e;
    ++dof;
  }
  CHECK(chi_square_pvalue(chi2, dof - 1) > 0.001);

  CHECK_THROWS(sample_quantum(QuantumParams{0.5, 1.0, 2.0}, region, settings, rng));
}

TEST_CASE("discretized q=1 sampler also gives Poisson cut counts") {
  double q = 1.0;
  QuantumParams params = QuantumParams::critical_for(q);
  CHECK(params.critical());
  QuantumRegion region{3, 2.0};
  QuantumSampleSettings settings;
  settings.method = QuantumMethod::Discretized;
  settings.eps = 0.02;
  settings.sweeps = 1;   // q = 1 equilibrates in one sweep
  settings.burn_in = 0;
  Rng rng(777);

  double mean = params.lambda * region.height;
  std::vector<std::int64_t> hist(40, 0);
  const int samples = 4000;
  for (int s = 0; s < samples; ++s) {
    auto cc = sample_quantum(params, region, settings, rng);
    std::size_t count = cc.cuts[1].size();
    if (count >= hist.size()) hist.resize(count + 1, 0);
    ++hist[count];
  }
  auto pmf = poisson_pmf(mean, hist.size() - 1);
  double chi2 = 0.0;
  int dof = 0;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    double e = pmf[k] * samples;
    if (e < 5.0) continue;
    chi2 += (hist[k] - e) * (hist[k] - e) / e;
    ++dof;
  }
  CHECK(chi_square_pvalue(chi2, dof - 1) > 0.001);
}

TEST_CASE("zero-height region gives the empty configuration") {
  Rng rng(5);
  QuantumSampleSettings settings;
  settings.method = QuantumMethod::Discretized;
  auto cc = sample_quantum(QuantumParams::critical_for(2.0), QuantumRegion{3, 0.0}, settings, rng);
  for (auto& col : cc.cuts) CHECK(col.empty());
  for (auto& gap : cc.bridges) CHECK(gap.empty());
}

TEST_CASE("poisson limit check") {
  Rng rng(31415);
  auto res = poisson_limit_check(0.05, 4.0, 2.0, 100000, rng);
  CHECK(res.tv < 0.05);

  // single edge: exact two-point total variation against Poisson
  auto res1 = poisson_limit_check(4.0, 4.0, 2.0, 200000, rng);
  double p = quantum_rates(2.0).lambda0 * 4.0;  // Bernoulli(1) probability
  auto pmf = poisson_pmf(p, 8);
  double exact_tv = 0.5 * (std::fabs((1.0 - p) - pmf[0]) + std::fabs(p - pmf[1]));
  for (std::size_t k = 2; k < pmf.size(); ++k) exact_tv += 0.5 * pmf[k];
  CHECK(res1.tv == doctest::Approx(exact_tv).epsilon(0.05));

  CHECK_THROWS(poisson_limit_check(10.0, 4.0, 2.0, 10, rng));  // lambda0*eps > 1
}

TEST_CASE("vertical rescaling invariance at q = 1") {
  // doubling the rates and halving the heights gives the same cluster law
  Rng rng(2020);
  QuantumSampleSettings settings;
  settings.method = QuantumMethod::FreePoisson;
  QuantumParams base{0.8, 0.8, 1.0};
  QuantumParams scaled{1.6, 1.6, 1.0};
  QuantumRegion tall{3, 2.0}, half{3, 1.0};

  const int samples = 6000;
  std::map<int, std::int64_t> hist_a, hist_b;
  for (int s = 0; s < samples; ++s) {
    auto ca = sample_quantum(base, tall, settings, rng);
    auto cb = sample_quantum(scaled, half, settings, rng);
    hist_a[ContinuumClusters(ca).cluster_count()]++;
    hist_b[ContinuumClusters(cb).cluster_count()]++;
  }
  // two-sample chi-square over the shared support
  double chi2 = 0.0;
  int dof = 0;
  std::set<int> keys;
  for (auto& [k, v] : hist_a) keys.insert(k);
  for (auto& [k, v] : hist_b) keys.insert(k);
  for (int k : keys) {
    double a = static_cast<double>(hist_a[k]), b = static_cast<double>(hist_b[k]);
    if (a + b < 10) continue;
    chi2 += (a - b) * (a - b) / (a + b);
    ++dof;
  }
  CHECK(chi_square_pvalue(chi2, std::max(1, dof - 1)) > 0.001);
}

TEST_CASE("critical parameter table") {
  for (double q : {1.0, 2.0, 4.0, 6.0}) {
    auto params = QuantumParams::critical_for(q);
    CHECK(params.critical());
    CHECK(params.mu / params.lambda == doctest::Approx(q).epsilon(1e-12));
  }
}

#ifndef ISORC_QUANTUM_HPP
#define ISORC_QUANTUM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "isorc/builders.hpp"
#include "isorc/rcm.hpp"
#include "isorc/rng.hpp"
#include "isorc/stats.hpp"
#include "isorc/weights.hpp"

namespace isorc {

struct QuantumParams {
  double lambda = 0.0;  // cut intensity on Z x R
  double mu = 0.0;      // bridge intensity on (1/2 + Z) x R
  double q = 1.0;

  void validate() const {
    if (!(lambda > 0.0 && mu > 0.0)) throw std::invalid_argument("QuantumParams: rates must be positive");
    if (!(q >= 1.0)) throw std::invalid_argument("QuantumParams: require q >= 1");
  }
  bool critical(double tol = 1e-9) const { return std::fabs(mu / lambda - q) < tol; }

  static QuantumParams critical_for(double q) {
    auto rates = quantum_rates(q);
    return {2.0 * rates.lambda0, 2.0 * rates.mu0, q};
  }
};

struct QuantumRegion {
  int columns = 1;     // vertical lines 0..columns-1
  double height = 1.0; // heights live in [0, height]
};

// Cuts on the lines, bridges between neighbouring lines.  Heights from
// discretised samples are exact multiples of eps/4 (odd multiples), which
// keeps replay bit-stable; free Poisson samples carry plain doubles.
struct ContinuumConfig {
  QuantumRegion region;
  std::vector<std::vector<double>> cuts;     // per column, sorted
  std::vector<std::vector<double>> bridges;  // per gap (column m to m+1), sorted
  double height_unit = 0.0;                  // eps/4 for discretised configs, else 0
};

enum class LatticeConvention { Rescaled, Dilated };

// G^eps: alternating horizontal angles (pi - eps, eps) over vertical
// angle 0.  The window realises exactly `columns` complete vertical
// lines (even rhombus columns carry the short line edges, odd columns
// the long bridge edges) with rows = round(2 * height / eps) rhombus
// rows.  Short edges subtend eps, long edges pi - eps.
inline IsoradialGraph build_geps(double eps, const QuantumRegion& region) {
  if (!(eps > 0.0 && eps <= kPi / 2.0))
    throw std::invalid_argument("build_geps: eps must lie in (0, pi/2]");
  if (region.columns < 2 || region.height <= 0.0)
    throw std::invalid_argument("build_geps: region too small");
  int rows = std::max(2, static_cast<int>(std::llround(2.0 * region.height / eps)));
  AngleSequences seqs;
  seqs.alpha.assign(2 * region.columns - 1, 0.0);
  for (int j = 0; j < rows; ++j) seqs.beta.push_back(j % 2 == 0 ? kPi - eps : eps);
  return build_square_lattice(seqs);
}

inline double geps_short_edge_length(double eps) { return 2.0 * std::sin(eps / 2.0); }
inline double geps_long_edge_length(double eps) { return 2.0 * std::cos(eps / 2.0); }

// A G^eps lattice handle bundled with its discretisation parameters.
struct DiscretizationSpec {
  double eps = 0.05;
  QuantumRegion region;
  IsoradialGraph lattice;

  static DiscretizationSpec make(double eps, const QuantumRegion& region) {
    DiscretizationSpec spec;
    spec.eps = eps;
    spec.region = region;
    spec.lattice = build_geps(eps, region);
    return spec;
  }

  // alternating horizontal angles over vertical angle zero
  void validate() const {
    if (!(eps > 0.0 && eps <= kPi / 2.0))
      throw std::invalid_argument("DiscretizationSpec: eps out of range");
    if (!lattice.square) throw std::invalid_argument("DiscretizationSpec: no lattice");
    const auto& meta = *lattice.square;
    for (int i = 0; i < meta.width; ++i)
      if (angle_gap_mod_pi(lattice.tracks[meta.col_track[i]].angle, 0.0) > 1e-9)
        throw std::invalid_argument("DiscretizationSpec: vertical angles not zero");
    for (int j = 0; j < meta.height; ++j) {
      double want = j % 2 == 0 ? kPi - eps : eps;
      if (angle_gap_mod_pi(lattice.tracks[meta.row_track[j]].angle, want) > 1e-9)
        throw std::invalid_argument("DiscretizationSpec: horizontal angles not alternating");
    }
  }
};

// rhombus classification inside G^eps: even rhombus columns carry the
// short (line) edges, odd columns the long (bridge) edges
inline bool geps_is_short_edge(const IsoradialGraph& g, int e) {
  int W = g.square->width;
  return (e % W) % 2 == 0;
}

// Maps a discrete configuration on G^eps to the continuum: closed short
// edges become cuts, open long edges become bridges, at heights within
// O(eps) of (j + 1/2) eps/2 (rescaled convention; doubled when dilated).
//
// A bridge of G^eps is slanted: its endpoints sit one row apart, the
// side alternating with the row parity.  Events of one row band are
// therefore staggered by a parity-signed, column-graded offset, which
// makes the interval connectivity of the mapped configuration equal to
// the discrete connectivity exactly, configuration by configuration.
// All heights are exact integer multiples of eps / (16 (C + 1)), which
// keeps replay bit-stable.
inline ContinuumConfig map_to_continuum(const IsoradialGraph& g, const Configuration& config,
                                        double eps, const QuantumRegion& region,
                                        LatticeConvention convention = LatticeConvention::Rescaled) {
  if (!g.square) throw std::invalid_argument("map_to_continuum: need G^eps metadata");
  const auto& meta = *g.square;
  ContinuumConfig cc;
  cc.region = region;
  int C = region.columns;
  double unit = eps / (16.0 * (C + 1));
  if (convention == LatticeConvention::Dilated) unit *= 2.0;
  cc.height_unit = unit;
  cc.cuts.resize(C);
  cc.bridges.resize(C > 0 ? C - 1 : 0);
  for (int e = 0; e < g.edge_count(); ++e) {
    int ci = e % meta.width, rj = e / meta.width;
    long long mid = static_cast<long long>(2 * rj + 1) * 4 * (C + 1);
    int sign = rj % 2 == 0 ? -1 : 1;
    if (ci % 2 == 0) {
      if (!config.is_open(e)) {
        int m = ci / 2;
        cc.cuts.at(m).push_back(static_cast<double>(mid + sign * 2 * (C - m)) * unit);
      }
    } else {
      if (config.is_open(e)) {
        int gp = (ci - 1) / 2;
        cc.bridges.at(gp).push_back(static_cast<double>(mid + sign * (2 * (C - gp) - 1)) * unit);
      }
    }
  }
  for (auto& v : cc.cuts) std::sort(v.begin(), v.end());
  for (auto& v : cc.bridges) std::sort(v.begin(), v.end());
  return cc;
}

enum class QuantumMethod { Discretized, FreePoisson };

struct QuantumSampleSettings {
  QuantumMethod method = QuantumMethod::Discretized;
  double eps = 0.05;
  int sweeps = 16;
  int burn_in = 100;
  LatticeConvention convention = LatticeConvention::Rescaled;
};

// Samples the quantum random-cluster model.  The discretised method runs
// heat-bath dynamics on G^eps at beta chosen to match mu/lambda = beta^2 q
// and rescales heights so the limiting intensities are exactly (lambda,
// mu); free_poisson is the unweighted law, valid only at q = 1.
inline ContinuumConfig sample_quantum(const QuantumParams& params, const QuantumRegion& region,
                                      const QuantumSampleSettings& settings, Rng& rng) {
  params.validate();
  if (region.height <= 0.0) {
    ContinuumConfig cc;
    cc.region = region;
    cc.cuts.resize(std::max(region.columns, 0));
    cc.bridges.resize(std::max(region.columns - 1, 0));
    return cc;
  }
  if (settings.method == QuantumMethod::FreePoisson) {
    if (std::fabs(params.q - 1.0) > 1e-12)
      throw std::invalid_argument("sample_quantum: free_poisson requires q = 1");
    ContinuumConfig cc;
    cc.region = region;
    cc.cuts.resize(region.columns);
    cc.bridges.resize(region.columns > 0 ? region.columns - 1 : 0);
    for (auto& column : cc.cuts) {
      int count = rng.poisson(params.lambda * region.height);
      for (int i = 0; i < count; ++i) column.push_back(rng.uniform01() * region.height);
      std::sort(column.begin(), column.end());
    }
    for (auto& gap : cc.bridges) {
      int count = rng.poisson(params.mu * region.height);
      for (int i = 0; i < count; ++i) gap.push_back(rng.uniform01() * region.height);
      std::sort(gap.begin(), gap.end());
    }
    return cc;
  }

  if (region.columns < 2) throw std::invalid_argument("sample_quantum: empty region");
  double beta = std::sqrt(params.mu / (params.lambda * params.q));
  auto rates = quantum_rates(params.q);
  // the lattice realises cut intensity 2 lambda0 / beta per unit height;
  // heights are scaled so the requested lambda is met exactly in the limit
  double scale = (2.0 * rates.lambda0 / beta) / params.lambda;
  // sample on a region tall enough that rescaling covers the request
  QuantumRegion lattice_region{region.columns, region.height / scale};
  IsoradialGraph g = build_geps(settings.eps, lattice_region);
  WeightedView view = make_view(g, ModelParams{params.q, beta});
  Rng sampler_rng(rng.next_u64());
  Configuration config = sample_heat_bath(view, params.q, BoundaryCondition::free(),
                                          settings.sweeps, sampler_rng, settings.burn_in);
  ContinuumConfig cc = map_to_continuum(g, config, settings.eps, lattice_region,
                                        settings.convention);
  cc.region = region;
  cc.height_unit *= scale;
  for (auto& column : cc.cuts) {
    for (auto& h : column) h *= scale;
    column.erase(std::remove_if(column.begin(), column.end(),
                                [&](double h) { return h > region.height; }),
                 column.end());
  }
  for (auto& gap : cc.bridges) {
    for (auto& h : gap) h *= scale;
    gap.erase(std::remove_if(gap.begin(), gap.end(),
                             [&](double h) { return h > region.height; }),
              gap.end());
  }
  return cc;
}

// Interval clusters of the continuum picture: vertical lines minus cuts,
// merged across bridges.
class ContinuumClusters {
 public:
  explicit ContinuumClusters(const ContinuumConfig& cc) : cc_(cc) {
    offsets_.resize(cc.cuts.size() + 1, 0);
    for (std::size_t m = 0; m < cc.cuts.size(); ++m)
      offsets_[m + 1] = offsets_[m] + static_cast<int>(cc.cuts[m].size()) + 1;
    uf_ = std::make_unique<UnionFind>(offsets_.back());
    for (std::size_t gap = 0; gap < cc.bridges.size(); ++gap)
      for (double h : cc.bridges[gap])
        uf_->merge(interval_node(static_cast<int>(gap), h),
                   interval_node(static_cast<int>(gap) + 1, h));
  }

  int interval_node(int column, double h) const {
    if (column < 0 || column >= static_cast<int>(cc_.cuts.size()))
      throw std::invalid_argument("ContinuumClusters: column out of range");
    if (h < 0.0 || h > cc_.region.height)
      throw std::invalid_argument("ContinuumClusters: height outside region");
    const auto& cuts = cc_.cuts[column];
    int idx = static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), h) - cuts.begin());
    return offsets_[column] + idx;
  }

  bool connected(int col_a, double h_a, int col_b, double h_b) {
    return uf_->connected(interval_node(col_a, h_a), interval_node(col_b, h_b));
  }
  bool reaches_top(int column, double h) {
    return uf_->connected(interval_node(column, h), interval_node(column, cc_.region.height));
  }
  bool reaches_bottom(int column, double h) {
    return uf_->connected(interval_node(column, h), interval_node(column, 0.0));
  }
  int cluster_count() { return uf_->count(); }

 private:
  ContinuumConfig cc_;
  std::vector<int> offsets_;
  std::unique_ptr<UnionFind> uf_;
};

struct PoissonCheckResult {
  double tv = 0.0;
  std::vector<std::int64_t> histogram;
};

// Closed-short-edge count over a line of length L at step eps versus the
// Poisson limit; the TV distance is bounded by lambda0^2 L eps.
inline PoissonCheckResult poisson_limit_check(double eps, double L, double q,
                                              std::int64_t samples, Rng& rng) {
  auto rates = quantum_rates(q);
  double p = rates.lambda0 * eps;
  if (p > 1.0) throw std::invalid_argument("poisson_limit_check: lambda0 * eps exceeds 1");
  int n = std::max<int>(1, static_cast<int>(std::llround(L / eps)));
  double mean = rates.lambda0 * L;
  PoissonCheckResult out;
  out.histogram.assign(static_cast<std::size_t>(mean + 10.0 * std::sqrt(mean) + 20), 0);
  for (std::int64_t s = 0; s < samples; ++s) {
    int count = 0;
    for (int i = 0; i < n; ++i) count += rng.bernoulli(p) ? 1 : 0;
    if (count >= static_cast<int>(out.histogram.size()))
      out.histogram.resize(count + 1, 0);
    ++out.histogram[count];
  }
  auto empirical = normalized_histogram(out.histogram);
  auto pmf = poisson_pmf(mean, out.histogram.size() - 1);
  out.tv = tv_distance(empirical, pmf);
  return out;
}

}  // namespace isorc

#endif

#ifndef ISORC_PUSHFORWARD_HPP
#define ISORC_PUSHFORWARD_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "isorc/graph.hpp"
#include "isorc/rcm.hpp"
#include "isorc/stt.hpp"

namespace isorc {

// Exact law of the beta = 1 random-cluster model as a vector over masks.
inline std::vector<long double> exact_law_vector(const IsoradialGraph& g, double q,
                                                 const BoundaryCondition& bc) {
  auto view = make_view(g, ModelParams{q, 1.0});
  ExactDistribution dist(view, q, bc);
  std::vector<long double> v(dist.size());
  for (std::uint64_t m = 0; m < dist.size(); ++m) v[m] = dist.prob(m);
  return v;
}

// Pushes an exact law over {0,1}^E through one coupled transformation:
// deterministic kernel rows move mass, random rows split it.  The graph
// is transformed alongside.
inline void push_distribution(IsoradialGraph& g, const SttSite& site, double q,
                              std::vector<long double>& dist) {
  auto y = image_edge_weights(g, site, q);
  std::vector<long double> out(dist.size(), 0.0L);
  int b0 = site.rhombi[0], b1 = site.rhombi[1], b2 = site.rhombi[2];
  std::vector<std::vector<SttOutcome>> rows(8);
  for (int in = 0; in < 8; ++in) rows[in] = stt_kernel_row(site.is_triangle, y, q, in);
  for (std::uint64_t mask = 0; mask < dist.size(); ++mask) {
    if (dist[mask] == 0.0L) continue;
    int local = ((mask >> b0) & 1) | (((mask >> b1) & 1) << 1) | (((mask >> b2) & 1) << 2);
    std::uint64_t cleared = mask & ~((1ull << b0) | (1ull << b1) | (1ull << b2));
    for (const auto& outcome : rows[local]) {
      std::uint64_t to = cleared;
      if (outcome.mask & 1) to |= 1ull << b0;
      if (outcome.mask & 2) to |= 1ull << b1;
      if (outcome.mask & 4) to |= 1ull << b2;
      out[to] += dist[mask] * static_cast<long double>(outcome.prob);
    }
  }
  dist.swap(out);
  transform_graph(g, site);
}

// Pushes the law through a sequence of sites given by their centres (the
// move sequence of a track exchange is configuration-independent).
inline std::vector<long double> push_through_centres(IsoradialGraph& g,
                                                     const std::vector<int>& centres, double q,
                                                     std::vector<long double> dist) {
  for (int c : centres) {
    auto site = site_at(g, c);
    if (!site) throw std::runtime_error("push_through_centres: missing site");
    push_distribution(g, *site, q, dist);
  }
  return dist;
}

// Connection-partition law of marked vertices under a mask law.
inline std::map<std::vector<int>, double> connection_law_from_vector(
    const IsoradialGraph& g, const std::vector<long double>& dist,
    const std::vector<int>& marked_vertex_ids) {
  auto view = make_view(g, ModelParams{1.0, 1.0});
  std::vector<int> dense(g.vertex_count(), -1);
  for (int i = 0; i < view.n; ++i) dense[view.vertex_ids[i]] = i;
  std::vector<int> marked;
  for (int v : marked_vertex_ids) {
    if (v < 0 || dense[v] < 0)
      throw std::invalid_argument("connection_law_from_vector: marked vertex not primal");
    marked.push_back(dense[v]);
  }
  std::map<std::vector<int>, double> law;
  int m = static_cast<int>(view.edges.size());
  for (std::uint64_t mask = 0; mask < dist.size(); ++mask) {
    if (dist[mask] == 0.0L) continue;
    UnionFind uf(view.n);
    for (int e = 0; e < m; ++e)
      if (mask >> e & 1) uf.merge(view.edges[e].first, view.edges[e].second);
    law[ExactDistribution::partition_signature(uf, marked)] += static_cast<double>(dist[mask]);
  }
  return law;
}

}  // namespace isorc

#endif

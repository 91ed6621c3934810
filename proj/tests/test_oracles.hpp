#ifndef ISORC_TEST_ORACLES_HPP
#define ISORC_TEST_ORACLES_HPP

#include <vector>

#include "isorc/exchange.hpp"
#include "isorc/graph.hpp"
#include "isorc/pushforward.hpp"
#include "isorc/rcm.hpp"
#include "isorc/stt.hpp"

namespace isorc_test {

using namespace isorc;

// pairwise connectivity matrix of the primal vertices of a configuration
inline std::vector<std::vector<bool>> primal_connectivity(const IsoradialGraph& g,
                                                          const Configuration& config) {
  auto view = make_view(g, ModelParams{1.0, 1.0});
  UnionFind uf(view.n);
  for (int e = 0; e < static_cast<int>(view.edges.size()); ++e)
    if (config.is_open(e)) uf.merge(view.edges[e].first, view.edges[e].second);
  std::vector<std::vector<bool>> conn(view.n, std::vector<bool>(view.n, false));
  for (int a = 0; a < view.n; ++a)
    for (int b = 0; b < view.n; ++b) conn[a][b] = uf.connected(a, b);
  return conn;
}

}  // namespace isorc_test

#endif

#ifndef ISORC_EVENTS_HPP
#define ISORC_EVENTS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "isorc/graph.hpp"
#include "isorc/rcm.hpp"

namespace isorc {

enum class Orientation { Horizontal, Vertical };

// Region between tracks s_i..s_j and t_k..t_l in logical indices
// (base-centred, as built).  Resolves on fresh square-lattice graphs.
struct LatticeDomain {
  int i = 0, j = 0, k = 0, l = 0;

  static LatticeDomain centred(int m, int n) { return {-m, m, -n, n}; }
};

namespace detail {

struct ResolvedDomain {
  int ci0, ci1, rj0, rj1;  // physical rhombus column/row ranges, inclusive
  const SquareMeta* meta;
};

inline ResolvedDomain resolve(const IsoradialGraph& g, const LatticeDomain& d) {
  if (!g.square) throw std::invalid_argument("domain: graph has no square metadata");
  const auto& meta = *g.square;
  if (meta.grid_version != g.version)
    throw std::invalid_argument("domain: square geometry is stale (graph was transformed)");
  ResolvedDomain r{d.i + meta.base_col, d.j + meta.base_col, d.k + meta.base_row,
                   d.l + meta.base_row, &meta};
  if (r.ci0 > r.ci1 || r.rj0 > r.rj1 || r.ci0 < 0 || r.ci1 >= meta.width || r.rj0 < 0 ||
      r.rj1 >= meta.height)
    throw std::invalid_argument("domain: empty or out of range");
  return r;
}

inline int rhombus_id(const SquareMeta& meta, int ci, int rj) { return rj * meta.width + ci; }

}  // namespace detail

// Open path inside the domain joining its two opposite sides.  The dual
// colour runs the same test on the dual graph with complemented states.
inline bool crossing(const IsoradialGraph& g, const Configuration& config,
                     const LatticeDomain& domain, Orientation orientation,
                     Color color = Color::Primal) {
  if (config.version != g.version) throw std::invalid_argument("crossing: stale configuration");
  auto rd = detail::resolve(g, domain);
  const auto& meta = *rd.meta;
  bool primal = color == Color::Primal;

  UnionFind uf(g.vertex_count());
  for (int rj = rd.rj0; rj <= rd.rj1; ++rj)
    for (int ci = rd.ci0; ci <= rd.ci1; ++ci) {
      int e = detail::rhombus_id(meta, ci, rj);
      bool open = primal ? config.is_open(e) : !config.is_open(e);
      if (!open) continue;
      auto [u, v] = primal ? g.primal_edge(e) : g.dual_edge(e);
      uf.merge(u, v);
    }

  std::set<int> source_roots;
  bool horizontal = orientation == Orientation::Horizontal;
  int lo_line = horizontal ? rd.ci0 : rd.rj0;
  int hi_line = horizontal ? rd.ci1 + 1 : rd.rj1 + 1;
  int span0 = horizontal ? rd.rj0 : rd.ci0;
  int span1 = horizontal ? rd.rj1 + 1 : rd.ci1 + 1;
  for (int s = span0; s <= span1; ++s) {
    int vtx = horizontal ? meta.vid(lo_line, s) : meta.vid(s, lo_line);
    if (g.verts[vtx].primal == primal) source_roots.insert(uf.find(vtx));
  }
  for (int s = span0; s <= span1; ++s) {
    int vtx = horizontal ? meta.vid(hi_line, s) : meta.vid(s, hi_line);
    if (g.verts[vtx].primal == primal && source_roots.count(uf.find(vtx))) return true;
  }
  return false;
}

// Open circuit inside R(m2; n) surrounding the base segment between
// x_{-m1,0} and x_{m1,0}.  The circuit may visit base vertices but must
// not cross the base strictly inside the protected segment; detection is
// by winding parity of cluster cycles around the segment midpoint, with
// protected base vertices split into lower/upper copies.
inline bool circuit(const IsoradialGraph& g, const Configuration& config, int m1, int m2,
                    int n, Color color = Color::Primal) {
  if (m1 > m2) throw std::invalid_argument("circuit: need m1 <= m2");
  if (m1 < 1) throw std::invalid_argument("circuit: degenerate protected segment");
  if (config.version != g.version) throw std::invalid_argument("circuit: stale configuration");
  auto rd = detail::resolve(g, LatticeDomain::centred(m2, n));
  const auto& meta = *rd.meta;
  bool primal = color == Color::Primal;

  // node ids: vertex v -> v (lower copy), or split upper copy for
  // protected base vertices of the circuit colour
  std::map<int, int> upper_copy;
  int next_node = g.vertex_count();
  for (int i = -m1 + 1; i <= m1 - 1; ++i) {
    int ci = i + meta.base_col;
    if (ci < 0 || ci > meta.width) continue;
    int v = meta.vid(ci, meta.base_row);
    if (g.verts[v].primal == primal) upper_copy[v] = next_node++;
  }

  Vec2 left = g.pos(meta.vid(-m1 + meta.base_col, meta.base_row));
  Vec2 right = g.pos(meta.vid(m1 + meta.base_col, meta.base_row));
  Vec2 z{(left.x + right.x) / 2 + 1e-7, (left.y + right.y) / 2};

  struct Arc {
    int a, b;
    int parity;
  };
  std::vector<Arc> arcs;
  double base_y = g.pos(meta.vid(meta.base_col, meta.base_row)).y;
  for (int rj = rd.rj0; rj <= rd.rj1; ++rj)
    for (int ci = rd.ci0; ci <= rd.ci1; ++ci) {
      int e = detail::rhombus_id(meta, ci, rj);
      bool open = primal ? config.is_open(e) : !config.is_open(e);
      if (!open) continue;
      auto [u, v] = primal ? g.primal_edge(e) : g.dual_edge(e);
      Vec2 pu = g.pos(u), pv = g.pos(v);
      // downward ray from z: count strict crossings below the base midpoint
      int par = 0;
      if ((pu.x < z.x) != (pv.x < z.x)) {
        double t = (z.x - pu.x) / (pv.x - pu.x);
        double ycross = pu.y + t * (pv.y - pu.y);
        if (ycross < z.y) par = 1;
      }
      auto node = [&](int vtx, int other_vtx) {
        auto it = upper_copy.find(vtx);
        if (it == upper_copy.end()) return vtx;
        return g.pos(other_vtx).y > base_y ? it->second : vtx;
      };
      arcs.push_back({node(u, v), node(v, u), par});
    }

  // odd-cycle detection with respect to crossing parity
  std::vector<int> colour(next_node, -1);
  std::vector<std::vector<std::pair<int, int>>> adj(next_node);
  for (const auto& arc : arcs) {
    adj[arc.a].push_back({arc.b, arc.parity});
    adj[arc.b].push_back({arc.a, arc.parity});
  }
  std::vector<int> stack;
  for (int s = 0; s < next_node; ++s) {
    if (colour[s] != -1 || adj[s].empty()) continue;
    colour[s] = 0;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto [w, par] : adj[v]) {
        int want = colour[v] ^ par;
        if (colour[w] == -1) {
          colour[w] = want;
          stack.push_back(w);
        } else if (colour[w] != want) {
          return true;
        }
      }
    }
  }
  return false;
}

enum class RadiusMetric { Tracks, Euclidean };

// Cluster of the origin reaches the boundary of Lambda(n) (track metric)
// or of the Euclidean ball B_n.
inline bool radius(const IsoradialGraph& g, const Configuration& config, int n,
                   RadiusMetric metric = RadiusMetric::Tracks) {
  if (config.version != g.version) throw std::invalid_argument("radius: stale configuration");
  if (!g.square) throw std::invalid_argument("radius: need square metadata");
  const auto& meta = *g.square;
  int origin = meta.vid(meta.base_col, meta.base_row);
  if (!g.verts[origin].primal) throw std::invalid_argument("radius: origin is not primal");
  if (n == 0) return true;

  UnionFind uf(g.vertex_count());
  std::vector<char> in_region(g.vertex_count(), 0);
  if (metric == RadiusMetric::Tracks) {
    auto rd = detail::resolve(g, LatticeDomain::centred(n, n));
    for (int rj = rd.rj0; rj <= rd.rj1; ++rj)
      for (int ci = rd.ci0; ci <= rd.ci1; ++ci) {
        int e = detail::rhombus_id(meta, ci, rj);
        if (!config.is_open(e)) continue;
        auto [u, v] = g.primal_edge(e);
        uf.merge(u, v);
      }
    int root = uf.find(origin);
    for (int i = rd.ci0; i <= rd.ci1 + 1; ++i) {
      if (uf.find(meta.vid(i, rd.rj0)) == root && g.verts[meta.vid(i, rd.rj0)].primal) return true;
      if (uf.find(meta.vid(i, rd.rj1 + 1)) == root && g.verts[meta.vid(i, rd.rj1 + 1)].primal)
        return true;
    }
    for (int j = rd.rj0; j <= rd.rj1 + 1; ++j) {
      if (uf.find(meta.vid(rd.ci0, j)) == root && g.verts[meta.vid(rd.ci0, j)].primal) return true;
      if (uf.find(meta.vid(rd.ci1 + 1, j)) == root && g.verts[meta.vid(rd.ci1 + 1, j)].primal)
        return true;
    }
    return false;
  }

  // Euclidean: clusters of omega restricted to B_n; the boundary is
  // reached when the cluster holds a vertex within one unit of it.
  for (int v = 0; v < g.vertex_count(); ++v)
    in_region[v] = g.pos(v).norm() <= static_cast<double>(n);
  for (int e = 0; e < g.edge_count(); ++e) {
    if (!config.is_open(e)) continue;
    auto [u, v] = g.primal_edge(e);
    if (in_region[u] && in_region[v]) uf.merge(u, v);
  }
  int root = uf.find(origin);
  for (int v = 0; v < g.vertex_count(); ++v)
    if (in_region[v] && g.verts[v].primal && g.pos(v).norm() >= n - 1.0 && uf.find(v) == root)
      return true;
  return false;
}

enum class ArmStyle { Euclidean, BaseAnchored };

namespace detail {

struct AnnulusCrossings {
  int clusters = 0;                                  // distinct crossing clusters
  std::vector<std::pair<double, int>> inner_marks;   // (angle, cluster root)
};

inline AnnulusCrossings annulus_crossings(const IsoradialGraph& g, const Configuration& config,
                                          double n, double N, Color color) {
  bool primal = color == Color::Primal;
  auto inf_norm = [](const Vec2& p) { return std::max(std::fabs(p.x), std::fabs(p.y)); };
  std::vector<char> in_annulus(g.vertex_count(), 0);
  for (int v = 0; v < g.vertex_count(); ++v) {
    double d = inf_norm(g.pos(v));
    in_annulus[v] = d >= n && d <= N;
  }
  UnionFind uf(g.vertex_count());
  for (int e = 0; e < g.edge_count(); ++e) {
    bool open = primal ? config.is_open(e) : !config.is_open(e);
    if (!open) continue;
    auto [u, v] = primal ? g.primal_edge(e) : g.dual_edge(e);
    if (in_annulus[u] && in_annulus[v]) uf.merge(u, v);
  }
  std::map<int, int> touch;  // root -> 1 inner, 2 outer, 3 both
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (!in_annulus[v] || g.verts[v].primal != primal) continue;
    double d = inf_norm(g.pos(v));
    int flag = 0;
    if (d < n + 1.0) flag |= 1;
    if (d > N - 1.0) flag |= 2;
    if (flag) touch[uf.find(v)] |= flag;
  }
  AnnulusCrossings out;
  std::set<int> crossing_roots;
  for (auto [root, flag] : touch)
    if (flag == 3) crossing_roots.insert(root);
  out.clusters = static_cast<int>(crossing_roots.size());
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (!in_annulus[v] || g.verts[v].primal != primal) continue;
    double d = inf_norm(g.pos(v));
    if (d < n + 1.0 && crossing_roots.count(uf.find(v)))
      out.inner_marks.push_back({std::atan2(g.pos(v).y, g.pos(v).x), uf.find(v)});
  }
  std::sort(out.inner_marks.begin(), out.inner_marks.end());
  return out;
}

// alternating selection of 2j marks with distinct clusters in cyclic order
inline bool interleaved(const std::vector<std::pair<double, int>>& primal_marks,
                        const std::vector<std::pair<double, int>>& dual_marks, int j) {
  struct Mark {
    double angle;
    int cluster;
    int colour;
  };
  std::vector<Mark> ring;
  for (auto [a, c] : primal_marks) ring.push_back({a, c, 0});
  for (auto [a, c] : dual_marks) ring.push_back({a, c, 1});
  std::sort(ring.begin(), ring.end(), [](const Mark& a, const Mark& b) { return a.angle < b.angle; });
  int m = static_cast<int>(ring.size());
  if (m == 0) return j == 0;
  // depth-first search over start positions; ring is small at desk scale
  std::function<bool(int, int, int, std::set<int>&, std::set<int>&)> extend =
      [&](int idx, int remaining, int want_colour, std::set<int>& used_p, std::set<int>& used_d) {
        if (remaining == 0) return true;
        for (int step = 0; step < m; ++step) {
          int at = (idx + step) % m;
          const Mark& mk = ring[at];
          if (mk.colour != want_colour) continue;
          auto& used = mk.colour == 0 ? used_p : used_d;
          if (used.count(mk.cluster)) continue;
          used.insert(mk.cluster);
          if (extend(at + 1, remaining - 1, 1 - want_colour, used_p, used_d)) return true;
          used.erase(mk.cluster);
        }
        return false;
      };
  for (int start = 0; start < m; ++start) {
    if (ring[start].colour != 0) continue;
    std::set<int> up, ud;
    up.insert(ring[start].cluster);
    if (extend(start + 1, 2 * j - 1, 1, up, ud)) return true;
  }
  return false;
}

}  // namespace detail

// k-arm event in the annulus between boxes of radius n and N.  Euclidean
// style: k disjoint arms of alternating colour, counterclockwise; the
// detection counts crossing clusters of both colours and checks their
// interleaving along the inner boundary.  Base-anchored style: arms with
// extremities on the base (k = 2j >= 4 asks for j disjoint primal
// clusters joining base vertices of sq(n) to base vertices outside sq(N)).
inline bool arm_event(const IsoradialGraph& g, const Configuration& config, int k, int n, int N,
                      ArmStyle style = ArmStyle::Euclidean) {
  if (!(k == 1 || (k >= 2 && k % 2 == 0))) throw std::invalid_argument("arm_event: k in {1} u 2N");
  if (!(n < N)) throw std::invalid_argument("arm_event: need n < N");
  if (config.version != g.version) throw std::invalid_argument("arm_event: stale configuration");

  if (style == ArmStyle::Euclidean) {
    auto primal = detail::annulus_crossings(g, config, n, N, Color::Primal);
    if (k == 1) return primal.clusters >= 1;
    int j = k / 2;
    // degenerate-annulus guard: enough room for the requested arm count
    if (static_cast<int>(primal.inner_marks.size()) + 1 < k && primal.clusters < j) return false;
    auto dual = detail::annulus_crossings(g, config, n, N, Color::Dual);
    if (primal.clusters < j || dual.clusters < j) return false;
    return detail::interleaved(primal.inner_marks, dual.inner_marks, j);
  }

  // base-anchored
  if (!g.square) throw std::invalid_argument("arm_event: base-anchored needs square metadata");
  const auto& meta = *g.square;
  auto base_members = [&](bool primal, bool inner) {
    std::vector<int> out;
    for (std::size_t idx = 0; idx < meta.base_vertices.size(); ++idx) {
      int v = meta.base_vertices[idx];
      int logical = static_cast<int>(idx) - meta.base_col;
      bool in_small = logical >= -n && logical <= n + 1;
      bool out_large = logical < -N || logical > N + 1;
      if (g.verts[v].primal != primal) continue;
      if (inner ? in_small : out_large) out.push_back(v);
    }
    return out;
  };
  auto count_clusters = [&](Color color) {
    bool primal = color == Color::Primal;
    UnionFind uf(g.vertex_count());
    for (int e = 0; e < g.edge_count(); ++e) {
      bool open = primal ? config.is_open(e) : !config.is_open(e);
      if (!open) continue;
      auto [u, v] = primal ? g.primal_edge(e) : g.dual_edge(e);
      uf.merge(u, v);
    }
    std::set<int> inner_roots, both;
    for (int v : base_members(primal, true)) inner_roots.insert(uf.find(v));
    for (int v : base_members(primal, false))
      if (inner_roots.count(uf.find(v))) both.insert(uf.find(v));
    return static_cast<int>(both.size());
  };

  if (k == 1) return count_clusters(Color::Primal) >= 1;
  if (k == 2) return count_clusters(Color::Primal) >= 1 && count_clusters(Color::Dual) >= 1;
  return count_clusters(Color::Primal) >= k / 2;
}

}  // namespace isorc

#endif

#ifndef ISORC_PERIODIC_HPP
#define ISORC_PERIODIC_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "isorc/exchange.hpp"
#include "isorc/graph.hpp"
#include "isorc/stt.hpp"

namespace isorc {

// One rhombus of the fundamental patch: counterclockwise corners with
// corners[0] primal.
struct PatchRhombus {
  std::array<Vec2, 4> corners;
};

struct PeriodicPatch {
  std::vector<PatchRhombus> rhombi;
  Vec2 tau1, tau2;
};

struct WindowBox {
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool contains(const Vec2& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
};

namespace detail {

struct VertexMerger {
  std::map<std::pair<std::int64_t, std::int64_t>, int> index;
  std::vector<Vec2> pos;
  std::vector<bool> primal;

  int intern(const Vec2& p, bool is_primal) {
    auto key = std::make_pair(static_cast<std::int64_t>(std::llround(p.x * 1e6)),
                              static_cast<std::int64_t>(std::llround(p.y * 1e6)));
    auto it = index.find(key);
    if (it != index.end()) {
      if (primal[it->second] != is_primal)
        throw std::invalid_argument("periodic patch: parity clash at shared vertex");
      return it->second;
    }
    int id = static_cast<int>(pos.size());
    index.emplace(key, id);
    pos.push_back(p);
    primal.push_back(is_primal);
    return id;
  }
};

}  // namespace detail

// Validates that the patch tiles without overlap (checked on a 3x3 block
// of translates) and assembles the translates meeting the window.  The
// graph is shifted so a primal vertex nearest the window centre sits at
// the origin.
inline IsoradialGraph build_periodic_graph(const PeriodicPatch& patch, const WindowBox& window) {
  if (patch.rhombi.empty()) throw std::invalid_argument("build_periodic_graph: empty patch");
  if (std::fabs(cross(patch.tau1, patch.tau2)) < 1e-9)
    throw std::invalid_argument("build_periodic_graph: degenerate periods");
  for (const auto& pr : patch.rhombi)
    for (int k = 0; k < 4; ++k) {
      double len = (pr.corners[(k + 1) % 4] - pr.corners[k]).norm();
      if (std::fabs(len - 1.0) > 1e-9)
        throw std::invalid_argument("build_periodic_graph: patch rhombus side not unit");
    }

  // overlap check on 3x3 translates: rhombus centres must stay distinct
  {
    std::set<std::pair<std::int64_t, std::int64_t>> centres;
    for (int m = -1; m <= 1; ++m)
      for (int n = -1; n <= 1; ++n)
        for (const auto& pr : patch.rhombi) {
          Vec2 c{0, 0};
          for (const auto& p : pr.corners) c = c + p;
          c = c * 0.25 + patch.tau1 * static_cast<double>(m) +
              patch.tau2 * static_cast<double>(n);
          auto key = std::make_pair(static_cast<std::int64_t>(std::llround(c.x * 1e6)),
                                    static_cast<std::int64_t>(std::llround(c.y * 1e6)));
          if (!centres.insert(key).second)
            throw std::invalid_argument("build_periodic_graph: patch overlaps its translates");
        }
  }

  // cell range covering the window
  double det = cross(patch.tau1, patch.tau2);
  auto cell_of = [&](const Vec2& p) {
    return std::make_pair(cross(p, patch.tau2) / det, cross(patch.tau1, p) / det);
  };
  double mlo = 1e18, mhi = -1e18, nlo = 1e18, nhi = -1e18;
  for (auto [x, y] : {std::pair<double, double>{window.xmin, window.ymin},
                      {window.xmin, window.ymax},
                      {window.xmax, window.ymin},
                      {window.xmax, window.ymax}}) {
    auto [m, n] = cell_of(Vec2{x, y});
    mlo = std::min(mlo, m); mhi = std::max(mhi, m);
    nlo = std::min(nlo, n); nhi = std::max(nhi, n);
  }

  IsoradialGraph g;
  detail::VertexMerger merger;
  PeriodicMeta pmeta;
  pmeta.tau1 = patch.tau1;
  pmeta.tau2 = patch.tau2;
  for (int m = static_cast<int>(std::floor(mlo)) - 1; m <= static_cast<int>(std::ceil(mhi)) + 1; ++m)
    for (int n = static_cast<int>(std::floor(nlo)) - 1; n <= static_cast<int>(std::ceil(nhi)) + 1; ++n) {
      Vec2 shift = patch.tau1 * static_cast<double>(m) + patch.tau2 * static_cast<double>(n);
      for (std::size_t pi = 0; pi < patch.rhombi.size(); ++pi) {
        const auto& pr = patch.rhombi[pi];
        Vec2 centre{0, 0};
        for (const auto& p : pr.corners) centre = centre + p;
        centre = centre * 0.25 + shift;
        if (!window.contains(centre)) continue;
        Rhombus r;
        for (int k = 0; k < 4; ++k)
          r.corners[k] = merger.intern(pr.corners[k] + shift, k % 2 == 0);
        pmeta.cell_m.push_back(m);
        pmeta.cell_n.push_back(n);
        pmeta.patch_index.push_back(static_cast<int>(pi));
        g.rhombi.push_back(r);
      }
    }
  if (g.rhombi.empty()) throw std::invalid_argument("build_periodic_graph: window too small");

  g.verts.resize(merger.pos.size());
  for (std::size_t v = 0; v < merger.pos.size(); ++v)
    g.verts[v] = Vertex{merger.pos[v], merger.primal[v]};

  // shift a central primal vertex to the origin
  Vec2 centre{(window.xmin + window.xmax) / 2, (window.ymin + window.ymax) / 2};
  int best = -1;
  double best_d = 1e18;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.verts[v].primal) {
      double d = (g.verts[v].pos - centre).norm();
      if (d < best_d) {
        best_d = d;
        best = v;
      }
    }
  Vec2 shift = g.verts[best].pos;
  for (auto& v : g.verts) v.pos = v.pos - shift;

  // derive and label tracks
  std::vector<TrainTrack> chains;
  {
    IsoradialGraph tmp = g;  // labels not yet assigned; extract purely geometrically
    tmp.tracks.clear();
    // extract_tracks reads labels only for reporting, assign placeholders
    for (auto& r : tmp.rhombi) r.track = {0, 1};
    tmp.tracks.resize(2);
    chains = extract_tracks(tmp);
  }
  std::sort(chains.begin(), chains.end(), [&](const TrainTrack& a, const TrainTrack& b) {
    auto key = [&](const TrainTrack& t) {
      Vec2 c{0, 0};
      for (int r : t.rhombi)
        for (int k = 0; k < 4; ++k) c = c + g.pos(g.rhombi[r].corners[k]);
      c = c * (0.25 / static_cast<double>(t.rhombi.size()));
      return std::make_tuple(std::llround(t.angle * 1e9), std::llround(c.x * 1e6),
                             std::llround(c.y * 1e6));
    };
    return key(a) < key(b);
  });
  g.tracks.resize(chains.size());
  for (std::size_t lab = 0; lab < chains.size(); ++lab) {
    g.tracks[lab] = TrackInfo{chains[lab].angle, TrackKind::Other, 0};
    for (int r : chains[lab].rhombi) {
      auto& rh = g.rhombi[r];
      const auto& c = rh.corners;
      Vec2 s01 = g.pos(c[1]) - g.pos(c[0]);
      double gap01 = angle_gap_mod_pi(direction_mod_pi(s01), chains[lab].angle);
      Vec2 s03 = g.pos(c[3]) - g.pos(c[0]);
      double gap03 = angle_gap_mod_pi(direction_mod_pi(s03), chains[lab].angle);
      rh.track[gap01 <= gap03 ? 0 : 1] = static_cast<int>(lab);
    }
  }
  g.periodic = std::move(pmeta);
  g.validate();
  return g;
}

// Two track families forming a grid: vertical tracks s_n ordered along
// t_0, horizontal tracks t_n ordered along s_0.
struct GridInfo {
  std::map<int, int> s;  // index -> track label
  std::map<int, int> t;
  std::map<int, int> s_index_of;  // track label -> index
  std::map<int, int> t_index_of;
};

namespace detail {

struct DirectionClass {
  std::pair<int, int> primitive;  // invariance vector in (tau1, tau2) coords
  Vec2 direction;
};

inline std::pair<int, int> primitive_vector(int a, int b) {
  int g = std::gcd(std::abs(a), std::abs(b));
  if (g > 0) {
    a /= g;
    b /= g;
  }
  if (a < 0 || (a == 0 && b < 0)) {
    a = -a;
    b = -b;
  }
  return {a, b};
}

}  // namespace detail

// Classifies tracks by asymptotic direction (invariance vector) and
// returns the two families through the crossing pair nearest the origin.
inline GridInfo find_grid(const IsoradialGraph& g) {
  if (!g.periodic) throw std::invalid_argument("find_grid: graph is not periodic");
  const auto& pm = *g.periodic;
  auto chains = extract_tracks(g);

  // invariance vector per chain via repeated (patch index, side class)
  std::map<std::pair<int, int>, std::pair<int, int>> by_patch_side;
  std::vector<std::optional<std::pair<int, int>>> dir(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto& chain = chains[c].rhombi;
    std::map<std::pair<int, int>, std::pair<int, int>> first_seen;  // (patch, cls) -> cell
    for (int r : chain) {
      int cls = g.side_class_of_track(r, chains[c].label);
      auto key = std::make_pair(pm.patch_index[r], cls);
      auto cell = std::make_pair(pm.cell_m[r], pm.cell_n[r]);
      auto [it, fresh] = first_seen.try_emplace(key, cell);
      if (!fresh) {
        auto d = detail::primitive_vector(cell.first - it->second.first,
                                          cell.second - it->second.second);
        if (dir[c] && *dir[c] != d)
          throw std::runtime_error("find_grid: inconsistent invariance vector");
        dir[c] = d;
      }
    }
  }
  for (std::size_t c = 0; c < chains.size(); ++c)
    if (dir[c])
      for (int r : chains[c].rhombi) {
        int cls = g.side_class_of_track(r, chains[c].label);
        by_patch_side[{pm.patch_index[r], cls}] = *dir[c];
      }
  for (std::size_t c = 0; c < chains.size(); ++c) {
    if (dir[c]) continue;
    for (int r : chains[c].rhombi) {
      int cls = g.side_class_of_track(r, chains[c].label);
      auto it = by_patch_side.find({pm.patch_index[r], cls});
      if (it != by_patch_side.end()) {
        dir[c] = it->second;
        break;
      }
    }
    if (!dir[c]) throw std::runtime_error("find_grid: window too small to classify directions");
  }

  // the two classes through the crossing nearest the origin
  int r_star = -1;
  double best = 1e18;
  for (int r = 0; r < g.edge_count(); ++r) {
    Vec2 c{0, 0};
    for (int k = 0; k < 4; ++k) c = c + g.pos(g.rhombi[r].corners[k]);
    c = c * 0.25;
    if (c.norm() < best) {
      best = c.norm();
      r_star = r;
    }
  }
  std::vector<int> label_to_chain(g.tracks.size(), -1);
  for (std::size_t c = 0; c < chains.size(); ++c) label_to_chain[chains[c].label] = static_cast<int>(c);
  int lab_a = g.rhombi[r_star].track[0], lab_b = g.rhombi[r_star].track[1];
  auto dir_a = *dir[label_to_chain[lab_a]], dir_b = *dir[label_to_chain[lab_b]];
  if (dir_a == dir_b) throw std::runtime_error("find_grid: chosen pair not transversal");

  auto world = [&](std::pair<int, int> d) {
    return pm.tau1 * static_cast<double>(d.first) + pm.tau2 * static_cast<double>(d.second);
  };
  // the family of steeper asymptotic direction is vertical
  bool a_vertical = std::fabs(world(dir_a).y) * world(dir_b).norm() >
                    std::fabs(world(dir_b).y) * world(dir_a).norm();
  auto dir_s = a_vertical ? dir_a : dir_b;
  auto dir_t = a_vertical ? dir_b : dir_a;
  int t0_label = a_vertical ? lab_b : lab_a;
  int s0_label = a_vertical ? lab_a : lab_b;

  GridInfo grid;
  auto order_family = [&](std::pair<int, int> family_dir, int axis_label, int zero_label,
                          std::map<int, int>& out, std::map<int, int>& inv) {
    // order family members along the axis track's chain
    auto axis_chain = track_chain(g, axis_label);
    // orient by increasing coordinate (x for the horizontal axis, y otherwise)
    auto centre = [&](int r) {
      Vec2 c{0, 0};
      for (int k = 0; k < 4; ++k) c = c + g.pos(g.rhombi[r].corners[k]);
      return c * 0.25;
    };
    if (centre(axis_chain.front()).x > centre(axis_chain.back()).x ||
        (std::fabs(centre(axis_chain.front()).x - centre(axis_chain.back()).x) < 1e-9 &&
         centre(axis_chain.front()).y > centre(axis_chain.back()).y))
      std::reverse(axis_chain.begin(), axis_chain.end());
    std::vector<int> members;
    for (int r : axis_chain) {
      int other = detail::other_track(g, r, axis_label);
      if (*dir[label_to_chain[other]] == family_dir) members.push_back(other);
    }
    auto it_zero = std::find(members.begin(), members.end(), zero_label);
    if (it_zero == members.end())
      throw std::runtime_error("find_grid: family axis misses the origin track");
    int zero = static_cast<int>(it_zero - members.begin());
    for (std::size_t i = 0; i < members.size(); ++i) {
      out[static_cast<int>(i) - zero] = members[i];
      inv[members[i]] = static_cast<int>(i) - zero;
    }
  };
  order_family(dir_s, t0_label, s0_label, grid.s, grid.s_index_of);
  order_family(dir_t, s0_label, t0_label, grid.t, grid.t_index_of);
  return grid;
}

// Marks the grid families on the graph's track table.
inline void apply_grid_kinds(IsoradialGraph& g, const GridInfo& grid) {
  for (auto& t : g.tracks) t.kind = TrackKind::Other;
  for (const auto& [idx, lab] : grid.s) {
    g.tracks[lab].kind = TrackKind::Vertical;
    g.tracks[lab].logical_index = idx;
  }
  for (const auto& [idx, lab] : grid.t) {
    g.tracks[lab].kind = TrackKind::Horizontal;
    g.tracks[lab].logical_index = idx;
  }
}

struct BlackPoint {
  int rhombus = -1;
  int u = -1, v = -1;  // non-horizontal track labels, u < v
};

namespace detail {

// chain of track u oriented upward: from its crossing with t_0 toward t_1
inline std::vector<int> upward_chain(const IsoradialGraph& g, const GridInfo& grid, int u) {
  auto chain = track_chain(g, u);
  int c0 = crossing_rhombus(g, u, grid.t.at(0));
  int c1 = crossing_rhombus(g, u, grid.t.at(1));
  if (c0 < 0 || c1 < 0) throw std::runtime_error("upward_chain: track misses t0 or t1");
  if (chain_pos(chain, c1) < chain_pos(chain, c0))
    std::reverse(chain.begin(), chain.end());
  return chain;
}

}  // namespace detail

// Crossings of two non-horizontal tracks, one of them within the central
// vertical window, lying strictly between t_0 and t_N.
inline std::vector<BlackPoint> black_points(const IsoradialGraph& g, const GridInfo& grid,
                                            int M, int N) {
  std::set<int> horizontal;
  for (const auto& [idx, lab] : grid.t) horizontal.insert(lab);

  // central window of non-horizontal tracks: between s_{-M} and s_{M}
  // along t_0, inclusive
  auto t0_chain = track_chain(g, grid.t.at(0));
  std::map<int, int> rank_on_t0;  // label -> position along t0
  for (std::size_t i = 0; i < t0_chain.size(); ++i)
    rank_on_t0[detail::other_track(g, t0_chain[i], grid.t.at(0))] = static_cast<int>(i);
  auto rank_it_lo = rank_on_t0.find(grid.s.at(-M));
  auto rank_it_hi = rank_on_t0.find(grid.s.at(M));
  if (rank_it_lo == rank_on_t0.end() || rank_it_hi == rank_on_t0.end())
    throw std::invalid_argument("black_points: window missing s_{-M} or s_{M}");
  int lo = std::min(rank_it_lo->second, rank_it_hi->second);
  int hi = std::max(rank_it_lo->second, rank_it_hi->second);
  auto windowed = [&](int lab) {
    auto it = rank_on_t0.find(lab);
    return it != rank_on_t0.end() && it->second >= lo && it->second <= hi;
  };

  std::vector<BlackPoint> out;
  for (int r = 0; r < g.edge_count(); ++r) {
    int a = g.rhombi[r].track[0], b = g.rhombi[r].track[1];
    if (horizontal.count(a) || horizontal.count(b)) continue;
    if (!windowed(a) && !windowed(b)) continue;
    int u = windowed(a) ? a : b;
    auto chain = detail::upward_chain(g, grid, u);
    int pos = detail::chain_pos(chain, r);
    int p0 = detail::chain_pos(chain, crossing_rhombus(g, u, grid.t.at(0)));
    int cN = crossing_rhombus(g, u, grid.t.at(N));
    if (cN < 0) throw std::runtime_error("black_points: track misses t_N in window");
    int pN = detail::chain_pos(chain, cN);
    if (pos > p0 && pos < pN) out.push_back({r, std::min(a, b), std::max(a, b)});
  }
  std::sort(out.begin(), out.end(), [](const BlackPoint& x, const BlackPoint& y) {
    return std::make_pair(x.u, x.v) < std::make_pair(y.u, y.v);
  });
  return out;
}

struct EliminationResult {
  std::vector<SttRecord> records;
  int eliminated = 0;
  double horizontal_extent = 0.0;  // widest |x| touched by any move
};

// Removes every black point of the window by pushing maximal ones above
// t_N, never touching a rhombus of t_0.  Lexicographically smallest
// maximal point (by track pair) goes first.
inline EliminationResult eliminate_black_points(IsoradialGraph& g, const GridInfo& grid,
                                                int M, int N) {
  EliminationResult result;
  MoveContext ctx{g, nullptr, 1.0, nullptr, &result.records, false, {}, 2000000};
  int t0_label = grid.t.at(0);
  for (;;) {
    auto blacks = black_points(g, grid, M, N);
    if (blacks.empty()) break;

    auto further_black = [&](int u, int r) {
      // a black point beyond r in the upward direction of track u
      auto chain = detail::upward_chain(g, grid, u);
      int pos = detail::chain_pos(chain, r);
      if (pos < 0) return false;
      for (const auto& b : blacks) {
        if (b.rhombus == r) continue;
        if (b.u != u && b.v != u) continue;
        int bp = detail::chain_pos(chain, b.rhombus);
        if (bp > pos) return true;
      }
      return false;
    };

    const BlackPoint* pick = nullptr;
    for (const auto& b : blacks)
      if (!further_black(b.u, b.rhombus) && !further_black(b.v, b.rhombus)) {
        pick = &b;
        break;
      }
    if (!pick) throw std::runtime_error("eliminate_black_points: no maximal black point");

    // push the crossing upward past t_N
    int u = pick->u, v = pick->v;
    for (;;) {
      int rho = crossing_rhombus(g, u, v);
      auto chain_u = detail::upward_chain(g, grid, u);
      int pos = detail::chain_pos(chain_u, rho);
      int pN = detail::chain_pos(chain_u, crossing_rhombus(g, u, grid.t.at(N)));
      if (pos > pN) break;
      if (pos + 1 >= static_cast<int>(chain_u.size()))
        throw std::runtime_error("eliminate_black_points: window too small");
      int next_u = chain_u[pos + 1];
      int h = detail::other_track(g, next_u, u);
      if (grid.t_index_of.find(h) == grid.t_index_of.end())
        throw std::runtime_error("eliminate_black_points: non-horizontal obstruction");
      if (h == t0_label)
        throw std::runtime_error("eliminate_black_points: attempted move on t_0");
      int next_v = crossing_rhombus(g, v, h);
      auto site = detail::site_of_rhombi(g, rho, next_u, next_v);
      if (!site) throw std::runtime_error("eliminate_black_points: hexagon missing");
      for (int rr : site->rhombi) {
        if (g.rhombi[rr].track[0] == t0_label || g.rhombi[rr].track[1] == t0_label)
          throw std::runtime_error("eliminate_black_points: move touches t_0");
        Vec2 c{0, 0};
        for (int k = 0; k < 4; ++k) c = c + g.pos(g.rhombi[rr].corners[k]);
        result.horizontal_extent = std::max(result.horizontal_extent, std::fabs(c.x * 0.25));
      }
      ctx.apply(*site);
    }
    ++result.eliminated;
  }
  return result;
}

// True when no two non-horizontal tracks cross inside the window between
// s_{-M}, s_{M}, t_0 and t_N: the region has square lattice structure.
inline bool window_is_square(const IsoradialGraph& g, const GridInfo& grid, int M, int N) {
  return black_points(g, grid, M, N).empty();
}

struct GrownElimination {
  IsoradialGraph graph;
  GridInfo grid;
  EliminationResult result;
  double window_radius = 0.0;
};

// The horizontal margin needed by the elimination is existential; the
// window is grown until the run fits, and the extent used is reported.
inline GrownElimination eliminate_black_points_grown(const PeriodicPatch& patch, int M, int N,
                                                     double initial_radius = 4.0,
                                                     int max_attempts = 6) {
  double radius = initial_radius;
  std::string last_error = "window never sufficed";
  for (int attempt = 0; attempt < max_attempts; ++attempt, radius *= 1.6) {
    try {
      GrownElimination out;
      out.graph = build_periodic_graph(patch, WindowBox{-radius, radius, -radius, radius});
      out.grid = find_grid(out.graph);
      apply_grid_kinds(out.graph, out.grid);
      out.result = eliminate_black_points(out.graph, out.grid, M, N);
      out.window_radius = radius;
      return out;
    } catch (const std::exception& ex) {
      last_error = ex.what();
    }
  }
  throw std::runtime_error(std::string("eliminate_black_points_grown: ") + last_error);
}

}  // namespace isorc

#endif

#ifndef ISORC_GRAPH_HPP
#define ISORC_GRAPH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "isorc/weights.hpp"

namespace isorc {

struct Vec2 {
  double x = 0.0, y = 0.0;
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const { return std::hypot(x, y); }
};

inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

// angle of a direction modulo pi, in [0, pi)
inline double direction_mod_pi(const Vec2& d) {
  double a = std::atan2(d.y, d.x);
  while (a < 0.0) a += kPi;
  while (a >= kPi) a -= kPi;
  return a;
}

inline double angle_gap_mod_pi(double a, double b) {
  double d = std::fabs(a - b);
  while (d >= kPi) d -= kPi;
  return std::min(d, kPi - d);
}

struct Vertex {
  Vec2 pos;
  bool primal = false;
};

// One rhombus of the diamond graph == one primal edge == one dual edge.
// Corners are stored counterclockwise with corners[0], corners[2] primal
// and corners[1], corners[3] dual.  track[0] is the track transverse to
// the side corners[1]-corners[0]; track[1] the one transverse to
// corners[3]-corners[0].
struct Rhombus {
  std::array<int, 4> corners{-1, -1, -1, -1};
  std::array<int, 2> track{-1, -1};
};

enum class TrackKind { Vertical, Horizontal, Other };

struct TrackInfo {
  double angle = 0.0;  // transverse angle mod pi; invariant under all moves
  TrackKind kind = TrackKind::Other;
  int logical_index = 0;  // s_i or t_j index for builder-made tracks
};

// Metadata kept by the square-lattice builders.  The vertex grid is only
// geometrically valid at the version it was built at; stable facts
// (base vertices, track labels) survive any sequence of transformations.
struct SquareMeta {
  int width = 0;            // number of vertical tracks
  int height = 0;           // number of horizontal tracks
  int base_row = 0;         // vertex row forming the base
  int base_col = 0;         // vertex column of the origin x_{0,0}
  std::vector<int> vertex_grid;          // (width+1) x (height+1), row-major
  std::vector<int> row_track;            // current track label per rhombus row
  std::vector<int> col_track;            // track label per rhombus column
  std::vector<int> base_vertices;        // vertex ids of the base row
  std::uint64_t grid_version = 0;        // version at which vertex_grid was valid

  int vid(int i, int j) const { return vertex_grid[j * (width + 1) + i]; }
};

struct PeriodicMeta {
  Vec2 tau1, tau2;
  std::vector<int> cell_m, cell_n, patch_index;  // per rhombus
};

class IsoradialGraph {
 public:
  std::vector<Vertex> verts;
  std::vector<Rhombus> rhombi;
  std::vector<TrackInfo> tracks;
  double eps_bap = 0.0;  // recorded bounded-angles parameter
  std::uint64_t version = 0;
  std::optional<SquareMeta> square;
  std::optional<PeriodicMeta> periodic;

  int edge_count() const { return static_cast<int>(rhombi.size()); }
  int vertex_count() const { return static_cast<int>(verts.size()); }

  Vec2 pos(int v) const { return verts[v].pos; }

  std::pair<int, int> primal_edge(int r) const {
    return {rhombi[r].corners[0], rhombi[r].corners[2]};
  }
  std::pair<int, int> dual_edge(int r) const {
    return {rhombi[r].corners[1], rhombi[r].corners[3]};
  }

  // subtended angle of the primal edge: the rhombus angle at a dual corner
  double theta(int r) const {
    const auto& c = rhombi[r].corners;
    Vec2 a = pos(c[0]) - pos(c[1]);
    Vec2 b = pos(c[2]) - pos(c[1]);
    double ang = std::atan2(cross(a, b), dot(a, b));
    return std::fabs(ang);
  }

  void bump_version() {
    ++version;
    corner_cache_version_ = ~0ULL;
    edge_map_version_ = ~0ULL;
  }

  // vertex -> incident rhombi (cached per version)
  const std::vector<std::vector<int>>& corner_incidence() const {
    if (corner_cache_version_ != version) {
      corner_cache_.assign(verts.size(), {});
      for (int r = 0; r < edge_count(); ++r)
        for (int v : rhombi[r].corners) corner_cache_[v].push_back(r);
      corner_cache_version_ = version;
    }
    return corner_cache_;
  }

  static std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  }

  // diamond edge -> incident rhombi (one or two)
  const std::unordered_map<std::uint64_t, std::array<int, 2>>& edge_map() const {
    if (edge_map_version_ != version) {
      edge_map_.clear();
      for (int r = 0; r < edge_count(); ++r) {
        const auto& c = rhombi[r].corners;
        for (int k = 0; k < 4; ++k) {
          std::uint64_t key = edge_key(c[k], c[(k + 1) % 4]);
          auto it = edge_map_.find(key);
          if (it == edge_map_.end())
            edge_map_[key] = {r, -1};
          else if (it->second[1] == -1 && it->second[0] != r)
            it->second[1] = r;
          else if (it->second[0] != r && it->second[1] != r)
            throw std::runtime_error("diamond edge shared by more than two rhombi");
        }
      }
      edge_map_version_ = version;
    }
    return edge_map_;
  }

  int other_rhombus_across(std::uint64_t key, int r) const {
    auto it = edge_map().find(key);
    if (it == edge_map().end()) return -1;
    if (it->second[0] == r) return it->second[1];
    if (it->second[1] == r) return it->second[0];
    return -1;
  }

  // side pair (class 0: sides 01 and 32; class 1: sides 03 and 12)
  std::array<std::uint64_t, 2> side_keys(int r, int cls) const {
    const auto& c = rhombi[r].corners;
    if (cls == 0) return {edge_key(c[0], c[1]), edge_key(c[3], c[2])};
    return {edge_key(c[0], c[3]), edge_key(c[1], c[2])};
  }

  // which side class of rhombus r the given track crosses
  int side_class_of_track(int r, int track_label) const {
    if (rhombi[r].track[0] == track_label) return 0;
    if (rhombi[r].track[1] == track_label) return 1;
    throw std::invalid_argument("track does not cross this rhombus");
  }

  // boundary primal (or dual) vertices: endpoints of diamond edges with a
  // single incident rhombus
  std::vector<int> boundary_vertices(bool primal = true) const {
    std::vector<char> mark(verts.size(), 0);
    for (const auto& [key, rs] : edge_map()) {
      if (rs[1] == -1) {
        mark[static_cast<int>(key >> 32)] = 1;
        mark[static_cast<int>(key & 0xffffffffu)] = 1;
      }
    }
    std::vector<int> out;
    for (int v = 0; v < vertex_count(); ++v)
      if (mark[v] && verts[v].primal == primal) out.push_back(v);
    return out;
  }

  void validate(double tol = 1e-9) const {
    for (int r = 0; r < edge_count(); ++r) {
      const auto& c = rhombi[r].corners;
      for (int k = 0; k < 4; ++k) {
        double len = (pos(c[(k + 1) % 4]) - pos(c[k])).norm();
        if (std::fabs(len - 1.0) > tol)
          throw std::runtime_error("validate: rhombus side not unit length");
      }
      if (!verts[c[0]].primal || verts[c[1]].primal || !verts[c[2]].primal ||
          verts[c[3]].primal)
        throw std::runtime_error("validate: corner parity broken");
      Vec2 s01 = pos(c[1]) - pos(c[0]);
      Vec2 s03 = pos(c[3]) - pos(c[0]);
      if (cross(s01, s03) <= 0.0)
        throw std::runtime_error("validate: rhombus not counterclockwise");
      double th = theta(r);
      if (!(th > 0.0 && th < kPi))
        throw std::runtime_error("validate: subtended angle out of range");
      if (rhombi[r].track[0] == rhombi[r].track[1])
        throw std::runtime_error("validate: rhombus tracks not distinct");
      for (int cls = 0; cls < 2; ++cls) {
        double side_angle = direction_mod_pi(cls == 0 ? s01 : s03);
        double track_angle = tracks[rhombi[r].track[cls]].angle;
        if (angle_gap_mod_pi(side_angle, track_angle) > 1e-6)
          throw std::runtime_error("validate: track angle mismatch");
      }
    }
    edge_map();  // throws if an edge has more than two faces
  }

  std::uint64_t hash() const {
    // label-blind: geometry rounded to 1e-6 plus corner combinatorics
    std::vector<std::array<std::int64_t, 3>> keyed(verts.size());
    for (int v = 0; v < vertex_count(); ++v)
      keyed[v] = {llround_scaled(verts[v].pos.x), llround_scaled(verts[v].pos.y),
                  verts[v].primal ? 1 : 0};
    std::vector<int> order(verts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return keyed[a] < keyed[b]; });
    std::vector<int> rank(verts.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);

    std::vector<std::array<int, 4>> faces;
    faces.reserve(rhombi.size());
    for (const auto& r : rhombi) {
      std::array<int, 4> f{rank[r.corners[0]], rank[r.corners[1]], rank[r.corners[2]],
                           rank[r.corners[3]]};
      // canonical rotation: put the smaller primal corner first, keep parity slots
      if (f[2] < f[0]) f = {f[2], f[3], f[0], f[1]};
      faces.push_back(f);
    }
    std::sort(faces.begin(), faces.end());

    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 1099511628211ULL;
    };
    for (int v : order) {
      mix(static_cast<std::uint64_t>(keyed[v][0]));
      mix(static_cast<std::uint64_t>(keyed[v][1]));
      mix(static_cast<std::uint64_t>(keyed[v][2]));
    }
    for (const auto& f : faces)
      for (int c : f) mix(static_cast<std::uint64_t>(c));
    return h;
  }

 private:
  static std::int64_t llround_scaled(double v) {
    return static_cast<std::int64_t>(std::llround(v * 1e6));
  }
  mutable std::vector<std::vector<int>> corner_cache_;
  mutable std::uint64_t corner_cache_version_ = ~0ULL;
  mutable std::unordered_map<std::uint64_t, std::array<int, 2>> edge_map_;
  mutable std::uint64_t edge_map_version_ = ~0ULL;
};

// Maximal chains of rhombi glued along parallel transverse segments.
struct TrainTrack {
  std::vector<int> rhombi;  // consecutive rhombi share a transverse segment
  double angle = 0.0;       // transverse angle mod pi
  int label = -1;           // stored label when consistent, else -1
};

inline std::vector<TrainTrack> extract_tracks(const IsoradialGraph& g) {
  std::vector<std::array<char, 2>> seen(g.rhombi.size(), {0, 0});
  std::vector<TrainTrack> out;
  for (int r0 = 0; r0 < g.edge_count(); ++r0) {
    for (int cls0 = 0; cls0 < 2; ++cls0) {
      if (seen[r0][cls0]) continue;
      TrainTrack t;
      // walk both directions from (r0, cls0)
      std::vector<int> fwd, bwd;
      for (int dir = 0; dir < 2; ++dir) {
        int r = r0, cls = cls0;
        std::uint64_t via = g.side_keys(r, cls)[dir];
        while (true) {
          int nxt = g.other_rhombus_across(via, r);
          if (nxt < 0) break;
          int ncls = -1;
          for (int c = 0; c < 2; ++c) {
            auto ks = g.side_keys(nxt, c);
            if (ks[0] == via || ks[1] == via) ncls = c;
          }
          if (ncls < 0) throw std::runtime_error("extract_tracks: side not found");
          if (seen[nxt][ncls]) throw std::runtime_error("extract_tracks: track self-intersects");
          seen[nxt][ncls] = 1;
          (dir == 0 ? fwd : bwd).push_back(nxt);
          auto ks = g.side_keys(nxt, ncls);
          via = (ks[0] == via) ? ks[1] : ks[0];
          r = nxt;
        }
      }
      seen[r0][cls0] = 1;
      t.rhombi.assign(bwd.rbegin(), bwd.rend());
      t.rhombi.push_back(r0);
      t.rhombi.insert(t.rhombi.end(), fwd.begin(), fwd.end());
      const auto& c = g.rhombi[r0].corners;
      Vec2 side = (cls0 == 0) ? g.pos(c[1]) - g.pos(c[0]) : g.pos(c[3]) - g.pos(c[0]);
      t.angle = direction_mod_pi(side);
      t.label = g.rhombi[r0].track[cls0];
      for (int rr : t.rhombi) {
        if (g.rhombi[rr].track[0] != t.label && g.rhombi[rr].track[1] != t.label)
          t.label = -1;
      }
      out.push_back(std::move(t));
    }
  }
  return out;
}

// Checks the train-track axioms: every rhombus on exactly two tracks,
// two tracks meet at most once, transverse segments parallel.
inline void validate_tracks(const IsoradialGraph& g) {
  auto ts = extract_tracks(g);
  std::vector<int> count(g.rhombi.size(), 0);
  for (const auto& t : ts) {
    if (t.label < 0) throw std::runtime_error("validate_tracks: labels inconsistent along a chain");
    for (int r : t.rhombi) ++count[r];
    for (int r : t.rhombi) {
      int cls = g.side_class_of_track(r, t.label);
      const auto& c = g.rhombi[r].corners;
      Vec2 side = (cls == 0) ? g.pos(c[1]) - g.pos(c[0]) : g.pos(c[3]) - g.pos(c[0]);
      if (angle_gap_mod_pi(direction_mod_pi(side), t.angle) > 1e-9)
        throw std::runtime_error("validate_tracks: transverse segments not parallel");
    }
  }
  for (int c : count)
    if (c != 2) throw std::runtime_error("validate_tracks: rhombus not on exactly two tracks");
  std::map<std::pair<int, int>, int> meets;
  for (const auto& r : g.rhombi) {
    auto key = std::minmax(r.track[0], r.track[1]);
    if (++meets[{key.first, key.second}] > 1)
      throw std::runtime_error("validate_tracks: two tracks share more than one rhombus");
  }
}

// ordered rhombus chain of one labelled track (by walking the chain)
inline std::vector<int> track_chain(const IsoradialGraph& g, int label) {
  for (const auto& t : extract_tracks(g))
    if (t.label == label) return t.rhombi;
  throw std::invalid_argument("track_chain: no rhombus carries this label");
}

inline int crossing_rhombus(const IsoradialGraph& g, int track_a, int track_b) {
  for (int r = 0; r < g.edge_count(); ++r) {
    const auto& t = g.rhombi[r].track;
    if ((t[0] == track_a && t[1] == track_b) || (t[0] == track_b && t[1] == track_a))
      return r;
  }
  return -1;
}

}  // namespace isorc

#endif

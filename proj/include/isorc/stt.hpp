#ifndef ISORC_STT_HPP
#define ISORC_STT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "isorc/graph.hpp"
#include "isorc/rcm.hpp"
#include "isorc/rng.hpp"
#include "isorc/weights.hpp"

namespace isorc {

// A triangle-or-star locus: three pairwise-adjacent rhombi forming a
// hexagon around an interior centre vertex.  Slots are ordered so that
// rhombi[0] is the a-slot: edge BC of a triangle, edge OA of a star.
// Under a transformation each slot keeps its two tracks and its edge id,
// with the triangle edge opposite X trading places with the star edge OX.
struct SttSite {
  int center = -1;
  bool is_triangle = false;
  std::array<int, 3> rhombi{-1, -1, -1};  // slots a, b, c
  std::array<int, 3> outer{-1, -1, -1};   // A, B, C counterclockwise
  std::array<int, 3> duals{-1, -1, -1};   // d1 (AB), d2 (BC), d3 (CA)
  std::uint64_t version = 0;
};

namespace detail {

inline int rhombus_with_corners(const IsoradialGraph& g, const std::vector<int>& candidates,
                                int u, int v) {
  for (int r : candidates) {
    const auto& c = g.rhombi[r].corners;
    bool has_u = false, has_v = false;
    for (int x : c) {
      has_u |= x == u;
      has_v |= x == v;
    }
    if (has_u && has_v) return r;
  }
  return -1;
}

}  // namespace detail

// Builds the site around an interior degree-3 vertex; nullopt when the
// vertex does not support a hexagon.
inline std::optional<SttSite> site_at(const IsoradialGraph& g, int center) {
  const auto& incidence = g.corner_incidence();
  const auto& inc = incidence[center];
  if (inc.size() != 3) return std::nullopt;

  // interior check: rhombus angles at the centre close up to 2 pi
  double total = 0.0;
  for (int r : inc) {
    const auto& c = g.rhombi[r].corners;
    int k = 0;
    while (c[k] != center) ++k;
    Vec2 a = g.pos(c[(k + 1) % 4]) - g.pos(center);
    Vec2 b = g.pos(c[(k + 3) % 4]) - g.pos(center);
    total += std::fabs(std::atan2(cross(a, b), dot(a, b)));
  }
  if (std::fabs(total - 2.0 * kPi) > 1e-6) return std::nullopt;

  // pairwise adjacency through the centre
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      int shared = 0;
      for (int x : g.rhombi[inc[i]].corners)
        for (int y : g.rhombi[inc[j]].corners)
          if (x == y) ++shared;
      if (shared != 2) return std::nullopt;
    }

  SttSite site;
  site.center = center;
  site.is_triangle = !g.verts[center].primal;
  site.version = g.version;

  // hexagon boundary sorted counterclockwise around the centre
  std::vector<int> boundary;
  for (int r : inc)
    for (int x : g.rhombi[r].corners)
      if (x != center && std::find(boundary.begin(), boundary.end(), x) == boundary.end())
        boundary.push_back(x);
  if (boundary.size() != 6) return std::nullopt;
  std::sort(boundary.begin(), boundary.end(), [&](int u, int v) {
    Vec2 pu = g.pos(u) - g.pos(center), pv = g.pos(v) - g.pos(center);
    return std::atan2(pu.y, pu.x) < std::atan2(pv.y, pv.x);
  });

  // rotate so the walk starts at the smallest-id primal vertex
  int start = 0;
  for (int i = 0; i < 6; ++i)
    if (g.verts[boundary[i]].primal &&
        (!g.verts[boundary[start]].primal || boundary[i] < boundary[start]))
      start = i;
  std::rotate(boundary.begin(), boundary.begin() + start, boundary.end());
  for (int i = 0; i < 6; ++i)
    if (g.verts[boundary[i]].primal != (i % 2 == 0)) return std::nullopt;

  site.outer = {boundary[0], boundary[2], boundary[4]};
  site.duals = {boundary[1], boundary[3], boundary[5]};

  const auto [A, B, C] = site.outer;
  if (site.is_triangle) {
    site.rhombi = {detail::rhombus_with_corners(g, inc, B, C),
                   detail::rhombus_with_corners(g, inc, C, A),
                   detail::rhombus_with_corners(g, inc, A, B)};
  } else {
    auto only = [&](int x) {
      for (int r : inc) {
        const auto& c = g.rhombi[r].corners;
        int k = 0;
        while (c[k] != center) ++k;
        if (c[(k + 2) % 4] == x) return r;
      }
      return -1;
    };
    site.rhombi = {only(A), only(B), only(C)};
  }
  for (int r : site.rhombi)
    if (r < 0) return std::nullopt;
  return site;
}

inline std::vector<SttSite> find_stt_sites(const IsoradialGraph& g) {
  std::vector<SttSite> sites;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (auto site = site_at(g, v)) sites.push_back(*site);
  return sites;
}

namespace detail {

inline void realign_tracks(IsoradialGraph& g, int r) {
  auto& rh = g.rhombi[r];
  Vec2 s01 = g.pos(rh.corners[1]) - g.pos(rh.corners[0]);
  double a01 = direction_mod_pi(s01);
  double d0 = angle_gap_mod_pi(a01, g.tracks[rh.track[0]].angle);
  double d1 = angle_gap_mod_pi(a01, g.tracks[rh.track[1]].angle);
  if (d1 < d0) std::swap(rh.track[0], rh.track[1]);
}

}  // namespace detail

// Triangle <-> star surgery.  The centre vertex keeps its id but flips
// parity and moves to the reflected position; the three rhombus slots are
// re-cornered in place, each keeping its pair of tracks.  Involution.
inline void transform_graph(IsoradialGraph& g, const SttSite& site) {
  if (site.version != g.version)
    throw std::invalid_argument("transform_graph: stale site");
  const auto [A, B, C] = site.outer;
  const auto [d1, d2, d3] = site.duals;
  const auto [ra, rb, rc] = site.rhombi;
  int o = site.center;

  if (site.is_triangle) {
    g.verts[o].pos = g.pos(d1) + g.pos(d3) - g.pos(A);
    g.verts[o].primal = true;
    g.rhombi[ra].corners = {A, d1, o, d3};
    g.rhombi[rb].corners = {B, d2, o, d1};
    g.rhombi[rc].corners = {C, d3, o, d2};
  } else {
    g.verts[o].pos = g.pos(A) + g.pos(B) - g.pos(d1);
    g.verts[o].primal = false;
    g.rhombi[ra].corners = {B, d2, C, o};
    g.rhombi[rb].corners = {C, d3, A, o};
    g.rhombi[rc].corners = {A, d1, B, o};
  }
  detail::realign_tracks(g, ra);
  detail::realign_tracks(g, rb);
  detail::realign_tracks(g, rc);
  g.bump_version();
  if (g.square) g.square->grid_version = ~0ULL;
}

// Local configuration kernel of the coupling.  Input and output are
// 3-bit masks over the site slots (bit 0 = slot a); outcomes listed with
// probabilities.  Deterministic rows have a single outcome.
struct SttOutcome {
  int mask = 0;
  double prob = 1.0;
};

inline std::vector<SttOutcome> stt_kernel_row(bool is_triangle,
                                              const std::array<double, 3>& y, double q,
                                              int in_mask) {
  int bits = __builtin_popcount(in_mask);
  std::vector<SttOutcome> row;
  if (is_triangle) {
    // map S: triangle -> star; y holds the star weights y' = q / y_tri
    if (bits == 0) {
      double norm = q + y[0] + y[1] + y[2];
      row.push_back({0, q / norm});
      for (int i = 0; i < 3; ++i) row.push_back({1 << i, y[i] / norm});
    } else if (bits == 1) {
      // one triangle edge open joins two of A,B,C: open the two star
      // legs to those vertices.  slot a = BC -> legs b', c' etc.
      row.push_back({7 ^ in_mask, 1.0});
    } else {
      row.push_back({7, 1.0});
    }
  } else {
    // map T: star -> triangle; y holds the triangle weights y = q / y_star
    if (bits == 3) {
      double w01 = y[0] * y[1], w12 = y[1] * y[2], w20 = y[2] * y[0],
             w012 = y[0] * y[1] * y[2];
      double norm = w01 + w12 + w20 + w012;  // equals q on critical triples
      row.push_back({3, w01 / norm});
      row.push_back({6, w12 / norm});
      row.push_back({5, w20 / norm});
      row.push_back({7, w012 / norm});
    } else if (bits == 2) {
      // legs to two outer vertices open: open the triangle edge joining
      // them, i.e. the slot complementary to the two open legs.
      row.push_back({7 ^ in_mask, 1.0});
    } else {
      row.push_back({0, 1.0});
    }
  }
  return row;
}

// Weights of the image edges (star weights when transforming a triangle).
inline std::array<double, 3> image_edge_weights(const IsoradialGraph& g,
                                                const SttSite& site, double q) {
  std::array<double, 3> y{};
  ModelParams params{q, 1.0};
  for (int i = 0; i < 3; ++i) {
    double th = g.theta(site.rhombi[i]);
    y[i] = q / edge_weight(th, params).y;  // = weight at angle pi - theta
  }
  return y;
}

struct SttRecord {
  int center = -1;
  bool was_triangle = false;
  std::array<int, 3> rhombi{-1, -1, -1};
  std::array<std::uint8_t, 3> before{0, 0, 0};
  std::array<std::uint8_t, 3> after{0, 0, 0};
  int outcome_index = -1;  // -1 for deterministic rows
  double probability = 1.0;
  bool premove = false;  // convexification-only move of a track exchange
};

// One coupled star-triangle transformation: surgery on the graph plus the
// exact randomized update of the configuration.  The randomness is drawn
// from rng only, independently of the configuration.
inline SttRecord coupled_transform(IsoradialGraph& g, const SttSite& site,
                                   Configuration& config, double q, Rng& rng) {
  if (site.version != g.version) throw std::invalid_argument("coupled_transform: stale site");
  if (config.version != g.version)
    throw std::invalid_argument("coupled_transform: configuration does not match graph");

  SttRecord rec;
  rec.center = site.center;
  rec.was_triangle = site.is_triangle;
  rec.rhombi = site.rhombi;

  int in_mask = 0;
  for (int i = 0; i < 3; ++i) {
    rec.before[i] = config.is_open(site.rhombi[i]);
    in_mask |= rec.before[i] << i;
  }
  auto y = image_edge_weights(g, site, q);
  auto row = stt_kernel_row(site.is_triangle, y, q, in_mask);

  int pick = 0;
  if (row.size() > 1) {
    std::array<double, 4> w{};
    for (std::size_t i = 0; i < row.size(); ++i) w[i] = row[i].prob;
    pick = rng.discrete(w.data(), static_cast<int>(row.size()));
    rec.outcome_index = pick;
  }
  rec.probability = row[pick].prob;

  transform_graph(g, site);
  for (int i = 0; i < 3; ++i) {
    rec.after[i] = (row[pick].mask >> i) & 1;
    config.open[site.rhombi[i]] = rec.after[i];
  }
  config.version = g.version;
  return rec;
}

// Re-applies a recorded transformation (no randomness), checking that the
// site and the pre-states match.  Set invert to rewind instead.
inline void replay_record(IsoradialGraph& g, Configuration& config, const SttRecord& rec,
                          bool invert = false) {
  auto site = site_at(g, rec.center);
  if (!site) throw std::runtime_error("replay_record: no site at recorded centre");
  if (site->is_triangle != (invert ? !rec.was_triangle : rec.was_triangle))
    throw std::runtime_error("replay_record: pattern mismatch");
  const auto& from = invert ? rec.after : rec.before;
  const auto& to = invert ? rec.before : rec.after;
  for (int i = 0; i < 3; ++i)
    if (config.is_open(rec.rhombi[i]) != from[i])
      throw std::runtime_error("replay_record: configuration mismatch");
  transform_graph(g, *site);
  for (int i = 0; i < 3; ++i) config.open[rec.rhombi[i]] = to[i];
  config.version = g.version;
}

}  // namespace isorc

#endif

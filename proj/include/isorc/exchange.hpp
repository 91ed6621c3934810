#ifndef ISORC_EXCHANGE_HPP
#define ISORC_EXCHANGE_HPP

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "isorc/builders.hpp"
#include "isorc/graph.hpp"
#include "isorc/rcm.hpp"
#include "isorc/stt.hpp"

namespace isorc {

// Shared mutation context: coupled moves when a configuration is attached,
// pure graph surgery otherwise.
struct MoveContext {
  IsoradialGraph& g;
  Configuration* config = nullptr;
  double q = 1.0;
  Rng* rng = nullptr;
  std::vector<SttRecord>* records = nullptr;
  bool premove = false;
  std::set<int> forbidden_rhombi;  // moves touching these throw
  long budget = 2000000;

  SttRecord apply(const SttSite& site) {
    for (int r : site.rhombi)
      if (forbidden_rhombi.count(r))
        throw std::runtime_error("star-triangle move touches a protected rhombus");
    if (--budget < 0) throw std::runtime_error("star-triangle move budget exhausted");
    SttRecord rec;
    if (config) {
      rec = coupled_transform(g, site, *config, q, *rng);
    } else {
      rec.center = site.center;
      rec.was_triangle = site.is_triangle;
      rec.rhombi = site.rhombi;
      transform_graph(g, site);
    }
    rec.premove = premove;
    if (records) records->push_back(rec);
    return rec;
  }
};

namespace detail {

inline int chain_pos(const std::vector<int>& chain, int rhombus) {
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (chain[i] == rhombus) return static_cast<int>(i);
  return -1;
}

inline int other_track(const IsoradialGraph& g, int r, int track) {
  const auto& t = g.rhombi[r].track;
  return t[0] == track ? t[1] : t[0];
}

// site formed by three given rhombi, if they bound a hexagon
inline std::optional<SttSite> site_of_rhombi(const IsoradialGraph& g, int r1, int r2, int r3) {
  for (int v : g.rhombi[r1].corners) {
    auto site = site_at(g, v);
    if (!site) continue;
    std::array<int, 3> got = site->rhombi;
    std::sort(got.begin(), got.end());
    std::array<int, 3> want{r1, r2, r3};
    std::sort(want.begin(), want.end());
    if (got == want) return site;
  }
  return std::nullopt;
}

inline bool strictly_between(int x, int a, int b) {
  return (a < x && x < b) || (b < x && x < a);
}

// True when track h crosses track t strictly between the crossings r1, r2.
inline bool crosses_between(const IsoradialGraph& g, int h, int t, int r1, int r2) {
  int c = crossing_rhombus(g, h, t);
  if (c < 0) return false;
  auto chain = track_chain(g, t);
  return strictly_between(chain_pos(chain, c), chain_pos(chain, r1), chain_pos(chain, r2));
}

// Flips the hexagon where tracks x, y, z meet, first clearing intruding
// tracks out of the bounded triangle by recursive corner flips.  The
// recursion descends into strictly smaller corner triangles, so it
// terminates; the budget in ctx is a hard backstop.
inline void flip_track_triangle(MoveContext& ctx, int x, int y, int z) {
  const IsoradialGraph& g = ctx.g;
  for (;;) {
    int c_xy = crossing_rhombus(g, x, y);
    int c_yz = crossing_rhombus(g, y, z);
    int c_xz = crossing_rhombus(g, x, z);
    if (c_xy < 0 || c_yz < 0 || c_xz < 0)
      throw std::runtime_error("flip_track_triangle: tracks do not pairwise cross");
    if (auto site = site_of_rhombi(g, c_xy, c_yz, c_xz)) {
      ctx.apply(*site);
      return;
    }
    // Some track intrudes.  Find one adjacent to a corner along a side;
    // it exits through one of the other two sides, cutting off a strictly
    // smaller corner triangle to clear first.
    struct SideProbe {
      int common;    // track carrying the side
      int from, to;  // corner crossings delimiting the side
    };
    const SideProbe probes[3] = {{y, c_xy, c_yz}, {x, c_xy, c_xz}, {z, c_yz, c_xz}};
    bool recursed = false;
    for (const auto& pr : probes) {
      auto chain = track_chain(g, pr.common);
      int ia = chain_pos(chain, pr.from), ib = chain_pos(chain, pr.to);
      if (std::abs(ia - ib) <= 1) continue;
      int step = ia < ib ? 1 : -1;
      int h = other_track(g, chain[ia + step], pr.common);
      // h enters near the corner at pr.from; it exits either through the
      // other track of that corner (small triangle there) or through the
      // opposite side (small triangle at the far corner).
      if (pr.common == y) {
        if (crosses_between(g, h, x, c_xy, c_xz))
          flip_track_triangle(ctx, h, x, y);
        else
          flip_track_triangle(ctx, h, y, z);
      } else if (pr.common == x) {
        if (crosses_between(g, h, y, c_xy, c_yz))
          flip_track_triangle(ctx, h, x, y);
        else
          flip_track_triangle(ctx, h, x, z);
      } else {
        if (crosses_between(g, h, y, c_xy, c_yz))
          flip_track_triangle(ctx, h, y, z);
        else
          flip_track_triangle(ctx, h, x, z);
      }
      recursed = true;
      break;
    }
    if (!recursed)
      throw std::runtime_error("flip_track_triangle: no hexagon and no intruder found");
  }
}

// positions of the block (vertical-track crossings) along a horizontal chain
struct ChainBlock {
  std::vector<int> chain;
  int vlo = -1, vhi = -1;
};

inline ChainBlock chain_block(const IsoradialGraph& g, int track) {
  ChainBlock cb;
  cb.chain = track_chain(g, track);
  for (std::size_t i = 0; i < cb.chain.size(); ++i) {
    int other = other_track(g, cb.chain[i], track);
    if (g.tracks[other].kind == TrackKind::Vertical) {
      if (cb.vlo < 0) cb.vlo = static_cast<int>(i);
      cb.vhi = static_cast<int>(i);
    }
  }
  if (cb.vlo < 0) throw std::runtime_error("chain_block: track crosses no vertical track");
  for (int i = cb.vlo; i <= cb.vhi; ++i) {
    int other = other_track(g, cb.chain[i], track);
    if (g.tracks[other].kind != TrackKind::Vertical)
      throw std::runtime_error("chain_block: block crossings not contiguous");
  }
  return cb;
}

}  // namespace detail

// Moves the crossing of two adjacent horizontal tracks next to the block by
// convexification-only flips (no rhombus of the block is touched).
inline void make_crossing_adjacent(MoveContext& ctx, int ta, int tb) {
  for (;;) {
    int rho = crossing_rhombus(ctx.g, ta, tb);
    if (rho < 0) throw std::runtime_error("make_crossing_adjacent: tracks do not cross");
    auto cb = detail::chain_block(ctx.g, ta);
    int pos = detail::chain_pos(cb.chain, rho);
    int blocker = -1;
    if (pos < cb.vlo && pos + 1 < cb.vlo)
      blocker = cb.chain[pos + 1];
    else if (pos > cb.vhi && pos - 1 > cb.vhi)
      blocker = cb.chain[pos - 1];
    if (blocker < 0) {
      auto cb2 = detail::chain_block(ctx.g, tb);
      int pos2 = detail::chain_pos(cb2.chain, rho);
      if ((pos2 < cb2.vlo && pos2 + 1 < cb2.vlo) || (pos2 > cb2.vhi && pos2 - 1 > cb2.vhi))
        throw std::runtime_error("make_crossing_adjacent: asymmetric blocker state");
      return;
    }
    int h = detail::other_track(ctx.g, blocker, ta);
    detail::flip_track_triangle(ctx, h, ta, tb);
  }
}

struct TrackExchangePlan {
  int lower_track = -1, upper_track = -1;
  std::vector<SttRecord> records;  // premoves flagged, then the slide
  int slide_steps = 0;
};

// Exchange of two adjacent horizontal tracks across the square block.
// Equal transverse angles: positional swap only, empty record list.
inline TrackExchangePlan track_exchange(IsoradialGraph& g, int row, Configuration* config,
                                        double q, Rng* rng) {
  if (!g.square) throw std::invalid_argument("track_exchange: no square block metadata");
  auto& meta = *g.square;
  if (row < 0 || row + 1 >= meta.height)
    throw std::invalid_argument("track_exchange: row out of range");
  TrackExchangePlan plan;
  int ta = meta.row_track[row];
  int tb = meta.row_track[row + 1];
  plan.lower_track = ta;
  plan.upper_track = tb;
  if (angle_gap_mod_pi(g.tracks[ta].angle, g.tracks[tb].angle) < 1e-12) {
    std::swap(meta.row_track[row], meta.row_track[row + 1]);
    return plan;
  }

  MoveContext ctx{g, config, q, rng, &plan.records, false, {}, 2000000};
  ctx.premove = true;
  make_crossing_adjacent(ctx, ta, tb);
  ctx.premove = false;

  // slide the crossing across every vertical track, once each
  std::set<int> passed;
  for (int step = 0; step < meta.width; ++step) {
    int rho = crossing_rhombus(g, ta, tb);
    auto chain = track_chain(g, ta);
    int pos = detail::chain_pos(chain, rho);
    int vertical = -1, next = -1;
    for (int d : {-1, +1}) {
      int idx = pos + d;
      if (idx < 0 || idx >= static_cast<int>(chain.size())) continue;
      int cand = detail::other_track(g, chain[idx], ta);
      if (g.tracks[cand].kind == TrackKind::Vertical && !passed.count(cand)) {
        vertical = cand;
        next = chain[idx];
      }
    }
    if (vertical < 0) throw std::runtime_error("track_exchange: slide lost its direction");
    int partner = crossing_rhombus(g, vertical, tb);
    auto site = detail::site_of_rhombi(g, rho, next, partner);
    if (!site) throw std::runtime_error("track_exchange: slide hexagon missing");
    ctx.apply(*site);
    passed.insert(vertical);
    ++plan.slide_steps;
  }
  std::swap(meta.row_track[row], meta.row_track[row + 1]);
  return plan;
}

namespace detail {

inline int row_of_track(const SquareMeta& meta, int label) {
  for (int j = 0; j < meta.height; ++j)
    if (meta.row_track[j] == label) return j;
  throw std::invalid_argument("row_of_track: label not present");
}

}  // namespace detail

// moves a horizontal track up (delta_rows > 0) or down by repeated
// adjacent exchanges
inline std::vector<SttRecord> move_track(IsoradialGraph& g, int label, int delta_rows,
                                         Configuration* config, double q, Rng* rng) {
  std::vector<SttRecord> records;
  int steps = std::abs(delta_rows);
  for (int s = 0; s < steps; ++s) {
    int row = detail::row_of_track(*g.square, label);
    int lower = delta_rows > 0 ? row : row - 1;
    auto plan = track_exchange(g, lower, config, q, rng);
    records.insert(records.end(), plan.records.begin(), plan.records.end());
  }
  return records;
}

}  // namespace isorc

#endif

#ifndef ISORC_SIGMA_HPP
#define ISORC_SIGMA_HPP

#include <set>
#include <stdexcept>
#include <vector>

#include "isorc/builders.hpp"
#include "isorc/exchange.hpp"

namespace isorc {

// label of the horizontal track at logical row index (0 = first row above
// the base), valid in the original row order of the builder
inline int horizontal_label(const IsoradialGraph& g, int logical_row) {
  if (!g.square) throw std::invalid_argument("horizontal_label: no square metadata");
  int physical = logical_row + g.square->base_row;
  if (physical < 0 || physical >= g.square->height)
    throw std::invalid_argument("horizontal_label: row out of range");
  return g.square->width + physical;
}

namespace detail {

// Retiles the flanks of g to match the canonical convexification target:
// the crossings are pulled to the frontier in the target's insertion
// order and frozen.  All moves are convexification-only.
inline void equalize_flanks(MoveContext& ctx, const std::vector<ConvexEvent>& target_events) {
  std::set<int> frozen;
  for (const auto& ev : target_events) {
    int w1 = ev.track_low, w2 = ev.track_high;
    for (;;) {
      int rho = crossing_rhombus(ctx.g, w1, w2);
      if (rho < 0) throw std::runtime_error("equalize_flanks: missing crossing");
      // nearest unfrozen crossing between rho and the block, along either track
      int blocker = -1;
      for (int t : {w1, w2}) {
        auto cb = chain_block(ctx.g, t);
        int pos = chain_pos(cb.chain, rho);
        int step = pos < cb.vlo ? 1 : -1;
        int stop = pos < cb.vlo ? cb.vlo : cb.vhi;
        for (int i = pos + step; i != stop && blocker < 0; i += step)
          if (!frozen.count(cb.chain[i])) blocker = cb.chain[i];
        if (blocker >= 0) {
          int h = other_track(ctx.g, blocker, t);
          flip_track_triangle(ctx, h, w1, w2);
          break;
        }
      }
      if (blocker < 0) {
        frozen.insert(rho);
        ctx.forbidden_rhombi.insert(rho);
        break;
      }
    }
  }
  ctx.forbidden_rhombi.clear();
}

}  // namespace detail

struct SigmaResult {
  std::vector<SttRecord> records;
  std::uint64_t final_hash = 0;
};

// Block inversion sequences.  sigma_down sends the upper-block tracks to
// the bottom of the lower block one by one; sigma_up sends the lower-block
// tracks to the top.  The base row is never touched.  Both end with
// convexification-only moves towards the canonical convexification of the
// swapped mixture, so sigma_up(G) == sigma_down(G) as graphs.
inline SigmaResult run_sigma(IsoradialGraph& g, Configuration* config, const MixedSpec& spec,
                             double q, Rng* rng, bool upward) {
  if (!g.square) throw std::invalid_argument("run_sigma: not a mixed graph");
  SigmaResult out;
  int rows2 = spec.N2 + 1;  // rows of block 2 above the base

  if (rows2 > 0) {
    if (upward) {
      for (int k = spec.N1; k >= 0; --k) {
        auto recs = move_track(g, horizontal_label(g, k), rows2, config, q, rng);
        out.records.insert(out.records.end(), recs.begin(), recs.end());
        if (spec.symmetric && k > 0) {
          auto low = move_track(g, horizontal_label(g, -k), -std::max(spec.N2, 0), config, q, rng);
          out.records.insert(out.records.end(), low.begin(), low.end());
        }
      }
    } else {
      for (int k = spec.N1 + 1; k <= spec.N1 + spec.N2 + 1; ++k) {
        auto recs = move_track(g, horizontal_label(g, k), -(spec.N1 + 1), config, q, rng);
        out.records.insert(out.records.end(), recs.begin(), recs.end());
      }
      if (spec.symmetric) {
        for (int k = -(spec.N1 + 1); k >= -(spec.N1 + std::max(spec.N2, 0)); --k) {
          auto recs = move_track(g, horizontal_label(g, k), spec.N1, config, q, rng);
          out.records.insert(out.records.end(), recs.begin(), recs.end());
        }
      }
    }
  }

  // trailing convexification-only moves toward the canonical target
  auto target = build_mixed(spec.N2 < 0 ? spec : spec.swapped());
  MoveContext ctx{g, config, q, rng, &out.records, false, {}, 2000000};
  ctx.premove = true;
  detail::equalize_flanks(ctx, target.events);

  out.final_hash = g.hash();
  if (out.final_hash != target.graph.hash())
    throw std::runtime_error("run_sigma: final graph differs from canonical target");
  return out;
}

inline SigmaResult sigma_up(IsoradialGraph& g, Configuration* config, const MixedSpec& spec,
                            double q, Rng* rng) {
  return run_sigma(g, config, spec, q, rng, true);
}

inline SigmaResult sigma_down(IsoradialGraph& g, Configuration* config, const MixedSpec& spec,
                              double q, Rng* rng) {
  return run_sigma(g, config, spec, q, rng, false);
}

}  // namespace isorc

#endif

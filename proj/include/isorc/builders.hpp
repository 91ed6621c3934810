#ifndef ISORC_BUILDERS_HPP
#define ISORC_BUILDERS_HPP

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "isorc/graph.hpp"
#include "isorc/weights.hpp"

namespace isorc {

// Transverse angles of the vertical (alpha) and horizontal (beta) tracks.
struct AngleSequences {
  std::vector<double> alpha;
  std::vector<double> beta;

  // sup alpha < inf beta and inf alpha > sup beta - pi
  void validate() const {
    if (alpha.empty() || beta.empty())
      throw std::invalid_argument("AngleSequences: zero extent");
    double amax = *std::max_element(alpha.begin(), alpha.end());
    double amin = *std::min_element(alpha.begin(), alpha.end());
    double bmax = *std::max_element(beta.begin(), beta.end());
    double bmin = *std::min_element(beta.begin(), beta.end());
    if (!(amax < bmin))
      throw std::invalid_argument("AngleSequences: need sup(alpha) < inf(beta)");
    if (!(amin > bmax - kPi))
      throw std::invalid_argument("AngleSequences: need inf(alpha) > sup(beta) - pi");
  }

  double bounded_angle_parameter() const {
    double amax = *std::max_element(alpha.begin(), alpha.end());
    double amin = *std::min_element(alpha.begin(), alpha.end());
    double bmax = *std::max_element(beta.begin(), beta.end());
    double bmin = *std::min_element(beta.begin(), beta.end());
    return std::min(bmin - amax, amin - bmax + kPi);
  }
};

// Finite isoradial square lattice.  Diamond vertices x_{i,j} carry
// i in [0,W], j in [0,H]; the base is the vertex row base_row, so in
// logical coordinates (i, j - base_row) the base is row 0 and x_{i,j}
// is primal iff i+j is even.
inline IsoradialGraph build_square_lattice(const AngleSequences& seqs, int base_row = 0,
                                           int base_col = 0) {
  seqs.validate();
  int W = static_cast<int>(seqs.alpha.size());
  int H = static_cast<int>(seqs.beta.size());
  if (base_row < 0 || base_row > H)
    throw std::invalid_argument("build_square_lattice: base_row out of range");
  if (base_col < 0 || base_col > W)
    throw std::invalid_argument("build_square_lattice: base_col out of range");

  IsoradialGraph g;
  std::vector<Vec2> u(W), v(H);
  for (int i = 0; i < W; ++i) u[i] = {std::cos(seqs.alpha[i]), std::sin(seqs.alpha[i])};
  for (int j = 0; j < H; ++j) v[j] = {std::cos(seqs.beta[j]), std::sin(seqs.beta[j])};

  std::vector<Vec2> xs(W + 1), ys(H + 1);
  for (int i = 1; i <= W; ++i) xs[i] = xs[i - 1] + u[i - 1];
  for (int j = 1; j <= H; ++j) ys[j] = ys[j - 1] + v[j - 1];
  Vec2 origin_shift = xs[base_col] + ys[base_row];

  SquareMeta meta;
  meta.width = W;
  meta.height = H;
  meta.base_row = base_row;
  meta.base_col = base_col;
  meta.vertex_grid.assign((W + 1) * (H + 1), -1);

  g.verts.reserve((W + 1) * (H + 1));
  for (int j = 0; j <= H; ++j)
    for (int i = 0; i <= W; ++i) {
      Vertex vert;
      vert.pos = xs[i] + ys[j] - origin_shift;
      vert.primal = (((i + j - base_row - base_col) % 2) + 4) % 2 == 0;
      meta.vertex_grid[j * (W + 1) + i] = static_cast<int>(g.verts.size());
      g.verts.push_back(vert);
    }

  g.tracks.resize(W + H);
  for (int i = 0; i < W; ++i)
    g.tracks[i] = TrackInfo{direction_mod_pi(u[i]), TrackKind::Vertical, i - base_col};
  for (int j = 0; j < H; ++j)
    g.tracks[W + j] = TrackInfo{direction_mod_pi(v[j]), TrackKind::Horizontal, j - base_row};

  g.rhombi.reserve(W * H);
  for (int j = 0; j < H; ++j)
    for (int i = 0; i < W; ++i) {
      int a = meta.vid(i, j), b = meta.vid(i + 1, j), c = meta.vid(i + 1, j + 1),
          d = meta.vid(i, j + 1);
      Rhombus r;
      if (g.verts[a].primal) {
        r.corners = {a, b, c, d};
        r.track = {i, W + j};
      } else {
        r.corners = {b, c, d, a};
        r.track = {W + j, i};
      }
      g.rhombi.push_back(r);
    }

  meta.row_track.resize(H);
  for (int j = 0; j < H; ++j) meta.row_track[j] = W + j;
  meta.col_track.resize(W);
  for (int i = 0; i < W; ++i) meta.col_track[i] = i;
  for (int i = 0; i <= W; ++i) meta.base_vertices.push_back(meta.vid(i, base_row));
  meta.grid_version = g.version;

  g.eps_bap = seqs.bounded_angle_parameter();
  g.square = std::move(meta);
  return g;
}

// One boundary insertion of the convexification algorithm: the crossing
// of two horizontal tracks added on one side (+1 right, -1 left).
struct ConvexEvent {
  int side = 0;
  int track_low = -1;   // boundary-lower track at insertion time
  int track_high = -1;  // boundary-upper track
  int rhombus = -1;
};

namespace detail {

// One convexification pass along one boundary of a square block.
// side = +1 works the right boundary, -1 the left.  rows [j_lo, j_hi]
// (vertex rows) delimit the stretch being convexified; pairs are never
// merged across the base when the caller splits the range.
inline void convexify_side(IsoradialGraph& g, int side, int j_lo, int j_hi,
                           std::vector<int>& added, std::vector<ConvexEvent>& events,
                           std::pair<int, int> prioritized = {-1, -1}) {
  const auto& meta = *g.square;
  int W = meta.width;

  // current outer boundary, oriented counterclockwise (region on the left)
  std::map<int, int> boundary_next;
  for (int r = 0; r < g.edge_count(); ++r) {
    const auto& c = g.rhombi[r].corners;
    for (int k = 0; k < 4; ++k) {
      auto key = IsoradialGraph::edge_key(c[k], c[(k + 1) % 4]);
      auto pair = g.edge_map().at(key);
      if (pair[1] == -1) boundary_next[c[k]] = c[(k + 1) % 4];
    }
  }
  // walk from corner to corner on the requested side (bottom to top)
  int from = side > 0 ? meta.vid(W, j_lo) : meta.vid(0, j_hi);
  int to = side > 0 ? meta.vid(W, j_hi) : meta.vid(0, j_lo);
  std::vector<int> bverts{from};
  for (int v = from; v != to;) {
    auto it = boundary_next.find(v);
    if (it == boundary_next.end() || bverts.size() > boundary_next.size())
      throw std::runtime_error("convexify: boundary walk failed");
    v = it->second;
    bverts.push_back(v);
  }
  if (side < 0) std::reverse(bverts.begin(), bverts.end());

  // horizontal track label of each boundary edge (its transverse segment)
  std::vector<int> blabels;
  for (std::size_t k = 0; k + 1 < bverts.size(); ++k) {
    auto key = IsoradialGraph::edge_key(bverts[k], bverts[k + 1]);
    int r = g.edge_map().at(key)[0];
    double ang = direction_mod_pi(g.pos(bverts[k + 1]) - g.pos(bverts[k]));
    int t0 = g.rhombi[r].track[0], t1 = g.rhombi[r].track[1];
    blabels.push_back(angle_gap_mod_pi(ang, g.tracks[t0].angle) <
                              angle_gap_mod_pi(ang, g.tracks[t1].angle)
                          ? t0
                          : t1);
  }

  auto dir_of = [&](std::size_t k) { return g.pos(bverts[k + 1]) - g.pos(bverts[k]); };

  bool prioritized_done = false;
  while (true) {
    int pick = -1;
    for (std::size_t k = 0; k + 1 < blabels.size(); ++k) {
      double gain = (dir_of(k + 1).x - dir_of(k).x) * side;
      if (gain > 1e-12) {
        bool is_priority =
            !prioritized_done && prioritized.first >= 0 &&
            ((blabels[k] == prioritized.first && blabels[k + 1] == prioritized.second) ||
             (blabels[k] == prioritized.second && blabels[k + 1] == prioritized.first));
        if (pick < 0 || is_priority) pick = static_cast<int>(k);
        if (is_priority) break;
      }
    }
    if (pick < 0) break;
    prioritized_done = true;

    std::size_t k = static_cast<std::size_t>(pick);
    Vec2 dj1 = dir_of(k + 1);
    int b0 = bverts[k], b1 = bverts[k + 1], b2 = bverts[k + 2];
    Vertex w;
    w.pos = g.pos(b0) + dj1;
    w.primal = g.verts[b1].primal;
    int wid = static_cast<int>(g.verts.size());
    g.verts.push_back(w);

    Rhombus r;
    int lab_lo = blabels[k], lab_hi = blabels[k + 1];
    if (side > 0) {
      // cycle b0 -> w -> b2 -> b1 is counterclockwise on the right side
      r.corners = g.verts[b0].primal ? std::array<int, 4>{b0, wid, b2, b1}
                                     : std::array<int, 4>{wid, b2, b1, b0};
    } else {
      // cycle b0 -> b1 -> b2 -> w is counterclockwise on the left side
      r.corners = g.verts[b0].primal ? std::array<int, 4>{b0, b1, b2, wid}
                                     : std::array<int, 4>{b1, b2, wid, b0};
    }
    // align track slots with the stored side convention
    Vec2 s01 = g.verts[r.corners[1]].pos - g.verts[r.corners[0]].pos;
    double a01 = direction_mod_pi(s01);
    if (angle_gap_mod_pi(a01, g.tracks[lab_lo].angle) <
        angle_gap_mod_pi(a01, g.tracks[lab_hi].angle))
      r.track = {lab_lo, lab_hi};
    else
      r.track = {lab_hi, lab_lo};
    added.push_back(static_cast<int>(g.rhombi.size()));
    events.push_back({side, lab_lo, lab_hi, static_cast<int>(g.rhombi.size())});
    g.rhombi.push_back(r);
    g.bump_version();

    bverts[k + 1] = wid;
    std::swap(blabels[k], blabels[k + 1]);
  }
}

}  // namespace detail

struct ConvexifyResult {
  IsoradialGraph graph;
  std::vector<int> added;           // appended rhombus ids
  std::vector<ConvexEvent> events;  // in insertion order
};

// Boundary insertion algorithm for convexification: one rhombus per
// inverted pair of adjacent boundary directions until both the left and
// the right boundary are convex.  If prioritized_pair (two adjacent
// horizontal track labels) is given, their crossing is inserted first and
// thus ends up adjacent to the block.  split_at_base convexifies the
// parts above and below the base separately.
inline ConvexifyResult convexify(const IsoradialGraph& input,
                                 std::pair<int, int> prioritized_pair = {-1, -1},
                                 bool split_at_base = false) {
  if (!input.square)
    throw std::invalid_argument("convexify: need a square-lattice block");
  ConvexifyResult out;
  out.graph = input;
  IsoradialGraph& g = out.graph;
  int H = g.square->height;
  int base = g.square->base_row;
  for (int side : {+1, -1}) {
    if (split_at_base && base > 0 && base < H) {
      detail::convexify_side(g, side, base, H, out.added, out.events, prioritized_pair);
      detail::convexify_side(g, side, 0, base, out.added, out.events, prioritized_pair);
    } else {
      detail::convexify_side(g, side, 0, H, out.added, out.events, prioritized_pair);
    }
  }
  if (!out.added.empty()) {
    g.bump_version();
    g.square->grid_version = g.version;  // block geometry is untouched
  }
  return out;
}

inline double periodic_angle(const std::vector<double>& period, int k) {
  int n = static_cast<int>(period.size());
  int m = ((k % n) + n) % n;
  return period[m];
}

struct MixedSpec {
  std::vector<double> alpha_period;
  std::vector<double> beta1_period;
  std::vector<double> beta2_period;
  int M = 1;   // half-width: 2M+1 vertical tracks
  int N1 = 0;  // block 1 spans N1+1 rows (2N1+1 when symmetric)
  int N2 = 0;  // block 2 spans N2+1 rows above (plus N2 below when
               // symmetric); -1 gives an empty second block
  bool symmetric = false;

  MixedSpec swapped() const {
    MixedSpec s = *this;
    std::swap(s.beta1_period, s.beta2_period);
    std::swap(s.N1, s.N2);
    return s;
  }
};

// Mixed graph: a block of lattice 1 below a block of lattice 2, sharing
// the vertical angle sequence, convexified.  The symmetric variant
// mirrors the construction below the base, convexifying each side of the
// base separately; the lower half has one row less.
inline ConvexifyResult build_mixed(const MixedSpec& spec) {
  if (spec.M < 0 || spec.N1 < 0 || spec.N2 < -1)
    throw std::invalid_argument("build_mixed: negative extent");
  AngleSequences seqs;
  for (int i = -spec.M; i <= spec.M; ++i)
    seqs.alpha.push_back(periodic_angle(spec.alpha_period, i));
  int base_row = 0;
  if (!spec.symmetric) {
    for (int k = 0; k <= spec.N1; ++k)
      seqs.beta.push_back(periodic_angle(spec.beta1_period, k));
    for (int k = 0; k <= spec.N2; ++k)
      seqs.beta.push_back(periodic_angle(spec.beta2_period, k));
  } else {
    for (int k = -spec.N2; k <= -1; ++k)
      seqs.beta.push_back(periodic_angle(spec.beta2_period, k));
    for (int k = -spec.N1; k <= spec.N1; ++k)
      seqs.beta.push_back(periodic_angle(spec.beta1_period, k));
    for (int k = 0; k <= spec.N2; ++k)
      seqs.beta.push_back(periodic_angle(spec.beta2_period, k));
    base_row = std::max(spec.N2, 0) + spec.N1;
  }
  IsoradialGraph block = build_square_lattice(seqs, base_row, spec.M);
  return convexify(block, {-1, -1}, spec.symmetric);
}

}  // namespace isorc

#endif

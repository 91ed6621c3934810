#ifndef ISORC_TEST_FIXTURES_HPP
#define ISORC_TEST_FIXTURES_HPP

#include <cmath>

#include "isorc/builders.hpp"
#include "isorc/graph.hpp"
#include "isorc/periodic.hpp"
#include "isorc/rcm.hpp"
#include "isorc/weights.hpp"

namespace isorc_test {

using namespace isorc;

// Abstract triangle on vertices A=0, B=1, C=2 with edges in slot order
// a = BC, b = CA, c = AB; every vertex is boundary.
inline WeightedView triangle_view(double ya, double yb, double yc) {
  WeightedView v;
  v.n = 3;
  v.edges = {{1, 2}, {2, 0}, {0, 1}};
  v.y = {ya, yb, yc};
  v.boundary = {0, 1, 2};
  return v;
}

// Abstract star on A=0, B=1, C=2, centre O=3 with legs a' = OA, b' = OB,
// c' = OC; the boundary is {A, B, C}.
inline WeightedView star_view(double ya, double yb, double yc) {
  WeightedView v;
  v.n = 4;
  v.edges = {{0, 3}, {1, 3}, {2, 3}};
  v.y = {ya, yb, yc};
  v.boundary = {0, 1, 2};
  return v;
}

// Standalone hexagon of three rhombi: a triangle ABC with subtended
// angles (a, b, c), a+b+c = 2 pi, embedded isoradially.  Slot order of
// the rhombi is (BC, CA, AB).
inline IsoradialGraph hexagon_graph(double a, double b, double c) {
  if (std::fabs(a + b + c - 2.0 * kPi) > 1e-12)
    throw std::invalid_argument("hexagon_graph: angles must sum to 2 pi");
  double th_p = 0.0, th_q = kPi - c, th_r = a;
  Vec2 p{std::cos(th_p), std::sin(th_p)};
  Vec2 q{std::cos(th_q), std::sin(th_q)};
  Vec2 r{std::cos(th_r), std::sin(th_r)};

  IsoradialGraph g;
  Vec2 A{0, 0};
  auto add = [&](Vec2 pos, bool primal) {
    g.verts.push_back({pos, primal});
    return static_cast<int>(g.verts.size()) - 1;
  };
  int vA = add(A, true);
  int vd1 = add(A + p, false);
  int vB = add(A + p + q, true);
  int vd2 = add(A + p + q + r, false);
  int vC = add(A + q + r, true);
  int vd3 = add(A + r, false);
  int vo = add(A + q, false);

  g.tracks = {TrackInfo{direction_mod_pi(p), TrackKind::Other, 0},
              TrackInfo{direction_mod_pi(q), TrackKind::Other, 1},
              TrackInfo{direction_mod_pi(r), TrackKind::Other, 2}};
  // slot a = BC, slot b = CA, slot c = AB
  g.rhombi.push_back({{vB, vd2, vC, vo}, {2, 0}});
  g.rhombi.push_back({{vC, vd3, vA, vo}, {1, 2}});
  g.rhombi.push_back({{vA, vd1, vB, vo}, {0, 1}});
  g.validate();
  return g;
}

inline PeriodicPatch rhombille_patch() {
  PeriodicPatch patch;
  auto at = [](double deg) {
    double rad = deg * kPi / 180.0;
    return Vec2{std::cos(rad), std::sin(rad)};
  };
  Vec2 o{0.0, 0.0};
  Vec2 d1 = at(90), d2 = at(210), d3 = at(330);
  Vec2 p12 = d1 + d2, p23 = d2 + d3, p31 = d3 + d1;
  patch.rhombi.push_back({{d3, p31, d1, o}});
  patch.rhombi.push_back({{d1, p12, d2, o}});
  patch.rhombi.push_back({{d2, p23, d3, o}});
  patch.tau1 = {std::sqrt(3.0), 0.0};
  patch.tau2 = {std::sqrt(3.0) / 2.0, 1.5};
  return patch;
}

inline AngleSequences regular_seqs(int w, int h) {
  AngleSequences s;
  s.alpha.assign(w, 0.0);
  s.beta.assign(h, kPi / 2.0);
  return s;
}

}  // namespace isorc_test

#endif

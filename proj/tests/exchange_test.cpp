#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "isorc/events.hpp"
#include "isorc/exchange.hpp"
#include "isorc/sigma.hpp"
#include "test_oracles.hpp"

using namespace isorc;
using namespace isorc_test;

namespace {

ConvexifyResult two_row_block(double beta_low, double beta_high, int width) {
  AngleSequences s;
  s.alpha.assign(width, 0.0);
  s.beta = {beta_low, beta_high};
  return convexify(build_square_lattice(s));
}

}  // namespace

TEST_CASE("equal angles exchange is the empty sequence") {
  auto res = two_row_block(kPi / 2.0, kPi / 2.0, 3);
  CHECK(res.added.empty());
  IsoradialGraph g = res.graph;
  int t0 = g.square->row_track[0], t1 = g.square->row_track[1];
  Rng rng(5);
  auto plan = track_exchange(g, 0, nullptr, 2.0, &rng);
  CHECK(plan.records.empty());
  CHECK(plan.slide_steps == 0);
  CHECK(g.square->row_track[0] == t1);
  CHECK(g.square->row_track[1] == t0);
}

TEST_CASE("track exchange slides across the full width") {
  for (int width : {2, 3, 4}) {
    auto res = two_row_block(2.0, 1.2, width);
    REQUIRE(res.added.size() == 1);
    IsoradialGraph g = res.graph;
    Configuration c = Configuration::zeros(g.edge_count(), g.version);
    Rng rng(88);
    int lower = g.square->row_track[0], upper = g.square->row_track[1];
    auto plan = track_exchange(g, 0, &c, 2.0, &rng);
    CHECK(plan.slide_steps == width);
    int premoves = 0;
    for (const auto& r : plan.records) premoves += r.premove ? 1 : 0;
    CHECK(premoves == 0);  // the single crossing starts adjacent
    g.validate();
    validate_tracks(g);
    CHECK(g.square->row_track[0] == upper);
    CHECK(g.square->row_track[1] == lower);

    // the result is the canonical convexification of the swapped block
    AngleSequences swapped;
    swapped.alpha.assign(width, 0.0);
    swapped.beta = {1.2, 2.0};
    auto target = convexify(build_square_lattice(swapped));
    CHECK(g.hash() == target.graph.hash());
  }
}

TEST_CASE("hexagon positions along the sliding path") {
  // 2-row convexified block with distinct angles: the crossing visits
  // width+1 positions over the exchange, and the only hexagons present
  // at any stage live on the sliding path
  int width = 3;
  auto res = two_row_block(2.0, 1.2, width);
  IsoradialGraph g = res.graph;
  int ta = g.square->row_track[0], tb = g.square->row_track[1];

  // collect the move sequence once
  IsoradialGraph dry = g;
  Configuration cd = Configuration::zeros(dry.edge_count(), dry.version);
  Rng rng(3);
  auto plan = track_exchange(dry, 0, &cd, 2.0, &rng);
  CHECK(plan.slide_steps == width);

  // replay move by move, recording crossing positions and hexagon counts
  std::set<std::pair<std::int64_t, std::int64_t>> positions;
  auto record_position = [&](const IsoradialGraph& graph) {
    int rho = crossing_rhombus(graph, ta, tb);
    Vec2 centre{0, 0};
    for (int k = 0; k < 4; ++k) centre = centre + graph.pos(graph.rhombi[rho].corners[k]);
    positions.insert({std::llround(centre.x * 250000.0), std::llround(centre.y * 250000.0)});
  };
  record_position(g);
  CHECK(find_stt_sites(g).size() == 1);  // crossing adjacent to the block
  for (std::size_t step = 0; step < plan.records.size(); ++step) {
    auto site = site_at(g, plan.records[step].center);
    REQUIRE(site.has_value());
    transform_graph(g, *site);
    record_position(g);
    std::size_t hexes = find_stt_sites(g).size();
    bool last = step + 1 == plan.records.size();
    CHECK(hexes == (last ? 1u : 2u));  // forward and backward sites mid-slide
  }
  CHECK(positions.size() == static_cast<std::size_t>(width) + 1);
}

TEST_CASE("exact law is preserved through a whole track exchange") {
  double q = 2.0;
  auto res = two_row_block(2.0, 1.2, 2);  // 4 block edges + 1 crossing
  IsoradialGraph g = res.graph;
  REQUIRE(g.edge_count() == 5);

  // the move sequence is configuration-independent: dry run to fetch it
  IsoradialGraph dry = g;
  Rng rng(11);
  auto plan = track_exchange(dry, 0, nullptr, q, &rng);
  std::vector<int> centres;
  for (const auto& r : plan.records) centres.push_back(r.center);

  for (auto bc : {BoundaryCondition::free(), BoundaryCondition::wired()}) {
    IsoradialGraph work = g;
    auto dist = exact_law_vector(work, q, bc);
    dist = push_through_centres(work, centres, q, dist);
    auto target = exact_law_vector(work, q, bc);
    double worst = 0.0;
    for (std::size_t m = 0; m < dist.size(); ++m)
      worst = std::max(worst, std::fabs(static_cast<double>(dist[m] - target[m])));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("sigma on the degenerate mixture is label-blind identity") {
  MixedSpec spec;
  spec.alpha_period = {0.0};
  spec.beta1_period = {kPi / 2.0};
  spec.beta2_period = {kPi / 2.0};
  spec.M = 1;
  spec.N1 = 0;
  spec.N2 = 0;
  auto res = build_mixed(spec);
  IsoradialGraph g = res.graph;
  auto before = g.hash();
  Rng rng(2);
  auto sig = sigma_up(g, nullptr, spec, 2.0, &rng);
  CHECK(sig.records.empty());
  CHECK(g.hash() == before);
}

TEST_CASE("sigma with an empty second block is the identity") {
  MixedSpec spec;
  spec.alpha_period = {0.0};
  spec.beta1_period = {kPi / 2.0};
  spec.beta2_period = {2.0};
  spec.M = 1;
  spec.N1 = 1;
  spec.N2 = -1;
  auto res = build_mixed(spec);
  IsoradialGraph g = res.graph;
  auto before = g.hash();
  Rng rng(2);
  auto sig = sigma_down(g, nullptr, spec, 2.0, &rng);
  CHECK(sig.records.empty());
  CHECK(g.hash() == before);
}

TEST_CASE("sigma up and sigma down finish on the same graph") {
  MixedSpec spec;
  spec.alpha_period = {0.0};
  spec.beta1_period = {kPi / 2.0};
  spec.beta2_period = {2.2};
  spec.M = 1;
  spec.N1 = 0;
  spec.N2 = 0;
  auto res = build_mixed(spec);

  IsoradialGraph gu = res.graph, gd = res.graph;
  Rng ru(7), rd(8);
  auto su = sigma_up(gu, nullptr, spec, 2.0, &ru);
  auto sd = sigma_down(gd, nullptr, spec, 2.0, &rd);
  CHECK(su.final_hash == sd.final_hash);
  CHECK(gu.hash() == gd.hash());
  gu.validate();
  validate_tracks(gu);
}

TEST_CASE("sigma with three distinct angles exercises the equalisation") {
  MixedSpec spec;
  spec.alpha_period = {0.0};
  spec.beta1_period = {1.1};
  spec.beta2_period = {1.9, 2.5};
  spec.M = 1;
  spec.N1 = 0;
  spec.N2 = 1;
  auto res = build_mixed(spec);

  IsoradialGraph gu = res.graph, gd = res.graph;
  Rng ru(7), rd(8);
  auto su = sigma_up(gu, nullptr, spec, 2.0, &ru);
  auto sd = sigma_down(gd, nullptr, spec, 2.0, &rd);
  CHECK(su.final_hash == sd.final_hash);
  gu.validate();
  validate_tracks(gu);
  gd.validate();
}

TEST_CASE("pushforward of the free law under sigma up equals the target law") {
  double q = 2.0;
  MixedSpec spec;
  spec.alpha_period = {0.0};
  spec.beta1_period = {kPi / 2.0};
  spec.beta2_period = {2.2};
  spec.M = 1;
  spec.N1 = 0;
  spec.N2 = 0;
  auto res = build_mixed(spec);
  REQUIRE(res.graph.edge_count() == 7);

  IsoradialGraph dry = res.graph;
  Rng rng(1);
  auto sig = sigma_up(dry, nullptr, spec, q, &rng);
  std::vector<int> centres;
  for (const auto& r : sig.records) centres.push_back(r.center);

  IsoradialGraph work = res.graph;
  auto dist = exact_law_vector(work, q, BoundaryCondition::free());
  dist = push_through_centres(work, centres, q, dist);
  auto target = exact_law_vector(work, q, BoundaryCondition::free());
  double worst = 0.0;
  for (std::size_t m = 0; m < dist.size(); ++m)
    worst = std::max(worst, std::fabs(static_cast<double>(dist[m] - target[m])));
  CHECK(worst < 1e-10);
}

TEST_CASE("symmetric sigma preserves the base row") {
  MixedSpec spec;
  spec.alpha_period = {0.0};
  spec.beta1_period = {kPi / 2.0};
  spec.beta2_period = {2.1};
  spec.M = 1;
  spec.N1 = 0;
  spec.N2 = 0;
  spec.symmetric = true;
  auto res = build_mixed(spec);
  IsoradialGraph g = res.graph;
  auto base_ids = g.square->base_vertices;
  std::vector<Vec2> base_pos;
  for (int v : base_ids) base_pos.push_back(g.pos(v));

  Configuration c = Configuration::zeros(g.edge_count(), g.version);
  Rng rng(12);
  for (int e = 0; e < c.size(); ++e) c.open[e] = rng.bernoulli(0.5);
  auto sig = sigma_up(g, &c, spec, 2.0, &rng);
  CHECK(!sig.records.empty());
  for (std::size_t i = 0; i < base_ids.size(); ++i) {
    CHECK(g.pos(base_ids[i]).x == doctest::Approx(base_pos[i].x).epsilon(1e-12));
    CHECK(g.pos(base_ids[i]).y == doctest::Approx(base_pos[i].y).epsilon(1e-12));
  }
}

TEST_CASE("base-anchored arm events survive a full sigma run") {
  double q = 2.0;
  MixedSpec spec;
  spec.alpha_period = {0.0};
  spec.beta1_period = {kPi / 2.0};
  spec.beta2_period = {2.1};
  spec.M = 3;
  spec.N1 = 0;
  spec.N2 = 0;
  spec.symmetric = true;
  auto res = build_mixed(spec);

  Rng rng(314);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    IsoradialGraph g = res.graph;
    Configuration c = Configuration::zeros(g.edge_count(), g.version);
    for (int e = 0; e < c.size(); ++e) c.open[e] = rng.bernoulli(0.55);
    bool before = arm_event(g, c, 2, 0, 1, ArmStyle::BaseAnchored);
    auto sig = sigma_up(g, &c, spec, q, &rng);
    (void)sig;
    bool after = arm_event(g, c, 2, 0, 1, ArmStyle::BaseAnchored);
    CHECK(before == after);
    ++checked;
  }
  CHECK(checked == 60);
}

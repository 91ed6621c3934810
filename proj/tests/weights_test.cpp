#include <cmath>

#include "doctest.h"
#include "isorc/rng.hpp"
#include "isorc/weights.hpp"

using namespace isorc;

TEST_CASE("spectral parameter") {
  CHECK(spectral_r(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(spectral_r(2.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(spectral_r(9.0) == doctest::Approx(0.306348962530033).epsilon(1e-12));
  CHECK(std::isnan(spectral_r(4.0)));
  CHECK_THROWS(spectral_r(0.5));
}

TEST_CASE("edge weights in the three regimes") {
  ModelParams q2{2.0, 1.0};
  auto w = edge_weight(kPi / 2.0, q2);
  CHECK(w.p == doctest::Approx(std::sqrt(2.0) / (1.0 + std::sqrt(2.0))).epsilon(1e-14));
  CHECK(w.y == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  auto w4 = edge_weight(kPi / 2.0, ModelParams{4.0, 1.0});
  CHECK(w4.y == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(w4.p == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  auto wob = edge_weight(2.0 * kPi / 3.0, q2);
  CHECK(wob.y == doctest::Approx(std::sqrt(3.0) - 1.0).epsilon(1e-13));

  CHECK_THROWS(edge_weight(0.0, q2));
  CHECK_THROWS(edge_weight(kPi, q2));
  CHECK_THROWS(edge_weight(1.0, ModelParams{2.0, 0.0}));
}

TEST_CASE("beta multiplies the odds in every regime") {
  for (double q : {1.0, 2.5, 4.0, 7.0})
    for (double th : {0.3, 1.1, 2.4}) {
      double y1 = edge_weight(th, ModelParams{q, 1.0}).y;
      double yb = edge_weight(th, ModelParams{q, 1.7}).y;
      CHECK(yb == doctest::Approx(1.7 * y1).epsilon(1e-13));
    }
}

TEST_CASE("regime continuity at q = 4") {
  double prev = 1e9;
  for (double h : {1e-2, 1e-4}) {
    double worst = 0.0;
    for (double th = 0.2; th < kPi; th += 0.37) {
      double y4 = edge_weight(th, ModelParams{4.0, 1.0}).y;
      double ylo = edge_weight(th, ModelParams{4.0 - h, 1.0}).y;
      double yhi = edge_weight(th, ModelParams{4.0 + h, 1.0}).y;
      worst = std::max({worst, std::fabs(ylo - y4), std::fabs(yhi - y4)});
    }
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("self-duality y(theta) y(pi-theta) = q at beta = 1") {
  for (double q : {1.0, 2.0, 3.7, 4.0, 6.5, 10.0})
    for (double th = 0.1; th < kPi; th += 0.1) {
      ModelParams params{q, 1.0};
      CHECK(edge_weight(th, params).y * edge_weight(kPi - th, params).y ==
            doctest::Approx(q).epsilon(1e-12));
    }
}

TEST_CASE("dual edge weight") {
  ModelParams q2{2.0, 1.0};
  auto d = dual_edge_weight(kPi / 2.0, q2);
  CHECK(d.y == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(d.y * edge_weight(kPi / 2.0, q2).y == doctest::Approx(2.0).epsilon(1e-12));

  auto d2 = dual_edge_weight(2.0 * kPi / 3.0, q2);
  CHECK(d2.y == doctest::Approx(std::sqrt(3.0) + 1.0).epsilon(1e-13));

  // q = 1, theta = pi/3: the dual edge subtends 2 pi / 3
  auto d3 = dual_edge_weight(kPi / 3.0, ModelParams{1.0, 1.0});
  CHECK(d3.y == doctest::Approx(0.532088886237956).epsilon(1e-12));
  CHECK(d3.y * edge_weight(kPi / 3.0, ModelParams{1.0, 1.0}).y ==
        doctest::Approx(1.0).epsilon(1e-12));

  // off-critical duality: beta inverts
  double prod = edge_weight(1.0, ModelParams{3.0, 2.0}).y * dual_edge_weight(1.0, ModelParams{3.0, 2.0}).y;
  CHECK(prod == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("triangle and star residuals") {
  double t = std::sqrt(3.0) - 1.0;
  CHECK(std::fabs(triangle_residual({t, t, t}, 2.0)) < 1e-12);
  CHECK(triangle_residual({1.0, 1.0, 1.0}, 2.0) == doctest::Approx(2.0));

  // q = 1 weights of the symmetric triangle with angles 2 pi / 3
  double y1 = edge_weight(2.0 * kPi / 3.0, ModelParams{1.0, 1.0}).y;
  CHECK(std::fabs(triangle_residual({y1, y1, y1}, 1.0)) < 1e-12);

  double s = std::sqrt(3.0) + 1.0;
  CHECK(std::fabs(star_residual({s, s, s}, 2.0)) < 1e-12);
  CHECK(star_residual({2.0, 2.0, 2.0}, 2.0) == doctest::Approx(-8.0));

  CHECK_THROWS(triangle_residual({0.0, 1.0, 1.0}, 2.0));
}

TEST_CASE("triangle-star equivalence over random critical triples") {
  Rng rng(20240817);
  int done = 0;
  while (done < 100) {
    double q = 1.0 + 7.0 * rng.uniform01();
    double ya = 0.05 + rng.uniform01();
    double yb = 0.05 + rng.uniform01();
    if (ya * yb >= q) continue;
    double yc = (q - ya * yb) / (ya * yb + ya + yb);
    TripleWeights w{ya, yb, yc};
    REQUIRE(std::fabs(triangle_residual(w, q)) < 1e-12);
    CHECK(std::fabs(star_residual(star_from_triangle(w, q), q)) < 1e-10);
    ++done;
  }
}

TEST_CASE("star_from_triangle is an involution with fixed point at y = sqrt q") {
  TripleWeights w{0.3, 1.2, 0.8};
  auto back = star_from_triangle(star_from_triangle(w, 3.0), 3.0);
  CHECK(back.a == doctest::Approx(w.a).epsilon(1e-15));
  CHECK(back.b == doctest::Approx(w.b).epsilon(1e-15));
  CHECK(back.c == doctest::Approx(w.c).epsilon(1e-15));
  auto fixed = star_from_triangle({2.0, 2.0, 2.0}, 4.0);
  CHECK(fixed.a == doctest::Approx(2.0));
}

TEST_CASE("angle-sum criticality at beta = 1") {
  Rng rng(7);
  for (double q : {1.0, 2.0, 3.5, 4.0, 6.0, 9.0}) {
    for (int it = 0; it < 40; ++it) {
      double a, b, c;
      for (;;) {
        a = 0.3 + (kPi - 0.6) * rng.uniform01();
        b = 0.3 + (kPi - 0.6) * rng.uniform01();
        c = 2.0 * kPi - a - b;
        if (c > 0.3 && c < kPi - 0.3) break;
      }
      ModelParams params{q, 1.0};
      TripleWeights w{edge_weight(a, params).y, edge_weight(b, params).y,
                      edge_weight(c, params).y};
      CHECK(std::fabs(triangle_residual(w, q)) < 1e-10);
    }
  }
}

TEST_CASE("drift eta: three algebraic forms agree") {
  // frozen from direct evaluation; all three forms coincide here
  CHECK(drift_eta(kPi / 2.0, 3.0 * kPi / 4.0, 2.0) ==
        doctest::Approx(0.351153302357085).epsilon(1e-12));
  for (double q : {1.0, 2.0, 3.0, 3.9}) {
    for (int i = 1; i <= 20; ++i)
      for (int j = 1; j <= 20; ++j) {
        double A = 0.1 + (kPi - 0.2) * i / 21.0;
        double B = A + 0.05 + (kPi - A - 0.1) * j / 21.0;
        if (!(B - A > 0.0 && B - A < kPi)) continue;
        double p = drift_eta(A, B, q);
        CHECK(std::fabs(p - drift_eta_sine_form(A, B, q)) < 1e-12);
        CHECK(std::fabs(p - drift_eta_cosine_form(A, B, q)) < 1e-12);
      }
  }
  CHECK_THROWS(drift_eta(-0.1, 0.5, 2.0));
  CHECK_THROWS(drift_eta(0.5, 0.5, 2.0));
  CHECK_THROWS(drift_eta(0.5, 0.5 + kPi, 2.0));
}

TEST_CASE("drift eta stays below one on the bounded-angle square") {
  for (double q : {1.0, 2.0, 3.0, 4.0}) {
    double eps = 0.1, sup = 0.0;
    for (int i = 0; i <= 60; ++i)
      for (int j = 0; j <= 60; ++j) {
        double A = eps + (kPi - 2 * eps) * i / 60.0;
        double B = eps + (kPi - 2 * eps) * j / 60.0;
        if (B - A <= 0.0) continue;
        sup = std::max(sup, drift_eta(A, B, q));
      }
    CHECK(sup < 1.0);
    CHECK(sup > 0.5);  // and the bound is not vacuous
  }
}

TEST_CASE("drift eta at the quantum pair approaches one linearly") {
  // A = pi/2, B = pi - eps; eta -> 1 with a slope bounded away from 0
  double q = 2.0;
  double prev_gap = 1.0;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    double eta = drift_eta(kPi / 2.0, kPi - eps, q);
    double gap = 1.0 - eta;
    CHECK(gap > 0.0);
    CHECK(gap < prev_gap);
    double slope = gap / eps;
    CHECK(slope > 0.5);
    CHECK(slope < 2.0);
    prev_gap = gap;
  }
}

TEST_CASE("drift delta") {
  CHECK(drift_delta(kPi / 2.0, 2.0) == doctest::Approx(0.085786437626905).epsilon(1e-12));
  CHECK(drift_delta(kPi / 2.0, 1.0) == doctest::Approx(0.125).epsilon(1e-12));
  for (double q : {1.0, 2.0, 4.0, 8.0})
    for (double eps = 0.05; eps <= kPi / 2.0; eps += 0.1) {
      double d = drift_delta(eps, q);
      CHECK(d > 0.0);
      CHECK(d <= 0.5);
    }
  CHECK_THROWS(drift_delta(0.0, 2.0));
  CHECK_THROWS(drift_delta(2.0, 2.0));
}

TEST_CASE("quantum rates") {
  auto r2 = quantum_rates(2.0);
  CHECK(r2.lambda0 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r2.mu0 == doctest::Approx(0.5).epsilon(1e-14));

  auto r4 = quantum_rates(4.0);
  CHECK(r4.lambda0 == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
  CHECK(r4.mu0 == doctest::Approx(2.0 / kPi).epsilon(1e-14));

  auto r9 = quantum_rates(9.0);
  CHECK(r9.lambda0 == doctest::Approx(0.091335614007159).epsilon(1e-12));
  CHECK(r9.mu0 == doctest::Approx(0.822020526064428).epsilon(1e-12));

  for (double q = 1.0; q <= 10.0 + 1e-9; q += 0.5) {
    auto rr = quantum_rates(q);
    CHECK(rr.mu0 / rr.lambda0 == doctest::Approx(q).epsilon(1e-12));
  }

  CHECK(quantum_rates(2.0).zeta ==
        doctest::Approx(2.0 * std::sqrt(2.0 + std::sqrt(2.0)) / (kPi * kPi)).epsilon(1e-14));

  // limits from either side at q = 4 +- 1e-4 match to 1e-5 (the gap is
  // genuinely of order h, about 2.7e-6 at this h)
  CHECK(std::fabs(quantum_rates(4.0 - 1e-4).lambda0 - r4.lambda0) < 1e-5);
  CHECK(std::fabs(quantum_rates(4.0 + 1e-4).lambda0 - r4.lambda0) < 1e-5);
}

TEST_CASE("drift constants bundle") {
  auto dc = drift_constants_for(0.1, 2.0);
  CHECK(dc.eta > 0.5);
  CHECK(dc.eta < 1.0);
  CHECK(dc.delta > 0.0);
  CHECK(dc.delta <= 0.5);
  CHECK(dc.r == doctest::Approx(0.25));
}

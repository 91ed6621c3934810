#ifndef ISORC_WEIGHTS_HPP
#define ISORC_WEIGHTS_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

namespace isorc {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Width of the guard band around q = 4 inside which the degenerate
// branch is used (the two generic branches cancel catastrophically there).
inline constexpr double kQ4Guard = 1e-9;

struct ModelParams {
  double q = 1.0;
  double beta = 1.0;

  void validate() const {
    if (!(q >= 1.0)) throw std::invalid_argument("ModelParams: require q >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("ModelParams: require beta > 0");
  }
};

enum class Regime { BelowFour, Four, AboveFour };

inline Regime regime_of(double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("regime_of: require q >= 1");
  if (std::fabs(q - 4.0) < kQ4Guard) return Regime::Four;
  return q < 4.0 ? Regime::BelowFour : Regime::AboveFour;
}

// Spectral parameter of the weight formulas.  At q = 4 both inverse-trig
// branches degenerate; NaN is returned as the (unused) marker.
inline double spectral_r(double q) {
  switch (regime_of(q)) {
    case Regime::BelowFour: return std::acos(0.5 * std::sqrt(q)) / kPi;
    case Regime::Four: return std::numeric_limits<double>::quiet_NaN();
    case Regime::AboveFour: return std::acosh(0.5 * std::sqrt(q)) / kPi;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct EdgeWeight {
  double theta = 0.0;  // subtended angle, in (0, pi)
  double y = 0.0;      // odds p / (1 - p)
  double p = 0.0;      // open probability
};

// Isoradial edge weight for a subtended angle theta.  beta multiplies
// the odds y in all three regimes.
inline EdgeWeight edge_weight(double theta, const ModelParams& params) {
  params.validate();
  if (!(theta > 0.0 && theta < kPi))
    throw std::invalid_argument("edge_weight: theta must lie in (0, pi)");
  double y = 0.0;
  switch (regime_of(params.q)) {
    case Regime::BelowFour: {
      double r = spectral_r(params.q);
      y = params.beta * std::sqrt(params.q) * std::sin(r * (kPi - theta)) / std::sin(r * theta);
      break;
    }
    case Regime::Four:
      y = params.beta * 2.0 * (kPi - theta) / theta;
      break;
    case Regime::AboveFour: {
      double r = spectral_r(params.q);
      y = params.beta * std::sqrt(params.q) * std::sinh(r * (kPi - theta)) / std::sinh(r * theta);
      break;
    }
  }
  return EdgeWeight{theta, y, y / (1.0 + y)};
}

// Weight of the dual edge: complementary angle, inverted beta.
inline EdgeWeight dual_edge_weight(double theta, const ModelParams& params) {
  params.validate();
  if (!(theta > 0.0 && theta < kPi))
    throw std::invalid_argument("dual_edge_weight: theta must lie in (0, pi)");
  return edge_weight(kPi - theta, ModelParams{params.q, 1.0 / params.beta});
}

struct TripleWeights {
  double a = 0.0, b = 0.0, c = 0.0;

  void validate() const {
    if (!(a > 0.0 && b > 0.0 && c > 0.0))
      throw std::invalid_argument("TripleWeights: weights must be strictly positive");
  }
};

// y_a y_b y_c + y_a y_b + y_b y_c + y_c y_a - q; zero on critical triangles.
inline double triangle_residual(const TripleWeights& w, double q) {
  w.validate();
  return w.a * w.b * w.c + w.a * w.b + w.b * w.c + w.c * w.a - q;
}

// y'_a y'_b y'_c - q (y'_a + y'_b + y'_c) - q^2; zero on critical stars.
inline double star_residual(const TripleWeights& w, double q) {
  w.validate();
  return w.a * w.b * w.c - q * (w.a + w.b + w.c) - q * q;
}

inline TripleWeights star_from_triangle(const TripleWeights& w, double q) {
  w.validate();
  return TripleWeights{q / w.a, q / w.b, q / w.c};
}

inline void check_drift_angles(double A, double B) {
  if (!(A > 0.0 && A < kPi && B - A > 0.0 && B - A < kPi))
    throw std::invalid_argument("drift_eta: need A and B-A in (0, pi)");
}

// Upward-drift probability y_{pi-A} y_{pi-(B-A)} / q.  This product form
// is the definition for every q >= 1; the equivalent trigonometric forms
// below hold for q < 4 only.
inline double drift_eta(double A, double B, double q) {
  check_drift_angles(A, B);
  ModelParams params{q, 1.0};
  return edge_weight(kPi - A, params).y * edge_weight(kPi - (B - A), params).y / q;
}

// The two trigonometric forms are evaluated in extended precision: the
// cosine form cancels catastrophically as q approaches 4 (r -> 0).
inline double drift_eta_sine_form(double A, double B, double q) {
  check_drift_angles(A, B);
  if (regime_of(q) != Regime::BelowFour)
    throw std::invalid_argument("drift_eta_sine_form: only stated for q < 4");
  long double r = std::acos(0.5L * std::sqrt(static_cast<long double>(q))) /
                  3.141592653589793238462643383279502884L;
  long double pi = 3.141592653589793238462643383279502884L;
  return static_cast<double>(std::sin(r * A) * std::sin(r * (B - A)) /
                             (std::sin(r * (pi - A)) * std::sin(r * (pi - (B - A)))));
}

inline double drift_eta_cosine_form(double A, double B, double q) {
  check_drift_angles(A, B);
  if (regime_of(q) != Regime::BelowFour)
    throw std::invalid_argument("drift_eta_cosine_form: only stated for q < 4");
  long double r = std::acos(0.5L * std::sqrt(static_cast<long double>(q))) /
                  3.141592653589793238462643383279502884L;
  long double pi = 3.141592653589793238462643383279502884L;
  return static_cast<double>(
      (std::cos(r * (2.0L * A - B)) - std::cos(r * static_cast<long double>(B))) /
      (std::cos(r * (2.0L * A - B)) - std::cos(r * (2.0L * pi - B))));
}

// Vertical-survival bound (1/2) min{ y_{pi-eps} p_{pi-eps} (1-p_eps) / q, 1 }.
inline double drift_delta(double eps, double q) {
  if (!(eps > 0.0 && eps <= kPi / 2.0))
    throw std::invalid_argument("drift_delta: eps must lie in (0, pi/2]");
  ModelParams params{q, 1.0};
  EdgeWeight wide = edge_weight(kPi - eps, params);
  EdgeWeight narrow = edge_weight(eps, params);
  double v = wide.y * wide.p * (1.0 - narrow.p) / q;
  return 0.5 * std::min(v, 1.0);
}

struct QuantumRates {
  double lambda0 = 0.0;  // cut rate per unit length
  double mu0 = 0.0;      // bridge rate per unit length
  double zeta = 0.0;     // drift slope 2 sqrt(2 + sqrt q) / pi^2
};

inline QuantumRates quantum_rates(double q) {
  QuantumRates rates;
  switch (regime_of(q)) {
    case Regime::BelowFour: {
      double r = spectral_r(q);
      rates.lambda0 = 2.0 * r / std::sqrt(q * (4.0 - q));
      rates.mu0 = 2.0 * r * std::sqrt(q) / std::sqrt(4.0 - q);
      break;
    }
    case Regime::Four:
      rates.lambda0 = 1.0 / (2.0 * kPi);
      rates.mu0 = 2.0 / kPi;
      break;
    case Regime::AboveFour: {
      double r = spectral_r(q);
      rates.lambda0 = 2.0 * r / std::sqrt(q * (q - 4.0));
      rates.mu0 = 2.0 * r * std::sqrt(q) / std::sqrt(q - 4.0);
      break;
    }
  }
  rates.zeta = 2.0 * std::sqrt(2.0 + std::sqrt(q)) / (kPi * kPi);
  return rates;
}

struct DriftConstants {
  double eta = 0.0;    // sup of drift_eta over the bounded-angle square
  double delta = 0.0;  // drift_delta at the bounded-angle parameter
  double zeta = 0.0;
  double r = 0.0;      // NaN at q = 4
};

// Constants for a graph with bounded-angles parameter eps.  The supremum
// of eta over [eps, pi-eps]^2 is evaluated on a refined grid around the
// analytic maximiser A = (B - eps-boundary)/2.
inline DriftConstants drift_constants_for(double eps, double q) {
  if (!(eps > 0.0 && eps < kPi / 2.0))
    throw std::invalid_argument("drift_constants_for: eps must lie in (0, pi/2)");
  double best = 0.0;
  const int grid = 256;
  for (int i = 0; i <= grid; ++i) {
    double A = eps + (kPi - 2.0 * eps) * i / grid;
    double B = kPi - eps;
    if (B - A <= 0.0) continue;
    best = std::max(best, drift_eta(A, B, q));
  }
  best = std::max(best, drift_eta((kPi - eps) / 2.0, kPi - eps, q));
  DriftConstants out;
  out.eta = best;
  out.delta = drift_delta(std::min(eps, kPi / 2.0), q);
  out.zeta = quantum_rates(q).zeta;
  out.r = spectral_r(q);
  return out;
}

}  // namespace isorc

#endif

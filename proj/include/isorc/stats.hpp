#ifndef ISORC_STATS_HPP
#define ISORC_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace isorc {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval; z defaults to the two-sided 95% quantile.
inline Interval wilson_interval(std::int64_t successes, std::int64_t n,
                                double z = 1.959963984540054) {
  if (n <= 0) throw std::invalid_argument("wilson_interval: n must be positive");
  double phat = static_cast<double>(successes) / static_cast<double>(n);
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double centre = phat + z2 / (2.0 * n);
  double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  Interval iv{(centre - half) / denom, (centre + half) / denom};
  iv.lo = std::max(0.0, iv.lo);
  iv.hi = std::min(1.0, iv.hi);
  return iv;
}

namespace detail {

inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a, term = sum, ap = a;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Regularized upper incomplete gamma Q(a,x).
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_contfrac(a, x);
}

// Upper-tail p-value of a chi-square statistic.
inline double chi_square_pvalue(double chi2, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi_square_pvalue: dof must be positive");
  return gamma_q(0.5 * dof, 0.5 * chi2);
}

// Pearson statistic of observed counts against expected probabilities.
inline double chi_square_stat(const std::vector<std::int64_t>& observed,
                              const std::vector<double>& expected_prob,
                              std::int64_t n) {
  if (observed.size() != expected_prob.size())
    throw std::invalid_argument("chi_square_stat: size mismatch");
  double chi2 = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    double e = expected_prob[i] * static_cast<double>(n);
    if (e <= 0.0) {
      if (observed[i] != 0) return 1e308;
      continue;
    }
    double d = static_cast<double>(observed[i]) - e;
    chi2 += d * d / e;
  }
  return chi2;
}

inline double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
  std::size_t n = std::max(p.size(), q.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double a = i < p.size() ? p[i] : 0.0;
    double b = i < q.size() ? q[i] : 0.0;
    tv += std::fabs(a - b);
  }
  return 0.5 * tv;
}

inline std::vector<double> normalized_histogram(const std::vector<std::int64_t>& counts) {
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  std::vector<double> out(counts.size(), 0.0);
  if (total > 0.0)
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] / total;
  return out;
}

inline std::vector<double> poisson_pmf(double mean, std::size_t kmax) {
  std::vector<double> pmf(kmax + 1);
  double logmean = std::log(mean);
  for (std::size_t k = 0; k <= kmax; ++k)
    pmf[k] = std::exp(-mean + k * logmean - std::lgamma(static_cast<double>(k) + 1.0));
  return pmf;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares: need at least two points");
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("least_squares: degenerate abscissae");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ssres = 0.0, sstot = 0.0, ybar = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double yhat = fit.intercept + fit.slope * x[i];
    ssres += (y[i] - yhat) * (y[i] - yhat);
    sstot += (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r2 = sstot > 0.0 ? 1.0 - ssres / sstot : 1.0;
  return fit;
}

// Integrated autocorrelation time with the initial-positive-sequence cutoff.
inline double integrated_autocorrelation(const std::vector<double>& series) {
  std::size_t n = series.size();
  if (n < 4) return 1.0;
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);
  var /= static_cast<double>(n);
  if (var <= 0.0) return 1.0;
  double tau = 1.0;
  for (std::size_t lag = 1; lag < n / 2; ++lag) {
    double acf = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i)
      acf += (series[i] - mean) * (series[i + lag] - mean);
    acf /= var * static_cast<double>(n - lag);
    if (acf <= 0.0) break;
    tau += 2.0 * acf;
  }
  return tau;
}

}  // namespace isorc

#endif

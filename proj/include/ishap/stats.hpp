#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>

namespace ishap {

// Lanczos approximation, g = 7, accurate to ~1e-15 for x > 0.
inline double log_gamma(double x) {
  static const double coef[9] = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
    return std::log(3.14159265358979323846 / std::sin(3.14159265358979323846 * x)) -
           log_gamma(1.0 - x);
  }
  x -= 1.0;
  double a = coef[0];
  double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += coef[i] / (x + static_cast<double>(i));
  return 0.91893853320467274178 + (x + 0.5) * std::log(t) - t + std::log(a);
}

namespace detail {

// Continued fraction for the incomplete beta, modified Lentz method.
// Converges quickly for x < (a + 1) / (a + b + 2).
inline double beta_cf(double a, double b, double x) {
  const double tiny = 1e-30;
  const double eps = 1e-15;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 400; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b), absolute accuracy better than 1e-10
// over a, b in (0, ~1e3]. Symmetry flip keeps the continued fraction in its
// fast-converging region.
inline double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta: a, b must be positive");
  if (std::isnan(x)) throw std::invalid_argument("beta: x is NaN");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double front =
      std::exp(log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Two-sided p-value for t with nu degrees of freedom:
// P(|T| >= |t|) = I_{nu/(nu+t^2)}(nu/2, 1/2).
inline double student_t_two_sided_p(double t, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("t test: nu must be positive");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * nu, 0.5, nu / (nu + t * t));
}

// Per-group summary. variance is the unbiased sample variance (0 when count < 2).
struct GroupStats {
  double mean = 0.0;
  double variance = 0.0;
  std::int64_t count = 0;
};

// Two-pass mean/variance over a contiguous block.
inline GroupStats summarize(std::span<const double> values) {
  GroupStats g;
  g.count = static_cast<std::int64_t>(values.size());
  if (g.count == 0) return g;
  double sum = 0.0;
  for (double v : values) sum += v;
  g.mean = sum / static_cast<double>(g.count);
  if (g.count < 2) return g;
  double ss = 0.0;
  for (double v : values) {
    double d = v - g.mean;
    ss += d * d;
  }
  g.variance = ss / static_cast<double>(g.count - 1);
  return g;
}

// Welch test of the linear contrast sum_g coef_g * mean_g against zero.
// Standard error sqrt(sum coef^2 var/n), Welch-Satterthwaite degrees of
// freedom, two-sided p. Degenerate inputs resolve conservatively:
//   any group with count < 2        -> p = 1 (no variance information)
//   se == 0 and contrast == 0       -> p = 1
//   se == 0 and contrast != 0       -> p = 0 (exactly reproducible difference)
inline double welch_contrast_p(std::span<const GroupStats> groups, std::span<const double> coefs) {
  if (groups.size() != coefs.size() || groups.empty())
    throw std::invalid_argument("welch: group/coefficient mismatch");
  double contrast = 0.0;
  double se2 = 0.0;
  double df_den = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].count < 2) return 1.0;
    double n = static_cast<double>(groups[g].count);
    contrast += coefs[g] * groups[g].mean;
    double term = coefs[g] * coefs[g] * groups[g].variance / n;
    se2 += term;
    df_den += term * term / (n - 1.0);
  }
  if (se2 <= 0.0) return contrast == 0.0 ? 1.0 : 0.0;
  double nu = se2 * se2 / df_den;
  double t = contrast / std::sqrt(se2);
  return student_t_two_sided_p(t, nu);
}

// Pearson correlation; 0 when either side is constant or fewer than 2 points.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
  std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ishap

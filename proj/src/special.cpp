#include "mife/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace mife::special {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

constexpr std::size_t kGaussPoints = 20;

struct GaussLegendre {
  std::array<double, kGaussPoints> nodes{};
  std::array<double, kGaussPoints> weights{};
};

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
GaussLegendre make_gauss_legendre() {
  GaussLegendre g;
  const int n = static_cast<int>(kGaussPoints);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    g.nodes[static_cast<std::size_t>(i)] = z;
    g.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return g;
}

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre g = make_gauss_legendre();
  return g;
}

// Composite Gauss-Legendre over [lo, hi] split into `panels` equal pieces.
template <class F>
double integrate(F&& f, double lo, double hi, int panels) {
  const GaussLegendre& g = gauss_legendre();
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double center = lo + (p + 0.5) * width;
    double s = 0.0;
    for (std::size_t i = 0; i < kGaussPoints; ++i) s += g.weights[i] * f(center + 0.5 * width * g.nodes[i]);
    total += 0.5 * width * s;
  }
  return total;
}

// P(range of k standard normals < w).
double normal_range_cdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto integrand = [&](double z) {
    // Phi(z) - Phi(z - w), via whichever tails avoid cancellation.
    const double band = z > 0.0 ? normal_sf(z - w) - normal_sf(z) : normal_cdf(z) - normal_cdf(z - w);
    if (band <= 0.0) return 0.0;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z) * std::pow(band, k - 1);
  };
  const double p = k * integrate(integrand, -8.5, 8.5, 34);
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double f_sf(double f, double df1, double df2) {
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

double kolmogorov_sf(double lambda) {
  if (lambda < 0.042) return 1.0;
  if (lambda < 1.18) {
    const double y = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda));
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda *
                       (y + std::pow(y, 9) + std::pow(y, 25) + std::pow(y, 49));
    return 1.0 - cdf;
  }
  const double x = std::exp(-2.0 * lambda * lambda);
  return 2.0 * (x - std::pow(x, 4) + std::pow(x, 9));
}

double studentized_range_cdf(double q, int k, double df) {
  if (!(q > 0.0)) return 0.0;
  if (std::isinf(q)) return 1.0;
  if (std::isinf(df) || df > 1e5) return normal_range_cdf(q, k);

  // s = sqrt(chi2_df / df) has log-density c + (df-1) ln s - df s^2 / 2.
  const double log_c = (df / 2.0) * std::log(df) - std::lgamma(df / 2.0) - (df / 2.0 - 1.0) * std::log(2.0);
  auto log_density = [&](double s) { return log_c + (df - 1.0) * std::log(s) - df * s * s / 2.0; };
  const double mode = df > 1.0 ? std::sqrt((df - 1.0) / df) : 0.0;
  const double peak = df > 1.0 ? log_density(mode) : log_c;
  const double step = 0.02 + 0.5 / std::sqrt(df);
  double hi = std::max(mode, 1.0);
  while (log_density(hi) - peak > -50.0) hi += step;
  double lo = mode;
  while (lo > 0.0 && log_density(lo) - peak > -50.0) lo = std::max(0.0, lo - step);

  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(log_density(s)) * normal_range_cdf(q * s, k);
  };
  const double p = integrate(integrand, lo, hi, 40);
  return std::min(1.0, std::max(0.0, p));
}

double studentized_range_sf(double q, int k, double df) { return 1.0 - studentized_range_cdf(q, k, df); }

}  // namespace mife::special

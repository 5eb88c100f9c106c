#include "mife/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <charconv>
#include <cmath>
#include <numbers>

#include "mife/dsp.hpp"
#include "mife/error.hpp"
#include "mife/numeric.hpp"

namespace mife::entropy {

void FuzzyParams::validate() const {
  if (m < 1) throw Error(ErrorKind::invalid_argument, "fuzzy entropy: m must be >= 1");
  if (!(r > 0.0)) throw Error(ErrorKind::invalid_argument, "fuzzy entropy: r must be > 0");
  if (!(n > 0.0)) throw Error(ErrorKind::invalid_argument, "fuzzy entropy: n must be > 0");
}

void SampleParams::validate() const {
  if (m < 1) throw Error(ErrorKind::invalid_argument, "m must be >= 1");
  if (!(r > 0.0)) throw Error(ErrorKind::invalid_argument, "r must be > 0");
}

void DispersionParams::validate() const {
  if (m < 1) throw Error(ErrorKind::invalid_argument, "dispersion entropy: m must be >= 1");
  if (c < 2) throw Error(ErrorKind::invalid_argument, "dispersion entropy: c must be >= 2");
  if (delay < 1) throw Error(ErrorKind::invalid_argument, "dispersion entropy: delay must be >= 1");
}

ScaleRange::ScaleRange(int first, int last) {
  if (first < 1 || last < first) throw Error(ErrorKind::invalid_argument, "scale range requires 1 <= first <= last");
  for (int t = first; t <= last; ++t) scales_.push_back(t);
}

ScaleRange::ScaleRange(std::vector<int> scales) : scales_(std::move(scales)) {
  if (scales_.empty()) throw Error(ErrorKind::invalid_argument, "scale list is empty");
  for (std::size_t i = 0; i < scales_.size(); ++i) {
    if (scales_[i] < 1 || (i > 0 && scales_[i] <= scales_[i - 1])) {
      throw Error(ErrorKind::invalid_argument, "scales must be >= 1 and strictly increasing");
    }
  }
}

namespace {

int parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw Error(ErrorKind::invalid_argument, "bad scale value '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

ScaleRange ScaleRange::parse(const std::string& text) {
  if (auto dots = text.find(".."); dots != std::string::npos) {
    return ScaleRange(parse_int(std::string_view(text).substr(0, dots)),
                      parse_int(std::string_view(text).substr(dots + 2)));
  }
  std::vector<int> out;
  std::string_view rest(text);
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(parse_int(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return ScaleRange(std::move(out));
}

std::vector<double> coarse_grain(std::span<const double> x, int tau) {
  if (tau < 1) throw Error(ErrorKind::invalid_argument, "scale factor must be >= 1");
  const auto t = static_cast<std::size_t>(tau);
  if (x.size() < t) throw Error(ErrorKind::signal_too_short, "series shorter than the scale factor");
  if (tau == 1) return {x.begin(), x.end()};
  std::vector<double> y(x.size() / t);
  for (std::size_t j = 0; j < y.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = j * t; i < (j + 1) * t; ++i) s += x[i];
    y[j] = s / static_cast<double>(tau);
  }
  return y;
}

std::vector<double> refined_scale(std::span<const double> x, int tau) {
  if (tau < 1) throw Error(ErrorKind::invalid_argument, "scale factor must be >= 1");
  const auto t = static_cast<std::size_t>(tau);
  if (x.size() < 8 * t) throw Error(ErrorKind::signal_too_short, "refined scaling needs >= 8 * tau samples");
  if (tau == 1) return {x.begin(), x.end()};
  const auto sections = dsp::butterworth_lowpass(6, 0.5 / tau);
  const std::vector<double> smooth = dsp::filtfilt_sos(x, sections, 21 * t);
  std::vector<double> y(x.size() / t);
  for (std::size_t j = 0; j < y.size(); ++j) y[j] = smooth[j * t];
  return y;
}

namespace {

void require_length(std::span<const double> x, int m) {
  if (x.size() < static_cast<std::size_t>(m) + 2) {
    throw Error(ErrorKind::signal_too_short, "entropy needs at least m + 2 samples");
  }
}

double resolve_tolerance(std::span<const double> x, double r) {
  const double sd = population_sd(x);
  if (!(sd > 0.0)) throw Error(ErrorKind::degenerate_signal, "entropy of a constant series");
  return r * sd;
}

// Component-major template storage: comp[k * count + i] is element k of
// template i, so the inner pair loop streams contiguous memory.
struct Templates {
  std::size_t count = 0;
  std::size_t dim = 0;
  std::vector<double> comp;

  double at(std::size_t k, std::size_t i) const { return comp[k * count + i]; }
};

Templates make_templates(std::span<const double> x, std::size_t dim, std::size_t count, bool remove_mean) {
  Templates t{count, dim, std::vector<double>(dim * count)};
  for (std::size_t i = 0; i < count; ++i) {
    double mu = 0.0;
    if (remove_mean) {
      for (std::size_t k = 0; k < dim; ++k) mu += x[i + k];
      mu /= static_cast<double>(dim);
    }
    for (std::size_t k = 0; k < dim; ++k) t.comp[k * count + i] = x[i + k] - mu;
  }
  return t;
}

// Chebyshev distances from template i to templates i+1..count-1, written to
// dist[0 .. count-i-1).
[[gnu::always_inline]] inline void chebyshev_row(const Templates& t, std::size_t i, std::vector<double>& dist) {
  const std::size_t n = t.count;
  const std::size_t len = n - i - 1;
  double* d = dist.data();
  {
    const double* c = t.comp.data();
    const double ci = c[i];
    for (std::size_t j = 0; j < len; ++j) d[j] = std::abs(c[i + 1 + j] - ci);
  }
  for (std::size_t k = 1; k < t.dim; ++k) {
    const double* c = t.comp.data() + k * n;
    const double ci = c[i];
    for (std::size_t j = 0; j < len; ++j) d[j] = std::max(d[j], std::abs(c[i + 1 + j] - ci));
  }
}

// exp(x) for x <= 0 in straight-line code so the caller's loop vectorizes.
// Cody-Waite reduction to |r| <= ln2/2 and a degree-13 Taylor polynomial;
// relative error is a few ulp. Arguments below -700 are clamped (the result
// is then < 1e-304 rather than exactly 0).
inline double exp_nonpositive(double x) {
  constexpr double kLog2e = 1.4426950408889634;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kShifter = 6755399441055744.0;  // 1.5 * 2^52
  x = std::max(x, -700.0);
  const double kd = x * kLog2e + kShifter;
  const double k = kd - kShifter;
  const double r = (x - k * kLn2Hi) - k * kLn2Lo;
  double p = 1.0 / 6227020800.0;
  p = p * r + 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const auto bits = std::bit_cast<std::int64_t>(kd) - std::bit_cast<std::int64_t>(kShifter);
  return p * std::bit_cast<double>((bits + 1023) << 52);
}

constexpr std::size_t kLanes = 8;

// Sum with a fixed lane structure so the result does not depend on how the
// compiler vectorizes the loop.
inline double lane_sum(const double* v, std::size_t len) {
  double acc[kLanes] = {};
  std::size_t j = 0;
  for (; j + kLanes <= len; j += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += v[j + l];
  }
  double tail = 0.0;
  for (; j < len; ++j) tail += v[j];
  double s = 0.0;
  for (double a : acc) s += a;
  return s + tail;
}

// Row sum of exp(-d_ij^2 / r) for j > i with the distance, membership and
// lane accumulation fused in one pass. Same lane structure as lane_sum.
template <std::size_t Dim>
[[gnu::always_inline]] inline double squared_membership_row(const Templates& t, std::size_t i, double neg_inv_r) {
  const std::size_t count = t.count;
  const std::size_t len = count - i - 1;
  const double* base = t.comp.data() + i + 1;
  double ci[Dim];
  for (std::size_t k = 0; k < Dim; ++k) ci[k] = t.comp[k * count + i];
  auto term = [&](std::size_t j) {
    double d = std::abs(base[j] - ci[0]);
    for (std::size_t k = 1; k < Dim; ++k) d = std::max(d, std::abs(base[k * count + j] - ci[k]));
    return exp_nonpositive(d * d * neg_inv_r);
  };
  double acc[kLanes] = {};
  std::size_t j = 0;
  for (; j + kLanes <= len; j += kLanes) {
    for (std::size_t l = 0; l < kLanes; ++l) acc[l] += term(j + l);
  }
  double tail = 0.0;
  for (; j < len; ++j) tail += term(j);
  double s = 0.0;
  for (double a : acc) s += a;
  return s + tail;
}

// Mean over ordered pairs i != j of exp(-d_ij^n / r).
__attribute__((target_clones("avx512f", "avx2", "default")))
double fuzzy_similarity(const Templates& t, double r_abs, double n) {
  const std::size_t count = t.count;
  const double neg_inv_r = -1.0 / r_abs;
  double total = 0.0;
  if (n == 2.0 && (t.dim == 2 || t.dim == 3)) {
    for (std::size_t i = 0; i + 1 < count; ++i) {
      total += t.dim == 2 ? squared_membership_row<2>(t, i, neg_inv_r) : squared_membership_row<3>(t, i, neg_inv_r);
    }
  } else {
    std::vector<double> dist(count);
    for (std::size_t i = 0; i + 1 < count; ++i) {
      chebyshev_row(t, i, dist);
      const std::size_t len = count - i - 1;
      double* d = dist.data();
      if (n == 2.0) {
        for (std::size_t j = 0; j < len; ++j) d[j] = exp_nonpositive(d[j] * d[j] * neg_inv_r);
      } else {
        for (std::size_t j = 0; j < len; ++j) d[j] = exp_nonpositive(std::pow(d[j], n) * neg_inv_r);
      }
      total += lane_sum(d, len);
    }
  }
  const auto c = static_cast<double>(count);
  return 2.0 * total / (c * (c - 1.0));
}

// Unordered pairs i < j within tolerance.
double match_pairs(const Templates& t, double r_abs) {
  const std::size_t count = t.count;
  std::vector<double> dist(count);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < count; ++i) {
    chebyshev_row(t, i, dist);
    const std::size_t len = count - i - 1;
    std::size_t hits = 0;
    for (std::size_t j = 0; j < len; ++j) hits += dist[j] <= r_abs ? 1 : 0;
    total += static_cast<double>(hits);
  }
  return total;
}

// Phi: mean over templates of ln(fraction of templates within r,
// including itself).
double log_match_phi(const Templates& t, double r_abs) {
  const std::size_t count = t.count;
  std::vector<double> dist(count);
  std::vector<std::size_t> hits(count, 1);
  for (std::size_t i = 0; i + 1 < count; ++i) {
    chebyshev_row(t, i, dist);
    const std::size_t len = count - i - 1;
    for (std::size_t j = 0; j < len; ++j) {
      if (dist[j] <= r_abs) {
        ++hits[i];
        ++hits[i + 1 + j];
      }
    }
  }
  const auto c = static_cast<double>(count);
  double phi = 0.0;
  for (std::size_t h : hits) phi += std::log(static_cast<double>(h) / c);
  return phi / c;
}

}  // namespace

double fuzzy_entropy_abs(std::span<const double> x, int m, double r_abs, double n) {
  if (m < 1 || !(r_abs > 0.0) || !(n > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "fuzzy entropy needs m >= 1, r > 0, n > 0");
  }
  require_length(x, m);
  const auto mm = static_cast<std::size_t>(m);
  const std::size_t count = x.size() - mm;
  const double phi_m = fuzzy_similarity(make_templates(x, mm, count, true), r_abs, n);
  const double phi_m1 = fuzzy_similarity(make_templates(x, mm + 1, count, true), r_abs, n);
  return std::log(phi_m) - std::log(phi_m1);
}

double fuzzy_entropy(std::span<const double> x, const FuzzyParams& p) {
  p.validate();
  require_length(x, p.m);
  return fuzzy_entropy_abs(x, p.m, resolve_tolerance(x, p.r), p.n);
}

std::optional<double> sample_entropy_abs(std::span<const double> x, int m, double r_abs) {
  if (m < 1 || !(r_abs > 0.0)) throw Error(ErrorKind::invalid_argument, "sample entropy needs m >= 1, r > 0");
  require_length(x, m);
  const auto mm = static_cast<std::size_t>(m);
  const std::size_t count = x.size() - mm;
  const double b = match_pairs(make_templates(x, mm, count, false), r_abs);
  const double a = match_pairs(make_templates(x, mm + 1, count, false), r_abs);
  if (a == 0.0 || b == 0.0) return std::nullopt;
  return -std::log(a / b);
}

std::optional<double> sample_entropy(std::span<const double> x, const SampleParams& p) {
  p.validate();
  require_length(x, p.m);
  return sample_entropy_abs(x, p.m, resolve_tolerance(x, p.r));
}

double approximate_entropy_abs(std::span<const double> x, int m, double r_abs) {
  if (m < 1 || !(r_abs > 0.0)) throw Error(ErrorKind::invalid_argument, "approximate entropy needs m >= 1, r > 0");
  require_length(x, m);
  const auto mm = static_cast<std::size_t>(m);
  const double phi_m = log_match_phi(make_templates(x, mm, x.size() - mm + 1, false), r_abs);
  const double phi_m1 = log_match_phi(make_templates(x, mm + 1, x.size() - mm, false), r_abs);
  return phi_m - phi_m1;
}

double approximate_entropy(std::span<const double> x, const SampleParams& p) {
  p.validate();
  require_length(x, p.m);
  return approximate_entropy_abs(x, p.m, resolve_tolerance(x, p.r));
}

double dispersion_entropy(std::span<const double> x, const DispersionParams& p) {
  p.validate();
  const auto m = static_cast<std::size_t>(p.m);
  const auto delay = static_cast<std::size_t>(p.delay);
  if (x.size() < (m - 1) * delay + 2) throw Error(ErrorKind::signal_too_short, "series too short for dispersion patterns");
  const std::size_t patterns = x.size() - (m - 1) * delay;
  const double space = std::pow(static_cast<double>(p.c), static_cast<double>(p.m));
  if (space > static_cast<double>(patterns)) {
    throw Error(ErrorKind::invalid_argument, "c^m exceeds the number of dispersion patterns in the series");
  }
  const double mu = mean(x);
  const double sd = population_sd(x);
  if (!(sd > 0.0)) throw Error(ErrorKind::degenerate_signal, "dispersion entropy of a constant series");

  std::vector<int> cls(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = 0.5 * std::erfc(-((x[i] - mu) / sd) / std::numbers::sqrt2);
    const double z = std::round(p.c * y + 0.5);
    cls[i] = static_cast<int>(std::clamp(z, 1.0, static_cast<double>(p.c)));
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(space), 0);
  for (std::size_t i = 0; i < patterns; ++i) {
    std::size_t code = 0;
    for (std::size_t k = 0; k < m; ++k) code = code * static_cast<std::size_t>(p.c) + static_cast<std::size_t>(cls[i + k * delay] - 1);
    ++counts[code];
  }
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / static_cast<double>(patterns);
    h -= q * std::log(q);
  }
  return h / std::log(space);
}

std::string to_string(Kernel k) {
  switch (k) {
    case Kernel::fuzzy: return "fuzzy";
    case Kernel::sample: return "sample";
    case Kernel::approximate: return "approximate";
    case Kernel::dispersion: return "dispersion";
  }
  return "unknown";
}

bool EntropyProfile::all_defined() const noexcept {
  return std::all_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

namespace {

std::optional<double> apply_kernel(std::span<const double> y, const KernelSpec& k, std::optional<double> fixed_sd) {
  auto tolerance = [&](double r) { return fixed_sd ? r * *fixed_sd : resolve_tolerance(y, r); };
  switch (k.kind) {
    case Kernel::fuzzy:
      require_length(y, k.fuzzy.m);
      return fuzzy_entropy_abs(y, k.fuzzy.m, tolerance(k.fuzzy.r), k.fuzzy.n);
    case Kernel::sample:
      require_length(y, k.sample.m);
      return sample_entropy_abs(y, k.sample.m, tolerance(k.sample.r));
    case Kernel::approximate:
      require_length(y, k.sample.m);
      return approximate_entropy_abs(y, k.sample.m, tolerance(k.sample.r));
    case Kernel::dispersion:
      return dispersion_entropy(y, k.dispersion);
  }
  return std::nullopt;
}

}  // namespace

EntropyProfile multiscale_profile(std::span<const double> x, const ScaleRange& scales, const KernelSpec& kernel,
                                  Scaling scaling, std::string method) {
  kernel.fuzzy.validate();
  kernel.sample.validate();
  kernel.dispersion.validate();
  std::optional<double> fixed_sd;
  if (kernel.tolerance == ToleranceMode::fixed) {
    fixed_sd = population_sd(x);
    if (!(*fixed_sd > 0.0)) throw Error(ErrorKind::degenerate_signal, "entropy of a constant series");
  }
  EntropyProfile out{method.empty() ? to_string(kernel.kind) : std::move(method), scales, {}};
  out.values.reserve(scales.size());
  for (int tau : scales.values()) {
    try {
      const std::vector<double> y = scaling == Scaling::coarse ? coarse_grain(x, tau) : refined_scale(x, tau);
      out.values.push_back(apply_kernel(y, kernel, fixed_sd));
    } catch (const Error&) {
      out.values.push_back(std::nullopt);
    }
  }
  return out;
}

}  // namespace mife::entropy

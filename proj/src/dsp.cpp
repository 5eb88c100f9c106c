#include "mife/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mife/error.hpp"

namespace mife::dsp {

namespace {

std::size_t hamming_taps(double transition) {
  auto m = static_cast<std::size_t>(std::ceil(3.3 / transition));
  if (m % 2 == 0) ++m;
  return std::max<std::size_t>(m, 3);
}

// x extended by `pad` odd-reflected samples at each end.
std::vector<double> odd_extend(std::span<const double> x, std::size_t pad) {
  const std::size_t n = x.size();
  std::vector<double> out(n + 2 * pad);
  for (std::size_t k = 0; k < pad; ++k) {
    out[pad - 1 - k] = 2.0 * x[0] - x[k + 1];
    out[pad + n + k] = 2.0 * x[n - 1] - x[n - 2 - k];
  }
  std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(pad));
  return out;
}

// Centered ("same") convolution with an odd-length symmetric kernel; the
// first and last `half` outputs are left untouched.
void centered_convolve(const std::vector<double>& in, std::span<const double> h,
                       std::vector<double>& out) {
  const std::size_t half = h.size() / 2;
  const std::size_t n = in.size();
  out.assign(n, 0.0);
  for (std::size_t i = half; i + half < n; ++i) {
    const double* src = in.data() + (i - half);
    // Fixed 8-lane accumulation keeps the sum order independent of the
    // vector width the compiler picks.
    double lanes[8] = {};
    std::size_t k = 0;
    for (; k + 8 <= h.size(); k += 8) {
      for (std::size_t l = 0; l < 8; ++l) lanes[l] += h[k + l] * src[k + l];
    }
    double acc = 0.0;
    for (; k < h.size(); ++k) acc += h[k] * src[k];
    for (double v : lanes) acc += v;
    out[i] = acc;
  }
}

}  // namespace

std::vector<double> fir_lowpass(double cutoff, double transition) {
  if (!(cutoff > 0.0 && cutoff < 0.5) || !(transition > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "lowpass cutoff must lie in (0, 0.5) cycles/sample");
  }
  const std::size_t m = hamming_taps(transition);
  const double center = static_cast<double>(m - 1) / 2.0;
  const double pi = std::numbers::pi;
  std::vector<double> h(m);
  double sum = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double t = static_cast<double>(k) - center;
    const double sinc = t == 0.0 ? 2.0 * cutoff : std::sin(2.0 * pi * cutoff * t) / (pi * t);
    const double w = 0.54 - 0.46 * std::cos(2.0 * pi * static_cast<double>(k) / static_cast<double>(m - 1));
    h[k] = sinc * w;
    sum += h[k];
  }
  for (double& v : h) v /= sum;
  return h;
}

std::vector<double> fir_highpass(double cutoff, double transition) {
  std::vector<double> h = fir_lowpass(cutoff, transition);
  for (double& v : h) v = -v;
  h[h.size() / 2] += 1.0;
  return h;
}

std::vector<double> filtfilt_fir(std::span<const double> x, std::span<const double> taps) {
  if (x.size() <= taps.size()) {
    throw Error(ErrorKind::signal_too_short, "signal of " + std::to_string(x.size()) +
                                                 " samples is not longer than a " +
                                                 std::to_string(taps.size()) + "-tap filter");
  }
  const std::size_t pad = taps.size() - 1;
  std::vector<double> ext = odd_extend(x, pad);
  std::vector<double> once;
  centered_convolve(ext, taps, once);
  // The first pass leaves `half` zeros at each end; the second pass only
  // reads samples that the first pass produced because pad = 2 * half.
  std::vector<double> twice;
  centered_convolve(once, taps, twice);
  return {twice.begin() + static_cast<std::ptrdiff_t>(pad),
          twice.begin() + static_cast<std::ptrdiff_t>(pad + x.size())};
}

std::vector<Biquad> butterworth_lowpass(int order, double wn) {
  if (order < 2 || order % 2 != 0) {
    throw Error(ErrorKind::invalid_argument, "Butterworth order must be even and >= 2");
  }
  if (!(wn > 0.0 && wn < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "Butterworth cutoff must lie in (0, 1) of Nyquist");
  }
  const double pi = std::numbers::pi;
  const double k = std::tan(pi * wn / 2.0);
  const double k2 = k * k;
  std::vector<Biquad> sections;
  for (int s = 0; s < order / 2; ++s) {
    // Pole pair angle measured from the negative real axis.
    const double phi = pi * (2.0 * s + 1.0) / (2.0 * order);
    const double q = 1.0 / (2.0 * std::cos(phi));
    const double norm = 1.0 / (1.0 + k / q + k2);
    Biquad b{};
    b.b0 = k2 * norm;
    b.b1 = 2.0 * b.b0;
    b.b2 = b.b0;
    b.a1 = 2.0 * (k2 - 1.0) * norm;
    b.a2 = (1.0 - k / q + k2) * norm;
    sections.push_back(b);
  }
  return sections;
}

namespace {

void run_cascade(std::vector<double>& y, std::span<const Biquad> sections) {
  for (const Biquad& s : sections) {
    // Steady state for a constant input equal to the first sample.
    const double u = y.front();
    const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double y0 = gain * u;
    double z2 = s.b2 * u - s.a2 * y0;
    double z1 = y0 - s.b0 * u;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

}  // namespace

std::vector<double> filtfilt_sos(std::span<const double> x, std::span<const Biquad> sections,
                                 std::size_t padlen) {
  if (x.size() < 2) {
    throw Error(ErrorKind::signal_too_short, "forward-backward filtering needs >= 2 samples");
  }
  padlen = std::min(padlen, x.size() - 1);
  std::vector<double> y = odd_extend(x, padlen);
  run_cascade(y, sections);
  std::reverse(y.begin(), y.end());
  run_cascade(y, sections);
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<std::ptrdiff_t>(padlen),
          y.begin() + static_cast<std::ptrdiff_t>(padlen + x.size())};
}

}  // namespace mife::dsp

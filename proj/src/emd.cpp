#include "mife/emd.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#include "mife/error.hpp"

namespace mife::emd {

void EmdConfig::validate() const {
  if (max_imfs < 1) throw Error(ErrorKind::invalid_argument, "max_imfs must be >= 1");
  if (max_sift_iters < 1) throw Error(ErrorKind::invalid_argument, "max_sift_iters must be >= 1");
  if (!(sift_sd_threshold > 0.0)) throw Error(ErrorKind::invalid_argument, "sift_sd_threshold must be > 0");
  if (band_lo < 1 || band_hi < band_lo) throw Error(ErrorKind::invalid_argument, "IMF band requires 1 <= lo <= hi");
}

Extrema find_extrema(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 3) throw Error(ErrorKind::signal_too_short, "extrema search needs >= 3 samples");
  Extrema e;
  std::size_t i = 1;
  while (i + 1 < n) {
    if (x[i] == x[i - 1]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && x[j + 1] == x[i]) ++j;
    if (j + 1 >= n) break;
    const bool rises_in = x[i] > x[i - 1];
    const bool falls_out = x[j + 1] < x[i];
    if (rises_in && falls_out) {
      e.maxima.push_back((i + j) / 2);
    } else if (!rises_in && !falls_out) {
      e.minima.push_back((i + j) / 2);
    }
    i = j + 1;
  }
  return e;
}

Extrema find_extrema(const TimeSeries& x) { return find_extrema(x.samples()); }

namespace {

constexpr std::size_t kMirrored = 2;

using Knots = std::vector<std::pair<double, double>>;

// Natural cubic spline through sorted knots, evaluated at 0..n-1. Outside the
// knot span the end polynomial pieces are extended.
void spline_eval(const Knots& knots, std::size_t n, std::vector<double>& out) {
  const std::size_t k = knots.size();
  out.resize(n);
  std::vector<double> m(k, 0.0);
  if (k > 2) {
    // Thomas algorithm for the interior second derivatives.
    std::vector<double> c(k, 0.0), d(k, 0.0);
    for (std::size_t i = 1; i + 1 < k; ++i) {
      const double h0 = knots[i].first - knots[i - 1].first;
      const double h1 = knots[i + 1].first - knots[i].first;
      const double rhs = 6.0 * ((knots[i + 1].second - knots[i].second) / h1 -
                                (knots[i].second - knots[i - 1].second) / h0);
      const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
      c[i] = h1 / diag;
      d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for (std::size_t i = k - 2; i >= 1; --i) m[i] = d[i] - c[i] * m[i + 1];
  }
  std::size_t seg = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double tt = static_cast<double>(t);
    while (seg + 2 < k && tt > knots[seg + 1].first) ++seg;
    const double t0 = knots[seg].first;
    const double t1 = knots[seg + 1].first;
    const double h = t1 - t0;
    const double a = (t1 - tt) / h;
    const double b = (tt - t0) / h;
    out[t] = a * knots[seg].second + b * knots[seg + 1].second +
             ((a * a * a - a) * m[seg] + (b * b * b - b) * m[seg + 1]) * h * h / 6.0;
  }
}

std::vector<std::size_t> head(const std::vector<std::size_t>& v, std::size_t from, std::size_t to) {
  to = std::min(to, v.size());
  if (from >= to) return {};
  return {v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to)};
}

// Last entries v[size-to .. size-from), clipped at 0.
std::vector<std::size_t> tail(const std::vector<std::size_t>& v, std::size_t from, std::size_t to) {
  const std::size_t n = v.size();
  const std::size_t hi = from >= n ? 0 : n - from;
  const std::size_t lo = to >= n ? 0 : n - to;
  if (lo >= hi) return {};
  return {v.begin() + static_cast<std::ptrdiff_t>(lo), v.begin() + static_cast<std::ptrdiff_t>(hi)};
}

double min_mirror(const std::vector<std::size_t>& idx, double sym) {
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) lo = std::min(lo, 2.0 * sym - static_cast<double>(i));
  return lo;
}

double max_mirror(const std::vector<std::size_t>& idx, double sym) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i : idx) hi = std::max(hi, 2.0 * sym - static_cast<double>(i));
  return hi;
}

struct MirroredKnots {
  Knots upper;
  Knots lower;
};

// Mirror extension of the extrema sequence about the first/last extremum or
// the signal endpoint, whichever keeps the envelopes ordered.
MirroredKnots mirrored_knots(std::span<const double> x, const Extrema& e) {
  const std::size_t n = x.size();
  const auto& mx = e.maxima;
  const auto& mn = e.minima;
  const std::size_t nb = kMirrored;

  std::vector<std::size_t> lmax, lmin, rmax, rmin;
  std::size_t lsym = 0;
  std::size_t rsym = n - 1;

  if (mx.front() < mn.front()) {
    if (x[0] > x[mn.front()]) {
      lmax = head(mx, 1, nb + 1);
      lmin = head(mn, 0, nb);
      lsym = mx.front();
    } else {
      lmax = head(mx, 0, nb);
      lmin = head(mn, 0, nb - 1);
      lmin.push_back(0);
      lsym = 0;
    }
  } else {
    if (x[0] < x[mx.front()]) {
      lmax = head(mx, 0, nb);
      lmin = head(mn, 1, nb + 1);
      lsym = mn.front();
    } else {
      lmax = head(mx, 0, nb - 1);
      lmax.push_back(0);
      lmin = head(mn, 0, nb);
      lsym = 0;
    }
  }
  if (min_mirror(lmax, static_cast<double>(lsym)) > 0.0 || min_mirror(lmin, static_cast<double>(lsym)) > 0.0) {
    if (lsym == 0) throw Error(ErrorKind::monotone_signal, "cannot extend envelopes past the left end");
    if (lsym == mx.front()) {
      lmax = head(mx, 0, nb);
    } else {
      lmin = head(mn, 0, nb);
    }
    lsym = 0;
  }

  if (mx.back() < mn.back()) {
    if (x[n - 1] < x[mx.back()]) {
      rmax = tail(mx, 0, nb);
      rmin = tail(mn, 1, nb + 1);
      rsym = mn.back();
    } else {
      rmax = tail(mx, 0, nb - 1);
      rmax.push_back(n - 1);
      rmin = tail(mn, 0, nb);
      rsym = n - 1;
    }
  } else {
    if (x[n - 1] > x[mn.back()]) {
      rmax = tail(mx, 1, nb + 1);
      rmin = tail(mn, 0, nb);
      rsym = mx.back();
    } else {
      rmax = tail(mx, 0, nb);
      rmin = tail(mn, 0, nb - 1);
      rmin.push_back(n - 1);
      rsym = n - 1;
    }
  }
  const double last = static_cast<double>(n - 1);
  if (max_mirror(rmax, static_cast<double>(rsym)) < last || max_mirror(rmin, static_cast<double>(rsym)) < last) {
    if (rsym == n - 1) throw Error(ErrorKind::monotone_signal, "cannot extend envelopes past the right end");
    if (rsym == mx.back()) {
      rmax = tail(mx, 0, nb);
    } else {
      rmin = tail(mn, 0, nb);
    }
    rsym = n - 1;
  }

  auto assemble = [&](const std::vector<std::size_t>& left, const std::vector<std::size_t>& core,
                      const std::vector<std::size_t>& right) {
    Knots k;
    for (std::size_t i : left) k.emplace_back(2.0 * static_cast<double>(lsym) - static_cast<double>(i), x[i]);
    for (std::size_t i : core) k.emplace_back(static_cast<double>(i), x[i]);
    for (std::size_t i : right) k.emplace_back(2.0 * static_cast<double>(rsym) - static_cast<double>(i), x[i]);
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
            k.end());
    return k;
  };
  return {assemble(lmax, mx, rmax), assemble(lmin, mn, rmin)};
}

void envelope_mean_into(std::span<const double> x, std::vector<double>& out, std::vector<double>& scratch) {
  if (x.size() < 3) throw Error(ErrorKind::signal_too_short, "envelope needs >= 3 samples");
  const Extrema e = find_extrema(x);
  if (e.maxima.empty() || e.minima.empty()) {
    throw Error(ErrorKind::monotone_signal, "signal has no maximum/minimum pair");
  }
  const MirroredKnots k = mirrored_knots(x, e);
  if (k.upper.size() < 2 || k.lower.size() < 2) {
    throw Error(ErrorKind::monotone_signal, "too few extrema for envelope interpolation");
  }
  spline_eval(k.upper, x.size(), out);
  spline_eval(k.lower, x.size(), scratch);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * (out[i] + scratch[i]);
}

std::size_t extrema_count(std::span<const double> x) {
  if (x.size() < 3) return 0;
  const Extrema e = find_extrema(x);
  return e.maxima.size() + e.minima.size();
}

}  // namespace

std::vector<double> envelope_mean(std::span<const double> x) {
  std::vector<double> out, scratch;
  envelope_mean_into(x, out, scratch);
  return out;
}

TimeSeries envelope_mean(const TimeSeries& x) { return x.with_samples(envelope_mean(x.samples())); }

ImfDecomposition decompose(const TimeSeries& x, const EmdConfig& cfg) {
  cfg.validate();
  if (x.size() < 16) throw Error(ErrorKind::signal_too_short, "EMD needs >= 16 samples");

  std::vector<double> residue = x.values();
  std::vector<TimeSeries> imfs;
  std::vector<int> iters;
  std::vector<double> h, m, scratch;

  while (static_cast<int>(imfs.size()) < cfg.max_imfs && extrema_count(residue) >= 3) {
    h = residue;
    int it = 0;
    bool sifted = false;
    while (it < cfg.max_sift_iters) {
      try {
        envelope_mean_into(h, m, scratch);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::monotone_signal) throw;
        break;
      }
      double diff = 0.0;
      double energy = 0.0;
      for (std::size_t i = 0; i < h.size(); ++i) {
        energy += h[i] * h[i];
        diff += m[i] * m[i];
        h[i] -= m[i];
      }
      ++it;
      sifted = true;
      if (energy == 0.0 || diff / energy < cfg.sift_sd_threshold) break;
    }
    if (!sifted) break;
    for (std::size_t i = 0; i < residue.size(); ++i) residue[i] -= h[i];
    imfs.push_back(x.with_samples(h));
    iters.push_back(it);
  }
  return {std::move(imfs), x.with_samples(std::move(residue)), std::move(iters)};
}

TimeSeries reconstruct_band(const ImfDecomposition& d, int a, int b) {
  if (a < 1 || b < a) throw Error(ErrorKind::invalid_argument, "IMF band requires 1 <= a <= b");
  const int last = std::min<int>(b, static_cast<int>(d.imfs.size()));
  if (a > last) {
    throw Error(ErrorKind::empty_band, "IMF band [" + std::to_string(a) + ", " + std::to_string(b) +
                                           "] selects nothing from " + std::to_string(d.imfs.size()) + " IMFs");
  }
  std::vector<double> out(d.residue.size(), 0.0);
  for (int k = a; k <= last; ++k) {
    const auto& imf = d.imfs[static_cast<std::size_t>(k - 1)];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += imf[i];
  }
  return d.residue.with_samples(std::move(out));
}

}  // namespace mife::emd

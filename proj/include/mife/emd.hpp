#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mife/signals.hpp"

namespace mife::emd {

struct EmdConfig {
  int max_imfs = 16;
  int max_sift_iters = 100;
  double sift_sd_threshold = 0.2;
  // 1-based, inclusive IMF band kept by reconstruct_band; IMF 1 is the
  // fastest mode.
  int band_lo = 5;
  int band_hi = 10;

  void validate() const;
};

struct ImfDecomposition {
  std::vector<TimeSeries> imfs;
  TimeSeries residue;
  std::vector<int> n_sift_iters;

  std::size_t size() const noexcept { return imfs.size(); }
};

struct Extrema {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;
};

// Strict local extrema; a flat run bounded by lower (higher) neighbours on
// both sides counts once, at its midpoint rounded down. Endpoints are never
// extrema.
Extrema find_extrema(std::span<const double> x);
Extrema find_extrema(const TimeSeries& x);

// Mean of the upper and lower natural-cubic-spline envelopes, with two
// extrema mirrored past each end of the signal.
std::vector<double> envelope_mean(std::span<const double> x);
TimeSeries envelope_mean(const TimeSeries& x);

ImfDecomposition decompose(const TimeSeries& x, const EmdConfig& cfg = {});

// Sum of IMFs a..b (1-based, inclusive). Indices past the last IMF are
// ignored; the residue is never included.
TimeSeries reconstruct_band(const ImfDecomposition& d, int a, int b);

}  // namespace mife::emd

#include "mife/signals.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

#include "mife/dsp.hpp"
#include "mife/error.hpp"
#include "mife/numeric.hpp"

namespace mife {

TimeSeries::TimeSeries(std::vector<double> samples, double fs, std::string label)
    : samples_(std::move(samples)), fs_(fs), label_(std::move(label)) {
  if (samples_.empty()) throw Error(ErrorKind::invalid_argument, "time series must be nonempty");
  if (!(fs_ > 0.0) || !std::isfinite(fs_)) {
    throw Error(ErrorKind::invalid_argument, "sampling rate must be positive");
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::invalid_argument, "time series contains non-finite samples");
  }
}

TimeSeries TimeSeries::with_samples(std::vector<double> samples) const {
  return TimeSeries(std::move(samples), fs_, label_);
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "white") return NoiseKind::white;
  if (s == "pink") return NoiseKind::pink;
  throw Error(ErrorKind::invalid_argument, "unknown noise kind '" + s + "'");
}

std::string to_string(NoiseKind kind) { return kind == NoiseKind::white ? "white" : "pink"; }

namespace {

// FFTW's planner is not reentrant; execution of a finished plan is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> white_gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(n);
  for (double& v : out) v = normal(rng);
  return out;
}

void standardize_in_place(std::vector<double>& x) {
  const double mu = mean(x);
  const double sd = population_sd(x);
  for (double& v : x) v = (v - mu) / sd;
}

std::vector<double> pink_gaussian(std::size_t n, std::uint64_t seed) {
  std::vector<double> x = white_gaussian(n, seed);
  const std::size_t bins = n / 2 + 1;
  fftw_complex* spec = fftw_alloc_complex(bins);
  fftw_plan fwd;
  fftw_plan inv;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), x.data(), spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, x.data(), FFTW_ESTIMATE);
  }
  fftw_execute(fwd);
  spec[0][0] = 0.0;
  spec[0][1] = 0.0;
  for (std::size_t k = 1; k < bins; ++k) {
    // Power ~ 1/f means amplitude ~ 1/sqrt(f).
    const double g = 1.0 / std::sqrt(static_cast<double>(k));
    spec[k][0] *= g;
    spec[k][1] *= g;
  }
  fftw_execute(inv);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
  }
  fftw_free(spec);
  standardize_in_place(x);
  return x;
}

std::vector<double> noise_samples(NoiseKind kind, std::size_t n, std::uint64_t seed) {
  if (kind == NoiseKind::white) return white_gaussian(n, seed);
  return pink_gaussian(n, seed);
}

std::size_t seconds_to_samples(double seconds, double fs) {
  return static_cast<std::size_t>(std::llround(seconds * fs));
}

constexpr std::uint64_t kSessionStream = 1000;

}  // namespace

TimeSeries generate_noise(NoiseKind kind, std::size_t n, double fs, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::invalid_argument, "noise length must be >= 2");
  return TimeSeries(noise_samples(kind, n, seed), fs);
}

void PreprocessConfig::validate() const {
  if (!(hp_cutoff > 0.0 && hp_cutoff < lp_cutoff && lp_cutoff < target_fs / 2.0)) {
    throw Error(ErrorKind::invalid_argument, "preprocessing requires 0 < hp < lp < target_fs / 2");
  }
  if (artifact_abs_threshold && !(*artifact_abs_threshold > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "artifact threshold must be positive");
  }
}

void ProtocolSpec::validate() const {
  if (n_stimuli < 1) throw Error(ErrorKind::invalid_argument, "n_stimuli must be >= 1");
  if (n_baseline_epochs < 1) throw Error(ErrorKind::invalid_argument, "n_baseline_epochs must be >= 1");
  if (!(fs > 0.0 && stim_dur_s > 0.0 && gap_dur_s > 0.0 && baseline_dur_s > 0.0)) {
    throw Error(ErrorKind::invalid_argument, "protocol rates and durations must be positive");
  }
  if (!(habituation_decay > 0.0 && habituation_decay <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "habituation_decay must lie in (0, 1]");
  }
  if (!(snr0 >= 0.0) || !std::isfinite(snr0)) throw Error(ErrorKind::invalid_argument, "snr0 must be >= 0");
  if (!(flicker_hz > 0.0 && flicker_hz < fs / 2.0)) {
    throw Error(ErrorKind::invalid_argument, "flicker frequency must lie below Nyquist");
  }
  if (stim_samples() < 2 || baseline_samples() < 2) {
    throw Error(ErrorKind::invalid_argument, "epochs must span at least 2 samples");
  }
}

std::size_t ProtocolSpec::stim_samples() const { return seconds_to_samples(stim_dur_s, fs); }
std::size_t ProtocolSpec::gap_samples() const { return seconds_to_samples(gap_dur_s, fs); }
std::size_t ProtocolSpec::baseline_samples() const { return seconds_to_samples(baseline_dur_s, fs); }

double ProtocolSpec::evoked_amplitude(int stimulus_index) const {
  return snr0 * std::pow(habituation_decay, stimulus_index - 1);
}

double EpochSet::fs() const {
  if (!stimulus_epochs.empty()) return stimulus_epochs.front().fs();
  if (!baseline_epochs.empty()) return baseline_epochs.front().fs();
  throw Error(ErrorKind::invalid_argument, "empty epoch set");
}

StimulusSession generate_stimulus_session(const ProtocolSpec& spec) {
  spec.validate();
  const std::size_t stim = spec.stim_samples();
  const std::size_t gap = spec.gap_samples();
  const auto k = static_cast<std::size_t>(spec.n_stimuli);
  const std::size_t total = k * stim + (k - 1) * gap + (spec.trailing_gap ? gap : 0);

  std::vector<double> x = noise_samples(spec.noise_kind, total, derive_seed(spec.seed, kSessionStream));
  std::vector<std::size_t> onsets;
  const double w = 2.0 * std::numbers::pi * spec.flicker_hz / spec.fs;
  for (int i = 1; i <= spec.n_stimuli; ++i) {
    const std::size_t onset = static_cast<std::size_t>(i - 1) * (stim + gap);
    onsets.push_back(onset);
    const double a = spec.evoked_amplitude(i);
    for (std::size_t t = 0; t < stim; ++t) x[onset + t] += a * std::sin(w * static_cast<double>(t));
  }
  return {TimeSeries(std::move(x), spec.fs), std::move(onsets)};
}

std::vector<TimeSeries> generate_baseline_epochs(const ProtocolSpec& spec) {
  spec.validate();
  std::vector<TimeSeries> out;
  for (int b = 0; b < spec.n_baseline_epochs; ++b) {
    out.emplace_back(noise_samples(spec.noise_kind, spec.baseline_samples(),
                                   derive_seed(spec.seed, static_cast<std::uint64_t>(b))),
                     spec.fs);
  }
  return out;
}

std::vector<TimeSeries> cut_stimulus_epochs(const TimeSeries& session, std::span<const std::size_t> onsets,
                                            std::size_t epoch_samples) {
  std::vector<TimeSeries> out;
  for (std::size_t onset : onsets) {
    if (onset + epoch_samples > session.size()) {
      throw Error(ErrorKind::signal_too_short, "stimulus epoch extends past the end of the session");
    }
    auto first = session.values().begin() + static_cast<std::ptrdiff_t>(onset);
    out.push_back(session.with_samples({first, first + static_cast<std::ptrdiff_t>(epoch_samples)}));
  }
  return out;
}

EpochSet generate_ssvep_protocol(const ProtocolSpec& spec) {
  StimulusSession session = generate_stimulus_session(spec);
  EpochSet set;
  set.baseline_epochs = generate_baseline_epochs(spec);
  set.stimulus_epochs = cut_stimulus_epochs(session.signal, session.onsets, spec.stim_samples());
  return set;
}

TimeSeries fir_filter(const TimeSeries& x, FilterKind kind, double cutoff_hz) {
  if (!(cutoff_hz > 0.0 && cutoff_hz < x.fs() / 2.0)) {
    throw Error(ErrorKind::invalid_argument, "filter cutoff must lie in (0, fs/2)");
  }
  const double fc = cutoff_hz / x.fs();
  const double transition = 0.25 * fc;
  std::vector<double> taps =
      kind == FilterKind::lowpass ? dsp::fir_lowpass(fc, transition) : dsp::fir_highpass(fc, transition);
  return x.with_samples(dsp::filtfilt_fir(x.samples(), taps));
}

TimeSeries decimate(const TimeSeries& x, int factor) {
  if (factor < 1) throw Error(ErrorKind::invalid_argument, "decimation factor must be >= 1");
  if (factor == 1) return x;
  const auto f = static_cast<std::size_t>(factor);
  if (x.size() < f) throw Error(ErrorKind::signal_too_short, "signal shorter than decimation factor");
  const double new_fs = x.fs() / factor;
  const TimeSeries smooth = fir_filter(x, FilterKind::lowpass, 0.4 * new_fs);
  std::vector<double> out(x.size() / f);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = smooth[j * f];
  return TimeSeries(std::move(out), new_fs, x.label());
}

TimeSeries zscore(const TimeSeries& x) {
  const double mu = mean(x.samples());
  const double sd = population_sd(x.samples());
  if (!(sd > 0.0)) throw Error(ErrorKind::degenerate_signal, "cannot z-score a constant signal");
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (x[i] - mu) / sd;
  return x.with_samples(std::move(out));
}

ArtifactRejection reject_artifacts(const TimeSeries& x, double threshold) {
  if (!(threshold > 0.0)) throw Error(ErrorKind::invalid_argument, "artifact threshold must be positive");
  const auto pad = static_cast<std::ptrdiff_t>(std::llround(0.5 * x.fs()));
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<bool> drop(x.size(), false);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (std::abs(x[static_cast<std::size_t>(i)]) > threshold) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - pad);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + pad);
      for (std::ptrdiff_t k = lo; k <= hi; ++k) drop[static_cast<std::size_t>(k)] = true;
    }
  }
  std::vector<double> kept;
  kept.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!drop[i]) kept.push_back(x[i]);
  }
  if (kept.empty()) throw Error(ErrorKind::signal_too_short, "artifact rejection removed every sample");
  const double removed = 1.0 - static_cast<double>(kept.size()) / static_cast<double>(x.size());
  return {x.with_samples(std::move(kept)), removed};
}

TimeSeries preprocess(const TimeSeries& x, const PreprocessConfig& cfg) {
  cfg.validate();
  const double ratio = x.fs() / cfg.target_fs;
  const long factor = std::lround(ratio);
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9) {
    throw Error(ErrorKind::invalid_argument, "input fs must be an integer multiple of target_fs");
  }
  TimeSeries y = decimate(x, static_cast<int>(factor));
  y = fir_filter(y, FilterKind::highpass, cfg.hp_cutoff);
  y = fir_filter(y, FilterKind::lowpass, cfg.lp_cutoff);
  if (cfg.artifact_abs_threshold) y = reject_artifacts(y, *cfg.artifact_abs_threshold).clean;
  return y;
}

}  // namespace mife

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mife {

// Uniformly sampled scalar signal. Samples are finite and nonempty; fs > 0.
class TimeSeries {
 public:
  TimeSeries(std::vector<double> samples, double fs, std::string label = {});

  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& values() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double fs() const noexcept { return fs_; }
  const std::string& label() const noexcept { return label_; }
  double duration_s() const noexcept { return static_cast<double>(samples_.size()) / fs_; }

  double operator[](std::size_t i) const noexcept { return samples_[i]; }

  // Same fs and label, new samples.
  TimeSeries with_samples(std::vector<double> samples) const;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

 private:
  std::vector<double> samples_;
  double fs_;
  std::string label_;
};

enum class NoiseKind { white, pink };

NoiseKind parse_noise_kind(const std::string& s);
std::string to_string(NoiseKind kind);

// White: i.i.d. standard Gaussian. Pink: white Gaussian noise shaped to a 1/f
// power spectrum in the frequency domain, then standardized to zero mean and
// unit (population) variance.
TimeSeries generate_noise(NoiseKind kind, std::size_t n, double fs, std::uint64_t seed);

struct PreprocessConfig {
  double target_fs = 250.0;
  double hp_cutoff = 1.0;
  double lp_cutoff = 30.0;
  std::optional<double> artifact_abs_threshold = 100.0;

  void validate() const;
};

// Synthetic repetitive-stimulus session. Durations in seconds, rates in Hz.
struct ProtocolSpec {
  double fs = 250.0;
  double flicker_hz = 15.0;
  int n_stimuli = 5;
  double stim_dur_s = 10.0;
  double gap_dur_s = 10.0;
  double baseline_dur_s = 60.0;
  int n_baseline_epochs = 3;
  // Evoked amplitude of stimulus i (1-based) is snr0 * habituation_decay^(i-1).
  double habituation_decay = 0.6;
  NoiseKind noise_kind = NoiseKind::pink;
  double snr0 = 2.0;
  // Whether the continuous session ends with a gap after the last stimulus.
  bool trailing_gap = false;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t stim_samples() const;
  std::size_t gap_samples() const;
  std::size_t baseline_samples() const;
  double evoked_amplitude(int stimulus_index) const;
};

struct EpochSet {
  std::vector<TimeSeries> baseline_epochs;
  // Index k holds stimulus k + 1, in presentation order.
  std::vector<TimeSeries> stimulus_epochs;

  double fs() const;
};

// Continuous stimulus session: stimulus blocks separated by gaps, with the
// sample offset of each stimulus onset.
struct StimulusSession {
  TimeSeries signal;
  std::vector<std::size_t> onsets;
};

StimulusSession generate_stimulus_session(const ProtocolSpec& spec);
std::vector<TimeSeries> generate_baseline_epochs(const ProtocolSpec& spec);

// Cuts the stimulus blocks out of a (possibly filtered) session.
std::vector<TimeSeries> cut_stimulus_epochs(const TimeSeries& session,
                                            std::span<const std::size_t> onsets,
                                            std::size_t epoch_samples);

EpochSet generate_ssvep_protocol(const ProtocolSpec& spec);

enum class FilterKind { highpass, lowpass };

// Hamming windowed-sinc FIR with a transition band of 25% of the cutoff,
// applied forward and backward.
TimeSeries fir_filter(const TimeSeries& x, FilterKind kind, double cutoff_hz);

// Anti-alias lowpass at 0.4 * (fs / factor), then keeps every factor-th sample.
TimeSeries decimate(const TimeSeries& x, int factor);

// Subtracts the mean and divides by the population SD.
TimeSeries zscore(const TimeSeries& x);

struct ArtifactRejection {
  TimeSeries clean;
  double fraction_removed;
};

// Removes every sample within 0.5 s of a supra-threshold sample and joins the
// remaining segments.
ArtifactRejection reject_artifacts(const TimeSeries& x, double threshold);

// Full chain: decimate to target_fs (integer factor), high-pass, low-pass,
// then optional amplitude-threshold rejection.
TimeSeries preprocess(const TimeSeries& x, const PreprocessConfig& cfg);

}  // namespace mife

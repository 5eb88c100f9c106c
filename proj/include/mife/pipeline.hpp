#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mife/emd.hpp"
#include "mife/entropy.hpp"
#include "mife/signals.hpp"
#include "mife/stats.hpp"

namespace mife::pipeline {

// MIFE: EMD band reconstruction, coarse-graining, fuzzy entropy.
// MDE / MAE / MSE / MFE: coarse-graining with dispersion / approximate /
// sample / fuzzy entropy. RMSE / RMFE: refined scaling with sample / fuzzy.
enum class MethodId { mife, mde, mae, mse, mfe, rmse, rmfe };

std::string to_string(MethodId id);
MethodId parse_method(const std::string& name);
const std::vector<MethodId>& all_methods();

struct MethodConfig {
  emd::EmdConfig emd;
  entropy::FuzzyParams fuzzy;
  entropy::SampleParams sample;
  entropy::DispersionParams dispersion;
  entropy::ToleranceMode tolerance = entropy::ToleranceMode::per_scale;
  entropy::ScaleRange scales;

  void validate() const;
};

// zscore -> decompose -> reconstruct_band(band_lo, band_hi) -> coarse-grained
// fuzzy entropy. Errors carry the stage that raised them.
entropy::EntropyProfile inherent_fuzzy_entropy(const TimeSeries& x, const emd::EmdConfig& emd_cfg,
                                               const entropy::FuzzyParams& p, const entropy::ScaleRange& scales);

entropy::EntropyProfile compute_profile(const TimeSeries& x, MethodId method, const MethodConfig& cfg);

enum class Condition { baseline, stimulus };

struct ComplexityProfile {
  Condition condition = Condition::baseline;
  // 1-based; set iff condition is stimulus.
  std::optional<int> stimulus_index;
  entropy::EntropyProfile profile;

  static ComplexityProfile baseline(entropy::EntropyProfile p);
  static ComplexityProfile stimulus(int index, entropy::EntropyProfile p);
};

struct RelativeComplexityCurve {
  int stimulus_index = 0;
  // nullopt where the stimulus or every baseline value is undefined.
  std::vector<std::optional<double>> rc_values;
  // Set when the stimulus epoch could not be processed at all.
  std::optional<std::string> failure;

  friend bool operator==(const RelativeComplexityCurve&, const RelativeComplexityCurve&) = default;
};

// Stimulus profile minus the per-scale mean of the baseline profiles.
RelativeComplexityCurve relative_complexity(const std::vector<ComplexityProfile>& baselines,
                                            const ComplexityProfile& stim);

// One curve per stimulus epoch, in presentation order. Epoch failures become
// curves with a failure note and no values.
std::vector<RelativeComplexityCurve> run_condition(const EpochSet& epochs, MethodId method, const MethodConfig& cfg);

// Decimation to cfg.target_fs, 1-30 Hz style band limiting of each baseline
// epoch and of the continuous stimulus session, epoching, then optional
// per-epoch artifact rejection.
EpochSet prepare_epochs(const ProtocolSpec& spec, const PreprocessConfig& cfg);

enum class Eyes { ce, oe };
std::string to_string(Eyes e);

// Synthetic recording site: the evoked amplitude is snr0 * evoked_gain.
struct ChannelModel {
  std::string label;
  double evoked_gain = 1.0;

  friend bool operator==(const ChannelModel&, const ChannelModel&) = default;
};

struct ExperimentConfig {
  ProtocolSpec ce;
  ProtocolSpec oe;
  int n_subjects = 40;
  std::vector<ChannelModel> channels{{"Oz", 1.0}, {"Fpz", 0.3}};
  PreprocessConfig preprocess{250.0, 1.0, 30.0, 100.0};
  MethodConfig method_cfg;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

// Protocol used for one subject, eye condition and channel. The seed is a
// deterministic function of (seed, subject, eyes, channel).
ProtocolSpec subject_protocol(const ExperimentConfig& cfg, int subject, Eyes eyes, std::size_t channel);

struct ConditionResult {
  Eyes eyes = Eyes::ce;
  std::string channel;
  // [subject][stimulus]
  std::vector<std::vector<RelativeComplexityCurve>> per_subject;
  // [stimulus][scale], over subjects with defined values.
  std::vector<std::vector<std::optional<double>>> group_mean;
  std::vector<std::vector<std::optional<double>>> group_sd;
  // One entry per scale, BH-FDR within the scale family.
  stats::StatReport anova;
  stats::StatReport tukey_last_vs_first;
  // [stimulus], normality of the subjects' RC per scale, uncorrected.
  std::vector<stats::StatReport> ks;
};

struct ChannelComparison {
  std::string channel;
  // [stimulus]: paired t of CE vs OE per scale, BH-FDR within the scale family.
  std::vector<stats::StatReport> paired;
};

struct ExperimentResult {
  std::string method;
  entropy::ScaleRange scales;
  int n_subjects = 0;
  int n_stimuli = 0;
  std::uint64_t seed = 0;
  // Ordered CE then OE, channels in configuration order within each.
  std::vector<ConditionResult> conditions;
  std::vector<ChannelComparison> ce_vs_oe;

  const ConditionResult& condition(Eyes eyes, const std::string& channel) const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, MethodId method);

// Recomputes group summaries and every StatReport from the per-subject curves.
// Channels without both eye conditions get no CE-OE comparison.
void compute_statistics(ExperimentResult& result, double alpha = 0.05);

}  // namespace mife::pipeline

#include "mife/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "mife/error.hpp"
#include "mife/numeric.hpp"

namespace mife::pipeline {

namespace {

struct MethodInfo {
  MethodId id;
  const char* name;
};

constexpr MethodInfo kMethods[] = {
    {MethodId::mife, "mife"}, {MethodId::mde, "mde"},   {MethodId::mae, "mae"},   {MethodId::mse, "mse"},
    {MethodId::mfe, "mfe"},   {MethodId::rmse, "rmse"}, {MethodId::rmfe, "rmfe"},
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(0..n-1) on up to `workers` threads. The first exception by task
// index is rethrown after all threads finish.
template <class F>
void parallel_for(std::size_t n, int workers, F&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n <= 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(drain);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string failure_note(const Error& e) {
  return e.stage().empty() ? std::string(e.what()) : e.stage() + ": " + e.what();
}

// Value of one scale for every subject at one stimulus; NaN marks missing.
std::vector<double> column(const ConditionResult& c, std::size_t stim, std::size_t scale) {
  std::vector<double> out;
  out.reserve(c.per_subject.size());
  for (const auto& subject : c.per_subject) {
    const auto& v = subject[stim].rc_values;
    out.push_back(scale < v.size() && v[scale] ? *v[scale] : kNaN);
  }
  return out;
}

stats::TestResult missing_result() {
  stats::TestResult r;
  r.statistic = kNaN;
  r.p_raw = kNaN;
  return r;
}

template <class F>
stats::TestResult guarded(F&& test) {
  try {
    return test();
  } catch (const Error&) {
    return missing_result();
  }
}

}  // namespace

std::string to_string(MethodId id) {
  for (const auto& m : kMethods) {
    if (m.id == id) return m.name;
  }
  return "unknown";
}

MethodId parse_method(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (const auto& m : kMethods) {
    if (lower == m.name) return m.id;
  }
  throw Error(ErrorKind::invalid_argument, "unknown method '" + name + "'");
}

const std::vector<MethodId>& all_methods() {
  static const std::vector<MethodId> ids = [] {
    std::vector<MethodId> v;
    for (const auto& m : kMethods) v.push_back(m.id);
    return v;
  }();
  return ids;
}

void MethodConfig::validate() const {
  emd.validate();
  fuzzy.validate();
  sample.validate();
  dispersion.validate();
}

entropy::EntropyProfile inherent_fuzzy_entropy(const TimeSeries& x, const emd::EmdConfig& emd_cfg,
                                               const entropy::FuzzyParams& p, const entropy::ScaleRange& scales) {
  emd_cfg.validate();
  p.validate();
  TimeSeries normalized = [&] {
    try {
      return zscore(x);
    } catch (const Error& e) {
      throw e.with_stage("zscore");
    }
  }();
  TimeSeries band = [&] {
    try {
      const emd::ImfDecomposition d = emd::decompose(normalized, emd_cfg);
      return emd::reconstruct_band(d, emd_cfg.band_lo, emd_cfg.band_hi);
    } catch (const Error& e) {
      throw e.with_stage("emd");
    }
  }();
  entropy::KernelSpec kernel;
  kernel.kind = entropy::Kernel::fuzzy;
  kernel.fuzzy = p;
  try {
    return entropy::multiscale_profile(band.samples(), scales, kernel, entropy::Scaling::coarse,
                                       to_string(MethodId::mife));
  } catch (const Error& e) {
    throw e.with_stage("entropy");
  }
}

entropy::EntropyProfile compute_profile(const TimeSeries& x, MethodId method, const MethodConfig& cfg) {
  cfg.validate();
  if (method == MethodId::mife) return inherent_fuzzy_entropy(x, cfg.emd, cfg.fuzzy, cfg.scales);
  entropy::KernelSpec kernel;
  kernel.fuzzy = cfg.fuzzy;
  kernel.sample = cfg.sample;
  kernel.dispersion = cfg.dispersion;
  kernel.tolerance = cfg.tolerance;
  entropy::Scaling scaling = entropy::Scaling::coarse;
  switch (method) {
    case MethodId::mde: kernel.kind = entropy::Kernel::dispersion; break;
    case MethodId::mae: kernel.kind = entropy::Kernel::approximate; break;
    case MethodId::mse: kernel.kind = entropy::Kernel::sample; break;
    case MethodId::mfe: kernel.kind = entropy::Kernel::fuzzy; break;
    case MethodId::rmse:
      kernel.kind = entropy::Kernel::sample;
      scaling = entropy::Scaling::refined;
      break;
    case MethodId::rmfe:
      kernel.kind = entropy::Kernel::fuzzy;
      scaling = entropy::Scaling::refined;
      break;
    case MethodId::mife: break;
  }
  try {
    return entropy::multiscale_profile(x.samples(), cfg.scales, kernel, scaling, to_string(method));
  } catch (const Error& e) {
    throw e.with_stage("entropy");
  }
}

ComplexityProfile ComplexityProfile::baseline(entropy::EntropyProfile p) {
  return {Condition::baseline, std::nullopt, std::move(p)};
}

ComplexityProfile ComplexityProfile::stimulus(int index, entropy::EntropyProfile p) {
  if (index < 1) throw Error(ErrorKind::invalid_argument, "stimulus index must be >= 1");
  return {Condition::stimulus, index, std::move(p)};
}

RelativeComplexityCurve relative_complexity(const std::vector<ComplexityProfile>& baselines,
                                            const ComplexityProfile& stim) {
  if (baselines.empty()) throw Error(ErrorKind::invalid_argument, "relative complexity needs a baseline profile");
  if (stim.condition != Condition::stimulus || !stim.stimulus_index) {
    throw Error(ErrorKind::invalid_argument, "relative complexity needs a stimulus profile");
  }
  const entropy::EntropyProfile& s = stim.profile;
  for (const ComplexityProfile& b : baselines) {
    if (b.condition != Condition::baseline) {
      throw Error(ErrorKind::invalid_argument, "baseline list holds a stimulus profile");
    }
    if (b.profile.method != s.method || b.profile.scales != s.scales || b.profile.size() != s.size()) {
      throw Error(ErrorKind::incompatible_profiles, "baseline and stimulus profiles differ in method or scales");
    }
  }
  RelativeComplexityCurve out;
  out.stimulus_index = *stim.stimulus_index;
  out.rc_values.resize(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    double sum = 0.0;
    int count = 0;
    for (const ComplexityProfile& b : baselines) {
      if (b.profile.values[k]) {
        sum += *b.profile.values[k];
        ++count;
      }
    }
    if (count > 0 && s.values[k]) out.rc_values[k] = *s.values[k] - sum / count;
  }
  return out;
}

std::vector<RelativeComplexityCurve> run_condition(const EpochSet& epochs, MethodId method, const MethodConfig& cfg) {
  cfg.validate();
  std::vector<ComplexityProfile> baselines;
  std::string baseline_failure;
  for (const TimeSeries& b : epochs.baseline_epochs) {
    try {
      baselines.push_back(ComplexityProfile::baseline(compute_profile(b, method, cfg)));
    } catch (const Error& e) {
      baseline_failure = failure_note(e);
    }
  }
  std::vector<RelativeComplexityCurve> curves;
  for (std::size_t i = 0; i < epochs.stimulus_epochs.size(); ++i) {
    const int index = static_cast<int>(i) + 1;
    RelativeComplexityCurve failed{index, std::vector<std::optional<double>>(cfg.scales.size()), std::nullopt};
    if (baselines.empty()) {
      failed.failure = "baseline " + (baseline_failure.empty() ? std::string("epochs missing") : baseline_failure);
      curves.push_back(std::move(failed));
      continue;
    }
    try {
      const auto stim = ComplexityProfile::stimulus(index, compute_profile(epochs.stimulus_epochs[i], method, cfg));
      curves.push_back(relative_complexity(baselines, stim));
    } catch (const Error& e) {
      failed.failure = failure_note(e);
      curves.push_back(std::move(failed));
    }
  }
  return curves;
}

EpochSet prepare_epochs(const ProtocolSpec& spec, const PreprocessConfig& cfg) {
  spec.validate();
  cfg.validate();
  const double ratio = spec.fs / cfg.target_fs;
  const long factor = std::lround(ratio);
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9) {
    throw Error(ErrorKind::invalid_argument, "protocol fs must be an integer multiple of target_fs");
  }
  const int f = static_cast<int>(factor);
  auto band_limit = [&](const TimeSeries& x) {
    TimeSeries y = decimate(x, f);
    y = fir_filter(y, FilterKind::highpass, cfg.hp_cutoff);
    return fir_filter(y, FilterKind::lowpass, cfg.lp_cutoff);
  };
  auto reject = [&](TimeSeries x) {
    if (!cfg.artifact_abs_threshold) return x;
    return reject_artifacts(x, *cfg.artifact_abs_threshold).clean;
  };

  EpochSet set;
  for (const TimeSeries& b : generate_baseline_epochs(spec)) set.baseline_epochs.push_back(reject(band_limit(b)));

  const StimulusSession session = generate_stimulus_session(spec);
  const TimeSeries filtered = band_limit(session.signal);
  std::vector<std::size_t> onsets;
  for (std::size_t o : session.onsets) onsets.push_back(o / static_cast<std::size_t>(f));
  for (TimeSeries& e : cut_stimulus_epochs(filtered, onsets, spec.stim_samples() / static_cast<std::size_t>(f))) {
    set.stimulus_epochs.push_back(reject(std::move(e)));
  }
  return set;
}

std::string to_string(Eyes e) { return e == Eyes::ce ? "CE" : "OE"; }

void ExperimentConfig::validate() const {
  ce.validate();
  oe.validate();
  preprocess.validate();
  method_cfg.validate();
  if (n_subjects < 2) throw Error(ErrorKind::invalid_argument, "an experiment needs at least 2 subjects");
  if (ce.n_stimuli != oe.n_stimuli) {
    throw Error(ErrorKind::invalid_argument, "CE and OE protocols must present the same number of stimuli");
  }
  if (channels.empty()) throw Error(ErrorKind::invalid_argument, "an experiment needs at least one channel");
  for (const ChannelModel& c : channels) {
    if (c.label.empty()) throw Error(ErrorKind::invalid_argument, "channel label must not be empty");
    if (!(c.evoked_gain >= 0.0) || !std::isfinite(c.evoked_gain)) {
      throw Error(ErrorKind::invalid_argument, "channel evoked gain must be finite and >= 0");
    }
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::invalid_argument, "alpha must lie in (0, 1)");
  if (workers < 1) throw Error(ErrorKind::invalid_argument, "worker count must be >= 1");
}

ProtocolSpec subject_protocol(const ExperimentConfig& cfg, int subject, Eyes eyes, std::size_t channel) {
  ProtocolSpec spec = eyes == Eyes::ce ? cfg.ce : cfg.oe;
  const std::uint64_t s = derive_seed(cfg.seed, static_cast<std::uint64_t>(subject));
  const std::uint64_t e = derive_seed(s, eyes == Eyes::ce ? 0 : 1);
  spec.seed = derive_seed(e, channel);
  spec.snr0 *= cfg.channels.at(channel).evoked_gain;
  return spec;
}

const ConditionResult& ExperimentResult::condition(Eyes eyes, const std::string& channel) const {
  for (const ConditionResult& c : conditions) {
    if (c.eyes == eyes && c.channel == channel) return c;
  }
  throw Error(ErrorKind::invalid_argument, "no condition " + to_string(eyes) + "/" + channel);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, MethodId method) {
  cfg.validate();
  const std::size_t n_channels = cfg.channels.size();
  const auto n_subjects = static_cast<std::size_t>(cfg.n_subjects);

  ExperimentResult result;
  result.method = to_string(method);
  result.scales = cfg.method_cfg.scales;
  result.n_subjects = cfg.n_subjects;
  result.n_stimuli = cfg.ce.n_stimuli;
  result.seed = cfg.seed;
  for (Eyes eyes : {Eyes::ce, Eyes::oe}) {
    for (const ChannelModel& ch : cfg.channels) {
      ConditionResult c;
      c.eyes = eyes;
      c.channel = ch.label;
      c.per_subject.resize(n_subjects);
      result.conditions.push_back(std::move(c));
    }
  }

  // Task t covers subject t / (2 * channels), then eyes, then channel.
  const std::size_t per_subject = 2 * n_channels;
  parallel_for(n_subjects * per_subject, cfg.workers, [&](std::size_t t) {
    const int subject = static_cast<int>(t / per_subject);
    const std::size_t slot = t % per_subject;
    const Eyes eyes = slot < n_channels ? Eyes::ce : Eyes::oe;
    const std::size_t channel = slot % n_channels;
    auto& curves = result.conditions[slot].per_subject[static_cast<std::size_t>(subject)];
    try {
      const EpochSet epochs = prepare_epochs(subject_protocol(cfg, subject, eyes, channel), cfg.preprocess);
      curves = run_condition(epochs, method, cfg.method_cfg);
    } catch (const Error& e) {
      curves.clear();
      for (int i = 1; i <= result.n_stimuli; ++i) {
        curves.push_back({i, std::vector<std::optional<double>>(result.scales.size()), "preprocess: " + failure_note(e)});
      }
    }
  });

  compute_statistics(result, cfg.alpha);
  return result;
}

void compute_statistics(ExperimentResult& result, double alpha) {
  const std::size_t n_scales = result.scales.size();
  const auto n_stim = static_cast<std::size_t>(result.n_stimuli);

  auto report = [&](const std::string& family) {
    stats::StatReport r;
    r.family = family;
    r.alpha = alpha;
    return r;
  };

  for (ConditionResult& c : result.conditions) {
    const std::string tag = to_string(c.eyes) + "/" + c.channel;
    c.group_mean.assign(n_stim, std::vector<std::optional<double>>(n_scales));
    c.group_sd.assign(n_stim, std::vector<std::optional<double>>(n_scales));
    c.ks.clear();
    c.anova = report("anova " + tag);
    c.tukey_last_vs_first = report("tukey " + std::to_string(n_stim) + "v1 " + tag);

    std::vector<std::vector<std::vector<double>>> cols(n_scales, std::vector<std::vector<double>>(n_stim));
    for (std::size_t i = 0; i < n_stim; ++i) {
      stats::StatReport ks = report("ks " + tag + " stimulus " + std::to_string(i + 1));
      for (std::size_t k = 0; k < n_scales; ++k) {
        cols[k][i] = column(c, i, k);
        std::vector<double> defined;
        for (double v : cols[k][i]) {
          if (!std::isnan(v)) defined.push_back(v);
        }
        if (!defined.empty()) c.group_mean[i][k] = mean(defined);
        if (defined.size() >= 2) c.group_sd[i][k] = sample_sd(defined);
        ks.entries.push_back(guarded([&] { return stats::ks_normality(cols[k][i], true, alpha); }));
      }
      c.ks.push_back(std::move(ks));
    }
    for (std::size_t k = 0; k < n_scales; ++k) {
      c.anova.entries.push_back(guarded([&] { return stats::one_way_anova(cols[k], alpha); }));
      c.tukey_last_vs_first.entries.push_back(
          guarded([&] { return stats::tukey_hsd(cols[k], {n_stim - 1, 0}, alpha); }));
    }
    stats::apply_fdr(c.anova);
    stats::apply_fdr(c.tukey_last_vs_first);
  }

  result.ce_vs_oe.clear();
  for (const ConditionResult& ce : result.conditions) {
    if (ce.eyes != Eyes::ce) continue;
    const auto match = std::find_if(result.conditions.begin(), result.conditions.end(), [&](const ConditionResult& c) {
      return c.eyes == Eyes::oe && c.channel == ce.channel;
    });
    if (match == result.conditions.end()) continue;
    const ConditionResult& oe = *match;
    ChannelComparison cmp;
    cmp.channel = ce.channel;
    for (std::size_t i = 0; i < n_stim; ++i) {
      stats::StatReport r = report("paired_t CE-OE " + ce.channel + " stimulus " + std::to_string(i + 1));
      for (std::size_t k = 0; k < n_scales; ++k) {
        const std::vector<double> x = column(ce, i, k);
        const std::vector<double> y = column(oe, i, k);
        r.entries.push_back(guarded([&] { return stats::paired_t(x, y, alpha); }));
      }
      stats::apply_fdr(r);
      cmp.paired.push_back(std::move(r));
    }
    result.ce_vs_oe.push_back(std::move(cmp));
  }
}

}  // namespace mife::pipeline

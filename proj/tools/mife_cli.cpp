// Command-line front end: gen, preprocess, emd, entropy, experiment, stats,
// compare. Exit codes: 0 success, 2 usage or input error, 3 computation error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mife/emd.hpp"
#include "mife/entropy.hpp"
#include "mife/error.hpp"
#include "mife/io.hpp"
#include "mife/pipeline.hpp"
#include "mife/signals.hpp"

namespace fs = std::filesystem;
using namespace mife;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitCompute = 3;

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  int workers = 1;
  std::string config;
};

// Flags shared by the subcommands that simulate or analyse a protocol.
struct ProtocolFlags {
  double fs = 250.0;
  double flicker = 15.0;
  int stimuli = 5;
  double stim_dur = 10.0;
  double gap_dur = 10.0;
  double baseline_dur = 60.0;
  int baseline_epochs = 3;
  double decay = 0.6;
  std::string noise = "pink";
  double snr0 = 2.0;
  bool trailing_gap = false;
  double fpz_gain = 0.3;

  ProtocolSpec spec() const {
    ProtocolSpec p;
    p.fs = fs;
    p.flicker_hz = flicker;
    p.n_stimuli = stimuli;
    p.stim_dur_s = stim_dur;
    p.gap_dur_s = gap_dur;
    p.baseline_dur_s = baseline_dur;
    p.n_baseline_epochs = baseline_epochs;
    p.habituation_decay = decay;
    p.noise_kind = parse_noise_kind(noise);
    p.snr0 = snr0;
    p.trailing_gap = trailing_gap;
    return p;
  }
};

struct MethodFlags {
  std::string scales = "1..20";
  int m = 2;
  double r = 0.15;
  double n = 2.0;
  int classes = 6;
  int band_lo = 5;
  int band_hi = 10;
  int max_imfs = 16;
  int max_sift = 100;
  double sift_threshold = 0.2;
  std::string tolerance = "per-scale";

  pipeline::MethodConfig config() const {
    pipeline::MethodConfig c;
    c.scales = entropy::ScaleRange::parse(scales);
    c.fuzzy = {m, r, n};
    c.sample = {m, r};
    c.dispersion = {m, classes, 1};
    c.emd.band_lo = band_lo;
    c.emd.band_hi = band_hi;
    c.emd.max_imfs = max_imfs;
    c.emd.max_sift_iters = max_sift;
    c.emd.sift_sd_threshold = sift_threshold;
    if (tolerance == "per-scale") {
      c.tolerance = entropy::ToleranceMode::per_scale;
    } else if (tolerance == "fixed") {
      c.tolerance = entropy::ToleranceMode::fixed;
    } else {
      throw Error(ErrorKind::invalid_argument, "--tolerance must be per-scale or fixed");
    }
    c.validate();
    return c;
  }
};

struct PreprocessFlags {
  double target_fs = 250.0;
  double hp = 1.0;
  double lp = 30.0;
  double artifact = 100.0;

  PreprocessConfig config() const {
    PreprocessConfig c{target_fs, hp, lp, std::nullopt};
    if (artifact > 0.0) c.artifact_abs_threshold = artifact;
    c.validate();
    return c;
  }
};

void add_protocol_flags(CLI::App* app, ProtocolFlags& f) {
  app->add_option("--fs", f.fs, "Sampling rate of the synthetic recording (Hz)")->capture_default_str();
  app->add_option("--flicker", f.flicker, "Stimulus flicker frequency (Hz)")->capture_default_str();
  app->add_option("--stimuli", f.stimuli, "Number of stimuli")->capture_default_str();
  app->add_option("--stim-dur", f.stim_dur, "Stimulus duration (s)")->capture_default_str();
  app->add_option("--gap-dur", f.gap_dur, "Gap between stimuli (s)")->capture_default_str();
  app->add_option("--baseline-dur", f.baseline_dur, "Baseline epoch duration (s)")->capture_default_str();
  app->add_option("--baseline-epochs", f.baseline_epochs, "Baseline epochs per condition")->capture_default_str();
  app->add_option("--decay", f.decay, "Evoked amplitude factor per repetition")->capture_default_str();
  app->add_option("--noise", f.noise, "Background noise: white or pink")->capture_default_str();
  app->add_option("--snr0", f.snr0, "Evoked amplitude of the first stimulus")->capture_default_str();
  app->add_flag("--trailing-gap", f.trailing_gap, "Append a gap after the last stimulus");
  app->add_option("--fpz-gain", f.fpz_gain, "Evoked gain of the Fpz channel")->capture_default_str();
}

void add_method_flags(CLI::App* app, MethodFlags& f) {
  app->add_option("--scales", f.scales, "Scale factors, a..b or a comma list")->capture_default_str();
  app->add_option("--m", f.m, "Embedding dimension")->capture_default_str();
  app->add_option("--r", f.r, "Tolerance as a fraction of the SD")->capture_default_str();
  app->add_option("--n", f.n, "Fuzzy membership exponent")->capture_default_str();
  app->add_option("--classes", f.classes, "Dispersion entropy class count")->capture_default_str();
  app->add_option("--band-lo", f.band_lo, "First IMF kept by MIFE (1 = fastest)")->capture_default_str();
  app->add_option("--band-hi", f.band_hi, "Last IMF kept by MIFE")->capture_default_str();
  app->add_option("--max-imfs", f.max_imfs, "Maximum IMF count")->capture_default_str();
  app->add_option("--max-sift", f.max_sift, "Maximum sifting iterations per IMF")->capture_default_str();
  app->add_option("--sift-threshold", f.sift_threshold, "Sifting SD stopping threshold")->capture_default_str();
  app->add_option("--tolerance", f.tolerance, "Tolerance mode: per-scale or fixed")->capture_default_str();
}

void add_preprocess_flags(CLI::App* app, PreprocessFlags& f) {
  app->add_option("--target-fs", f.target_fs, "Rate after decimation (Hz)")->capture_default_str();
  app->add_option("--hp", f.hp, "High-pass cutoff (Hz)")->capture_default_str();
  app->add_option("--lp", f.lp, "Low-pass cutoff (Hz)")->capture_default_str();
  app->add_option("--artifact", f.artifact, "Artifact amplitude threshold, <= 0 disables")->capture_default_str();
}

pipeline::ExperimentConfig experiment_config(const Globals& g, const ProtocolFlags& p, const MethodFlags& m,
                                             const PreprocessFlags& pre, int subjects) {
  pipeline::ExperimentConfig cfg;
  cfg.ce = p.spec();
  cfg.oe = p.spec();
  cfg.n_subjects = subjects;
  cfg.channels = {{"Oz", 1.0}, {"Fpz", p.fpz_gain}};
  cfg.preprocess = pre.config();
  cfg.method_cfg = m.config();
  cfg.seed = g.seed;
  cfg.workers = g.workers;
  cfg.validate();
  return cfg;
}

fs::path out_dir(const Globals& g) { return g.out.empty() ? fs::path(".") : fs::path(g.out); }

// Writes a probe file so that an unwritable output directory fails before any
// computation, with the path in the message.
void check_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".mife_write_probe";
  {
    std::FILE* f = ec ? nullptr : std::fopen(probe.c_str(), "w");
    if (!f) throw Error(ErrorKind::io_error, "output directory is not writable: " + dir.string());
    std::fclose(f);
  }
  fs::remove(probe, ec);
}

std::string json_scalar_arg(const std::string& key, const nlohmann::json& v) {
  if (v.is_boolean()) return "--" + key + "=" + (v.get<bool>() ? "true" : "false");
  if (v.is_string()) return "--" + key + "=" + v.get<std::string>();
  if (v.is_number_unsigned()) return "--" + key + "=" + std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return "--" + key + "=" + std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return "--" + key + "=" + io::format_number(v.get<double>());
  throw Error(ErrorKind::parse_error, "config key '" + key + "' must be a scalar");
}

// Splices the keys of a --config JSON document into the argument list ahead
// of the user's own flags. Options keep their last value, so flags win.
std::vector<std::string> expand_config(CLI::App& app, std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(io::read_text(*path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse_error, *path + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::parse_error, *path + ": config must be a JSON object");

  CLI::App* sub = nullptr;
  std::size_t sub_pos = args.size();
  for (std::size_t i = 0; i < args.size() && !sub; ++i) {
    for (CLI::App* s : app.get_subcommands([](CLI::App*) { return true; })) {
      if (s->get_name() == args[i]) {
        sub = s;
        sub_pos = i;
        break;
      }
    }
  }
  std::vector<std::string> global_args;
  std::vector<std::string> sub_args;
  for (const auto& [key, value] : doc.items()) {
    if (key == "config") throw Error(ErrorKind::parse_error, *path + ": config files cannot nest");
    const std::string flag = "--" + key;
    if (app.get_option_no_throw(flag)) {
      global_args.push_back(json_scalar_arg(key, value));
    } else if (sub && sub->get_option_no_throw(flag)) {
      sub_args.push_back(json_scalar_arg(key, value));
    } else {
      throw Error(ErrorKind::parse_error, *path + ": unknown config key '" + key + "'");
    }
  }
  std::vector<std::string> out = global_args;
  out.insert(out.end(), args.begin(), args.begin() + static_cast<std::ptrdiff_t>(std::min(sub_pos + 1, args.size())));
  out.insert(out.end(), sub_args.begin(), sub_args.end());
  if (sub_pos + 1 < args.size()) out.insert(out.end(), args.begin() + static_cast<std::ptrdiff_t>(sub_pos + 1), args.end());
  return out;
}

std::size_t count_failures(const pipeline::ExperimentResult& r) {
  std::size_t n = 0;
  for (const auto& c : r.conditions) {
    for (const auto& subject : c.per_subject) {
      for (const auto& curve : subject) n += curve.failure ? 1 : 0;
    }
  }
  return n;
}

// Statistics are recomputed from the values as serialized so that the JSON,
// the CSVs and a later `stats` run agree digit for digit.
void write_experiment_outputs(const fs::path& dir, const pipeline::ExperimentResult& computed, double alpha) {
  pipeline::ExperimentResult r = io::experiment_from_json(io::experiment_to_json(computed));
  pipeline::compute_statistics(r, alpha);
  io::write_text(dir / "experiment.json", io::experiment_to_json(r));
  io::write_figure_csvs(dir, r);
  io::write_stats_csv(dir / "stats.csv", r);
  const std::size_t failures = count_failures(r);
  if (failures > 0) {
    std::cerr << "mife: warning: " << failures << " epoch(s) failed in " << r.method
              << "; marked as missing in the output\n";
  }
}

std::string subject_dir(int s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "subject_%02d", s + 1);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale inherent fuzzy entropy toolkit"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--workers", g.workers, "Worker threads")->capture_default_str();
  app.add_option("--config", g.config, "JSON config; command-line flags take precedence");

  ProtocolFlags proto;
  MethodFlags meth;
  PreprocessFlags pre;

  // gen
  auto* gen = app.add_subcommand("gen", "Write synthetic protocol epochs per subject and eye condition");
  int gen_subjects = 40;
  std::string gen_channel = "Oz";
  bool gen_preprocessed = false;
  gen->add_option("--subjects", gen_subjects, "Number of subjects")->capture_default_str();
  gen->add_option("--channel", gen_channel, "Channel model: Oz or Fpz")->capture_default_str();
  gen->add_flag("--preprocessed", gen_preprocessed, "Band-limit and epoch as the experiment does");
  add_protocol_flags(gen, proto);
  add_preprocess_flags(gen, pre);

  std::optional<double> input_fs;
  const std::string input_fs_help = "Sampling rate when the input CSV has no JSON sidecar";

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "Decimate, band-limit and artifact-reject a series");
  std::string prep_input;
  std::string prep_output;
  prep->add_option("--input", prep_input, "Input CSV (with JSON sidecar)")->required();
  prep->add_option("--input-fs", input_fs, input_fs_help);
  prep->add_option("--output", prep_output, "Output CSV; default <out>/<stem>_pre.csv");
  add_preprocess_flags(prep, pre);

  // emd
  auto* emd_cmd = app.add_subcommand("emd", "Decompose a series into IMFs");
  std::string emd_input;
  emd_cmd->add_option("--input", emd_input, "Input CSV (with JSON sidecar)")->required();
  emd_cmd->add_option("--input-fs", input_fs, input_fs_help);
  add_method_flags(emd_cmd, meth);

  // entropy
  auto* ent = app.add_subcommand("entropy", "Multiscale entropy profile of one series");
  std::string ent_input;
  std::string ent_method = "mife";
  ent->add_option("--input", ent_input, "Input CSV (with JSON sidecar)")->required();
  ent->add_option("--input-fs", input_fs, input_fs_help);
  ent->add_option("--method", ent_method, "mife, mde, mae, mse, mfe, rmse or rmfe")->capture_default_str();
  add_method_flags(ent, meth);

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run the synthetic repetitive-stimulus experiment");
  int exp_subjects = 40;
  std::string exp_method = "mife";
  std::string exp_methods;
  exp->add_option("--subjects", exp_subjects, "Number of virtual subjects")->capture_default_str();
  exp->add_option("--method", exp_method, "Single method")->capture_default_str();
  exp->add_option("--methods", exp_methods, "'all' or a comma list; one output directory per method");
  add_protocol_flags(exp, proto);
  add_method_flags(exp, meth);
  add_preprocess_flags(exp, pre);

  // stats
  auto* st = app.add_subcommand("stats", "Recompute the statistics of an experiment JSON");
  std::string st_input;
  double st_alpha = 0.05;
  st->add_option("--input", st_input, "experiment.json")->required();
  st->add_option("--alpha", st_alpha, "Significance level and FDR q")->capture_default_str();

  // compare
  auto* cmp = app.add_subcommand("compare", "Summarize several experiment JSONs side by side");
  std::vector<std::string> cmp_inputs;
  cmp->add_option("inputs", cmp_inputs, "experiment.json files")->required();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(app, std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  } catch (const Error& e) {
    std::cerr << "mife: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*gen) {
      const pipeline::ExperimentConfig cfg = experiment_config(g, proto, meth, pre, gen_subjects);
      std::size_t channel = cfg.channels.size();
      for (std::size_t c = 0; c < cfg.channels.size(); ++c) {
        if (cfg.channels[c].label == gen_channel) channel = c;
      }
      if (channel == cfg.channels.size()) throw Error(ErrorKind::invalid_argument, "unknown channel " + gen_channel);
      const fs::path dir = out_dir(g);
      check_writable(dir);
      for (int s = 0; s < cfg.n_subjects; ++s) {
        for (pipeline::Eyes eyes : {pipeline::Eyes::ce, pipeline::Eyes::oe}) {
          const ProtocolSpec spec = pipeline::subject_protocol(cfg, s, eyes, channel);
          const EpochSet set = gen_preprocessed ? pipeline::prepare_epochs(spec, cfg.preprocess)
                                                : generate_ssvep_protocol(spec);
          io::write_epoch_set(dir / subject_dir(s) / pipeline::to_string(eyes), set, gen_channel);
        }
      }
    } else if (*prep) {
      const TimeSeries x = io::read_series(prep_input, input_fs);
      const TimeSeries y = preprocess(x, pre.config());
      const fs::path target = prep_output.empty()
                                  ? out_dir(g) / (fs::path(prep_input).stem().string() + "_pre.csv")
                                  : fs::path(prep_output);
      io::write_series(target, y);
    } else if (*emd_cmd) {
      const pipeline::MethodConfig mc = meth.config();
      const TimeSeries x = io::read_series(emd_input, input_fs);
      const emd::ImfDecomposition d = [&] {
        try {
          return emd::decompose(x, mc.emd);
        } catch (const Error& e) {
          throw e.with_stage("emd");
        }
      }();
      const fs::path dir = out_dir(g);
      check_writable(dir);
      for (std::size_t k = 0; k < d.size(); ++k) io::write_series(dir / ("imf_" + std::to_string(k + 1) + ".csv"), d.imfs[k]);
      io::write_series(dir / "residue.csv", d.residue);
    } else if (*ent) {
      const pipeline::MethodConfig mc = meth.config();
      const pipeline::MethodId id = pipeline::parse_method(ent_method);
      const TimeSeries x = io::read_series(ent_input, input_fs);
      const entropy::EntropyProfile p = pipeline::compute_profile(x, id, mc);
      if (g.out.empty()) {
        std::cout << "scale,value\n";
        for (std::size_t k = 0; k < p.size(); ++k) {
          std::cout << p.scales[k] << "," << io::format_number(p.values[k] ? *p.values[k] : NAN) << "\n";
        }
      } else {
        io::write_profile_csv(out_dir(g) / (fs::path(ent_input).stem().string() + "_" + ent_method + ".csv"), p);
      }
    } else if (*exp) {
      const pipeline::ExperimentConfig cfg = experiment_config(g, proto, meth, pre, exp_subjects);
      std::vector<pipeline::MethodId> methods;
      const bool per_method_dirs = !exp_methods.empty();
      if (exp_methods == "all") {
        methods = pipeline::all_methods();
      } else if (per_method_dirs) {
        std::stringstream ss(exp_methods);
        for (std::string name; std::getline(ss, name, ',');) methods.push_back(pipeline::parse_method(name));
      } else {
        methods.push_back(pipeline::parse_method(exp_method));
      }
      const fs::path dir = out_dir(g);
      check_writable(dir);
      for (pipeline::MethodId id : methods) {
        const pipeline::ExperimentResult r = pipeline::run_experiment(cfg, id);
        write_experiment_outputs(per_method_dirs ? dir / pipeline::to_string(id) : dir, r, cfg.alpha);
      }
    } else if (*st) {
      pipeline::ExperimentResult r = io::read_experiment(st_input);
      pipeline::compute_statistics(r, st_alpha);
      const fs::path dir = out_dir(g);
      check_writable(dir);
      io::write_stats_csv(dir / "stats.csv", r);
    } else if (*cmp) {
      std::string text = "method,condition,channel,scale,rc_first,rc_last,tukey_p_fdr,sig\n";
      for (const std::string& path : cmp_inputs) {
        const pipeline::ExperimentResult r = io::read_experiment(path);
        for (const auto& c : r.conditions) {
          const std::size_t last = c.group_mean.empty() ? 0 : c.group_mean.size() - 1;
          for (std::size_t k = 0; k < r.scales.size(); ++k) {
            const auto& t = c.tukey_last_vs_first.entries[k];
            auto cell = [](const std::optional<double>& v) { return io::format_number(v ? *v : NAN); };
            text += r.method + "," + pipeline::to_string(c.eyes) + "," + c.channel + "," +
                    std::to_string(r.scales[k]) + "," + cell(c.group_mean[0][k]) + "," +
                    cell(c.group_mean[last][k]) + "," + cell(t.p_adjusted) + "," + (t.reject ? "1" : "0") + "\n";
          }
        }
      }
      if (g.out.empty()) {
        std::cout << text;
      } else {
        io::write_text(out_dir(g) / "compare.csv", text);
      }
    }
  } catch (const Error& e) {
    std::cerr << "mife: " << (e.stage().empty() ? "" : e.stage() + ": ") << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::invalid_argument:
      case ErrorKind::io_error:
      case ErrorKind::parse_error:
        return kExitInput;
      default:
        return kExitCompute;
    }
  } catch (const std::exception& e) {
    std::cerr << "mife: " << e.what() << "\n";
    return kExitCompute;
  }
  return kExitOk;
}

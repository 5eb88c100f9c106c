// Acceptance runner: one pass/fail line per criterion.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mife/emd.hpp"
#include "mife/entropy.hpp"
#include "mife/io.hpp"
#include "mife/numeric.hpp"
#include "mife/pipeline.hpp"
#include "mife/signals.hpp"
#include "mife/special.hpp"
#include "mife/stats.hpp"
#include "oracles.hpp"

using namespace mife;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome kernel_oracles() {
  Stopwatch sw;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> len(60, 500);
  std::uniform_int_distribution<int> emb(1, 3);
  std::uniform_real_distribution<double> tol(0.1, 0.3);
  double worst[4] = {0, 0, 0, 0};
  bool agree_defined = true;
  for (int i = 0; i < 50; ++i) {
    auto x = oracle::gaussian(static_cast<std::size_t>(len(rng)), 5000 + i);
    // Every other input is a random walk, so the kernels also see
    // non-stationary data.
    if (i % 2) {
      for (std::size_t k = 1; k < x.size(); ++k) x[k] += x[k - 1];
    }
    const int m = emb(rng);
    const double r = tol(rng);
    const double n = 1.0 + (i % 3);

    worst[0] = std::max(worst[0], std::abs(entropy::fuzzy_entropy(x, {m, r, n}) - oracle::fuzzy_entropy(x, m, r, n)));

    const auto se = entropy::sample_entropy(x, {m, r});
    const auto so = oracle::sample_entropy(x, m, r);
    if (se.has_value() != so.has_value()) agree_defined = false;
    if (se && so) worst[1] = std::max(worst[1], std::abs(*se - *so));

    worst[2] = std::max(worst[2],
                        std::abs(entropy::approximate_entropy(x, {m, r}) - oracle::approximate_entropy(x, m, r)));

    const int c = 3 + (i % 4);
    const int dm = 2 + (i % 2);
    const int delay = 1 + (i % 2);
    if (x.size() > static_cast<std::size_t>(std::pow(c, dm)) + static_cast<std::size_t>((dm - 1) * delay)) {
      worst[3] = std::max(worst[3], std::abs(entropy::dispersion_entropy(x, {dm, c, delay}) -
                                             oracle::dispersion_entropy(x, dm, c, delay)));
    }
  }
  const double s = sw.seconds();
  const double w = *std::max_element(worst, worst + 4);
  return {w <= 1e-10 && agree_defined && s < 60.0,
          fmt("max |diff| fuzzy %.1e sample %.1e approx %.1e dispersion %.1e, %.1f s", worst[0], worst[1], worst[2],
              worst[3], s)};
}

Outcome emd_completeness() {
  Stopwatch sw;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> freq(0.5, 60.0);
  std::uniform_real_distribution<double> amp(0.1, 3.0);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  std::uniform_int_distribution<int> tones(1, 5);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto x = oracle::gaussian(2048, 7000 + i, 0.5);
    const int nt = tones(rng);
    for (int t = 0; t < nt; ++t) {
      const auto s = oracle::tone(2048, 250.0, freq(rng), amp(rng), phase(rng));
      for (std::size_t k = 0; k < x.size(); ++k) x[k] += s[k];
    }
    const emd::ImfDecomposition d = emd::decompose(TimeSeries(x, 250.0));
    const double sd = population_sd(x);
    for (std::size_t k = 0; k < x.size(); ++k) {
      double sum = d.residue[k];
      for (const auto& imf : d.imfs) sum += imf[k];
      worst = std::max(worst, std::abs(x[k] - sum) / sd);
    }
  }
  const double s = sw.seconds();
  return {worst <= 1e-8 && s < 30.0, fmt("max |x - sum| / SD = %.2e, %.1f s", worst, s)};
}

Outcome coarse_grain_exact() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> len(20, 5000);
  int checked = 0;
  int mismatched = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = oracle::gaussian(static_cast<std::size_t>(len(rng)), 9000 + trial);
    for (int tau = 1; tau <= 20; ++tau) {
      ++checked;
      if (entropy::coarse_grain(x, tau) != oracle::coarse_grain(x, tau)) ++mismatched;
    }
    if (entropy::coarse_grain(x, 1) != x) ++mismatched;
  }
  return {mismatched == 0, fmt("%d of %d series differ bit-for-bit, tau = 1 identity included", mismatched, checked)};
}

Outcome noise_benchmark() {
  Stopwatch sw;
  const int reps = 30;
  const std::size_t n = 20000;
  entropy::KernelSpec k;
  k.kind = entropy::Kernel::sample;
  k.tolerance = entropy::ToleranceMode::fixed;
  const entropy::ScaleRange scales;
  std::vector<double> white(20, 0.0), pink(20, 0.0);
  std::vector<int> white_n(20, 0), pink_n(20, 0);
  for (int r = 0; r < reps; ++r) {
    const auto wp = entropy::multiscale_profile(generate_noise(NoiseKind::white, n, 1.0, 100 + r).samples(), scales,
                                                k, entropy::Scaling::coarse);
    const auto pp = entropy::multiscale_profile(generate_noise(NoiseKind::pink, n, 1.0, 200 + r).samples(), scales,
                                                k, entropy::Scaling::coarse);
    for (std::size_t s = 0; s < 20; ++s) {
      if (wp.values[s]) white[s] += *wp.values[s], ++white_n[s];
      if (pp.values[s]) pink[s] += *pp.values[s], ++pink_n[s];
    }
  }
  std::vector<double> idx(20);
  bool defined = true;
  for (std::size_t s = 0; s < 20; ++s) {
    idx[s] = static_cast<double>(s + 1);
    defined = defined && white_n[s] > 0 && pink_n[s] > 0;
    white[s] /= std::max(white_n[s], 1);
    pink[s] /= std::max(pink_n[s], 1);
  }
  const double rho = oracle::spearman(idx, white);
  int pink_above = 0;
  for (std::size_t s = 4; s < 20; ++s) pink_above += pink[s] > white[s] ? 1 : 0;
  const double secs = sw.seconds();
  return {defined && rho < -0.9 && pink_above == 16 && secs < 300.0,
          fmt("white rho = %.3f, pink > white at %d/16 scales >= 5 (scale 1: %.3f vs %.3f, scale 20: %.3f vs %.3f), "
              "%.0f s",
              rho, pink_above, white[0], pink[0], white[19], pink[19], secs)};
}

struct OzSummary {
  int increasing = 0;
  int significant = 0;
};

OzSummary summarize(const pipeline::ConditionResult& c) {
  OzSummary out;
  const std::size_t n_scales = c.tukey_last_vs_first.entries.size();
  for (std::size_t k = 0; k < n_scales; ++k) {
    bool inc = true;
    for (std::size_t i = 1; i < c.group_mean.size(); ++i) {
      const auto& a = c.group_mean[i - 1][k];
      const auto& b = c.group_mean[i][k];
      if (!a || !b || !(*b > *a)) inc = false;
    }
    out.increasing += inc ? 1 : 0;
    out.significant += c.tukey_last_vs_first.entries[k].reject ? 1 : 0;
  }
  return out;
}

Outcome habituation() {
  Stopwatch sw;
  pipeline::ExperimentConfig cfg;
  cfg.ce.habituation_decay = 0.6;
  cfg.oe.habituation_decay = 0.6;
  cfg.ce.snr0 = 2.0;
  cfg.oe.snr0 = 2.0;
  cfg.n_subjects = 40;
  cfg.seed = 1;
  const auto r = pipeline::run_experiment(cfg, pipeline::MethodId::mife);
  const OzSummary ce = summarize(r.condition(pipeline::Eyes::ce, "Oz"));
  const OzSummary oe = summarize(r.condition(pipeline::Eyes::oe, "Oz"));
  const double s = sw.seconds();
  const bool ok = ce.increasing >= 15 && oe.increasing >= 15 && ce.significant >= 11 && oe.significant >= 11;
  return {ok && s < 600.0,
          fmt("Oz CE increasing %d/20 significant %d/20, Oz OE increasing %d/20 significant %d/20, %.0f s",
              ce.increasing, ce.significant, oe.increasing, oe.significant, s)};
}

Outcome null_calibration() {
  Stopwatch sw;
  int total = 0;
  int scales = 0;
  std::string per_rep;
  for (int rep = 0; rep < 20; ++rep) {
    // Each replicate is a full 40-subject eyes-closed occipital panel; the
    // fifth-vs-first test only reads that panel.
    pipeline::ExperimentConfig cfg;
    cfg.ce.habituation_decay = 1.0;
    cfg.oe.habituation_decay = 1.0;
    cfg.seed = 1000 + static_cast<std::uint64_t>(rep);
    cfg.channels = {{"Oz", 1.0}};
    pipeline::ExperimentResult r;
    r.method = "mife";
    r.scales = cfg.method_cfg.scales;
    r.n_subjects = cfg.n_subjects;
    r.n_stimuli = cfg.ce.n_stimuli;
    r.seed = cfg.seed;
    pipeline::ConditionResult c;
    c.eyes = pipeline::Eyes::ce;
    c.channel = "Oz";
    for (int s = 0; s < cfg.n_subjects; ++s) {
      const EpochSet set = pipeline::prepare_epochs(pipeline::subject_protocol(cfg, s, pipeline::Eyes::ce, 0),
                                                    cfg.preprocess);
      c.per_subject.push_back(pipeline::run_condition(set, pipeline::MethodId::mife, cfg.method_cfg));
    }
    r.conditions.push_back(std::move(c));
    pipeline::compute_statistics(r, cfg.alpha);
    const int sig = summarize(r.conditions[0]).significant;
    total += sig;
    scales += static_cast<int>(r.scales.size());
    per_rep += std::to_string(sig) + (rep < 19 ? "," : "");
  }
  const double frac = static_cast<double>(total) / scales;
  return {frac <= 0.05, fmt("%d of %d replicate-scales significant (%.2f%%), per replicate [%s], %.0f s", total, scales,
                            100.0 * frac, per_rep.c_str(), sw.seconds())};
}

Outcome stats_fixtures() {
  std::vector<std::string> failures;
  const std::vector<double> d{1, 2, 3, 4, 5};
  const auto t = stats::paired_t(d, std::vector<double>(5, 0.0));
  if (std::abs(t.statistic - 4.2426) > 1e-4 || std::abs(t.p_raw - 0.0132) > 1e-3) failures.push_back("paired t");

  const auto a = stats::one_way_anova({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  // F(2, 6) upper tail at 3 has the closed form (1 + f/3)^-3 = 1/8.
  if (a.statistic != 3.0 || std::abs(a.p_raw - 0.125) > 1e-3) failures.push_back("anova");

  const auto fdr = stats::fdr_bh(std::vector<double>{0.005, 0.009, 0.04, 0.06, 0.2}, 0.05);
  if (fdr.reject != std::vector<bool>{true, true, false, false, false}) failures.push_back("bh");

  const std::vector<double> q{-1.2815515655446004, -0.5244005127080409, 0.0, 0.5244005127080407,
                              1.2815515655446004};
  const auto ks = stats::ks_normality(q, false);
  if (std::abs(ks.statistic - 0.1) > 1e-12) failures.push_back("ks");

  std::string detail = fmt("t = %.4f p = %.4f, F = %.4f p = %.4f, BH rejects %d, K-S D = %.6f", t.statistic,
                           t.p_raw, a.statistic, a.p_raw,
                           static_cast<int>(std::count(fdr.reject.begin(), fdr.reject.end(), true)), ks.statistic);
  for (const auto& f : failures) detail += "; failed " + f;
  return {failures.empty(), detail};
}

Outcome cli_determinism(const std::string& cli) {
  Stopwatch sw;
  const fs::path root = fs::temp_directory_path() / ("mife_accept_" + std::to_string(std::random_device{}()));
  auto run = [&](int workers) {
    const fs::path out = root / ("w" + std::to_string(workers));
    const std::string cmd = cli + " experiment --seed 7 --subjects 4 --method mife --workers " +
                            std::to_string(workers) + " --out " + out.string() + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return std::pair{rc, out / "experiment.json"};
  };
  const auto [rc1, j1] = run(1);
  const auto [rc8, j8] = run(8);
  bool same = false;
  std::size_t bytes = 0;
  if (rc1 == 0 && rc8 == 0) {
    const std::string a = io::read_text(j1);
    same = a == io::read_text(j8);
    bytes = a.size();
  }
  fs::remove_all(root);
  return {same, fmt("exit codes %d/%d, %zu-byte experiment.json %s at workers 1 and 8, %.0f s", rc1, rc8, bytes,
                    same ? "identical" : "differs", sw.seconds())};
}

Outcome mife_speed() {
  const TimeSeries x = generate_noise(NoiseKind::pink, 2500, 250.0, 42);
  const pipeline::MethodConfig cfg;
  Stopwatch sw;
  const auto p = pipeline::compute_profile(x, pipeline::MethodId::mife, cfg);
  const double s = sw.seconds();
  return {s < 2.0 && p.size() == 20, fmt("20-scale profile in %.3f s, %s", s,
                                         p.all_defined() ? "all scales defined" : "some scales undefined")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  std::string cli = MIFE_CLI_PATH;
  app.add_option("--only", only, "Criteria to run (1-9); default all")->check(CLI::Range(1, 9));
  app.add_option("--cli", cli, "Path to the mife executable");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"kernel-oracle equivalence", kernel_oracles},
      {"EMD completeness", emd_completeness},
      {"coarse-grain exactness", coarse_grain_exact},
      {"white vs 1/f noise benchmark", noise_benchmark},
      {"synthetic habituation", habituation},
      {"null calibration", null_calibration},
      {"statistics fixtures", stats_fixtures},
      {"determinism across worker counts", [&] { return cli_determinism(cli); }},
      {"MIFE profile speed", mife_speed},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

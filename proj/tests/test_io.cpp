#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "mife/error.hpp"
#include "mife/io.hpp"
#include "oracles.hpp"

using namespace mife;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mife_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::invalid_argument;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("number formatting") {
    CHECK(io::format_number(0.1) == "0.1");
    CHECK(io::format_number(1.0 / 3.0) == "0.333333333333");
    CHECK(io::format_number(NAN) == "nan");
    CHECK(io::format_number(INFINITY) == "inf");
    CHECK(io::format_number(-INFINITY) == "-inf");
    CHECK(io::round12(1.0 / 3.0) == 0.333333333333);
  }

  TEST_CASE("series round trip with sidecar") {
    TempDir tmp;
    const TimeSeries x(oracle::gaussian(100, 2), 500.0, "Oz");
    const fs::path csv = tmp.path / "x.csv";
    io::write_series(csv, x);
    CHECK(fs::exists(io::sidecar_path(csv)));
    const TimeSeries y = io::read_series(csv);
    CHECK(y.fs() == 500.0);
    CHECK(y.label() == "Oz");
    REQUIRE(y.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == io::round12(x[i]));
  }

  TEST_CASE("malformed CSV names the line") {
    TempDir tmp;
    const fs::path csv = tmp.path / "bad.csv";
    io::write_text(csv, "value\n1.0\nabc\n");
    try {
      io::read_value_csv(csv);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse_error);
      CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    CHECK(kind_of([&] { io::read_value_csv(tmp.path / "missing.csv"); }) == ErrorKind::io_error);
  }

  TEST_CASE("epoch set round trip") {
    TempDir tmp;
    ProtocolSpec spec;
    spec.n_stimuli = 2;
    spec.stim_dur_s = 1.0;
    spec.gap_dur_s = 1.0;
    spec.baseline_dur_s = 2.0;
    spec.n_baseline_epochs = 2;
    const EpochSet set = generate_ssvep_protocol(spec);
    io::write_epoch_set(tmp.path / "ep", set, "Oz");
    CHECK(fs::exists(tmp.path / "ep" / "baseline_1.csv"));
    CHECK(fs::exists(tmp.path / "ep" / "stim_2.csv"));
    const EpochSet back = io::read_epoch_set(tmp.path / "ep");
    CHECK(back.baseline_epochs.size() == 2);
    CHECK(back.stimulus_epochs.size() == 2);
    CHECK(back.fs() == 250.0);
    CHECK(back.stimulus_epochs[1].size() == set.stimulus_epochs[1].size());
    // A single epoch falls back to the directory metadata.
    CHECK(io::read_series(tmp.path / "ep" / "stim_1.csv").fs() == 250.0);
  }

  TEST_CASE("profile round trip keeps undefined values") {
    TempDir tmp;
    const entropy::EntropyProfile p{"mse", entropy::ScaleRange(1, 3), {0.5, std::nullopt, 1.25}};
    io::write_profile_csv(tmp.path / "p.csv", p);
    const entropy::EntropyProfile q = io::read_profile_csv(tmp.path / "p.csv", "mse");
    CHECK(q == p);
  }

  TEST_CASE("experiment JSON round trip") {
    pipeline::ExperimentConfig cfg;
    for (ProtocolSpec* p : {&cfg.ce, &cfg.oe}) {
      p->n_stimuli = 2;
      p->stim_dur_s = 5.0;
      p->gap_dur_s = 2.0;
      p->baseline_dur_s = 16.0;
      p->n_baseline_epochs = 1;
    }
    cfg.n_subjects = 2;
    cfg.method_cfg.scales = entropy::ScaleRange(1, 2);
    const pipeline::ExperimentResult r = pipeline::run_experiment(cfg, pipeline::MethodId::mfe);
    const std::string text = io::experiment_to_json(r);
    pipeline::ExperimentResult back = io::experiment_from_json(text);
    CHECK(back.method == "mfe");
    CHECK(back.n_subjects == 2);
    CHECK(back.scales == r.scales);
    CHECK(io::experiment_to_json(back) == text);
    pipeline::compute_statistics(back);
    CHECK(io::experiment_to_json(back) == io::experiment_to_json(io::experiment_from_json(text)));

    TempDir tmp;
    const auto figs = io::write_figure_csvs(tmp.path, r);
    CHECK(figs.size() == 6);
    CHECK(fs::exists(tmp.path / "fig3A.csv"));
    CHECK(fs::exists(tmp.path / "fig4C.csv"));
    io::write_stats_csv(tmp.path / "stats.csv", r);
    CHECK(io::read_text(tmp.path / "stats.csv").rfind("scale,test,statistic,p_raw,p_fdr,reject\n", 0) == 0);
    CHECK(kind_of([] { io::experiment_from_json("{"); }) == ErrorKind::parse_error);
  }
}

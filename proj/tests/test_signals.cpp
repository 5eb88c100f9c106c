#include <doctest.h>

#include <cmath>

#include "mife/error.hpp"
#include "mife/numeric.hpp"
#include "mife/signals.hpp"
#include "oracles.hpp"

using namespace mife;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::invalid_argument;
}

std::vector<double> interior(const TimeSeries& x, std::size_t margin) {
  return {x.values().begin() + static_cast<long>(margin), x.values().end() - static_cast<long>(margin)};
}

}  // namespace

TEST_SUITE("signals") {
  TEST_CASE("time series rejects invalid construction") {
    CHECK(kind_of([] { TimeSeries({}, 250.0); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([] { TimeSeries({1.0}, 0.0); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([] { TimeSeries({1.0, NAN}, 250.0); }) == ErrorKind::invalid_argument);
    const TimeSeries ok({1.0, 2.0}, 250.0, "Oz");
    CHECK(ok.label() == "Oz");
    CHECK(ok.duration_s() == doctest::Approx(2.0 / 250.0));
  }

  TEST_CASE("white noise is standard Gaussian") {
    const TimeSeries x = generate_noise(NoiseKind::white, 10000, 250.0, 1);
    CHECK(std::abs(mean(x.samples())) < 0.05);
    const double sd = sample_sd(x.samples());
    CHECK(sd > 0.95);
    CHECK(sd < 1.05);
  }

  TEST_CASE("pink noise has a 1/f periodogram slope") {
    const TimeSeries x = generate_noise(NoiseKind::pink, 16384, 250.0, 1);
    const std::vector<double> p = oracle::periodogram(x.values());
    std::vector<double> lf;
    std::vector<double> lp;
    for (std::size_t k = 1; k < p.size(); ++k) {
      lf.push_back(std::log10(static_cast<double>(k)));
      lp.push_back(std::log10(p[k]));
    }
    const double s = oracle::slope(lf, lp);
    CHECK(s > -1.3);
    CHECK(s < -0.7);
    CHECK(population_sd(x.samples()) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("noise needs two samples and is deterministic") {
    CHECK(kind_of([] { generate_noise(NoiseKind::white, 1, 250.0, 0); }) == ErrorKind::invalid_argument);
    CHECK(generate_noise(NoiseKind::pink, 4096, 250.0, 9) == generate_noise(NoiseKind::pink, 4096, 250.0, 9));
    CHECK(generate_noise(NoiseKind::white, 64, 250.0, 9) != generate_noise(NoiseKind::white, 64, 250.0, 10));
  }

  TEST_CASE("default protocol has five 2500-sample stimulus epochs") {
    ProtocolSpec spec;
    spec.seed = 3;
    const EpochSet set = generate_ssvep_protocol(spec);
    REQUIRE(set.stimulus_epochs.size() == 5);
    for (const auto& e : set.stimulus_epochs) CHECK(e.size() == 2500);
    REQUIRE(set.baseline_epochs.size() == 3);
    for (const auto& e : set.baseline_epochs) CHECK(e.size() == 15000);
    CHECK(set.fs() == 250.0);
  }

  TEST_CASE("habituation lowers flicker power across stimuli") {
    ProtocolSpec spec;
    spec.seed = 11;
    spec.habituation_decay = 0.6;
    const EpochSet set = generate_ssvep_protocol(spec);
    double previous = INFINITY;
    for (const auto& e : set.stimulus_epochs) {
      const double p = oracle::tone_power(e.values(), 250.0, spec.flicker_hz);
      CHECK(p < previous);
      previous = p;
    }
  }

  TEST_CASE("zero evoked amplitude leaves stimulus epochs as noise") {
    ProtocolSpec spec;
    spec.seed = 5;
    spec.snr0 = 0.0;
    spec.habituation_decay = 1.0;
    spec.noise_kind = NoiseKind::white;
    const EpochSet set = generate_ssvep_protocol(spec);
    for (const auto& e : set.stimulus_epochs) {
      CHECK(std::abs(mean(e.samples())) < 0.1);
      CHECK(sample_sd(e.samples()) == doctest::Approx(1.0).epsilon(0.05));
      // Flicker bin power of white noise is exponential with mean 1.
      CHECK(oracle::tone_power(e.values(), 250.0, 15.0) < 15.0);
    }
  }

  TEST_CASE("protocol validation") {
    ProtocolSpec spec;
    spec.habituation_decay = 0.0;
    CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::invalid_argument);
    spec = {};
    spec.n_stimuli = 0;
    CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::invalid_argument);
    spec = {};
    spec.gap_dur_s = -1.0;
    CHECK(kind_of([&] { spec.validate(); }) == ErrorKind::invalid_argument);
  }

  TEST_CASE("highpass removes DC") {
    const TimeSeries x(std::vector<double>(5000, 5.0), 250.0);
    const TimeSeries y = fir_filter(x, FilterKind::highpass, 1.0);
    REQUIRE(y.size() == x.size());
    for (double v : interior(y, 1000)) CHECK(std::abs(v) < 0.01 * 5.0);
  }

  TEST_CASE("lowpass attenuates 50 Hz by more than 40 dB and passes 5 Hz") {
    const TimeSeries hi(oracle::tone(5000, 250.0, 50.0), 250.0);
    const TimeSeries lo(oracle::tone(5000, 250.0, 5.0), 250.0);
    const TimeSeries yh = fir_filter(hi, FilterKind::lowpass, 30.0);
    const TimeSeries yl = fir_filter(lo, FilterKind::lowpass, 30.0);
    const double att = 20.0 * std::log10(oracle::rms(interior(yh, 500)) / oracle::rms(interior(hi, 500)));
    CHECK(att < -40.0);
    const double pass = oracle::rms(interior(yl, 500)) / oracle::rms(interior(lo, 500));
    CHECK(pass == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("filter errors") {
    const TimeSeries x(oracle::tone(500, 250.0, 5.0), 250.0);
    CHECK(kind_of([&] { fir_filter(x, FilterKind::lowpass, 0.0); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([&] { fir_filter(x, FilterKind::lowpass, 125.0); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([&] { fir_filter(x, FilterKind::highpass, 1.0); }) == ErrorKind::signal_too_short);
  }

  TEST_CASE("filtering is linear") {
    const auto a = oracle::gaussian(3000, 1);
    const auto b = oracle::gaussian(3000, 2);
    std::vector<double> mix(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) mix[i] = 2.5 * a[i] - 0.75 * b[i];
    const auto fa = fir_filter(TimeSeries(a, 250.0), FilterKind::lowpass, 30.0);
    const auto fb = fir_filter(TimeSeries(b, 250.0), FilterKind::lowpass, 30.0);
    const auto fm = fir_filter(TimeSeries(mix, 250.0), FilterKind::lowpass, 30.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double expect = 2.5 * fa[i] - 0.75 * fb[i];
      worst = std::max(worst, std::abs(fm[i] - expect) / (std::abs(expect) + 1.0));
    }
    CHECK(worst < 1e-9);
  }

  TEST_CASE("decimate") {
    const TimeSeries x(oracle::gaussian(5000, 4), 500.0);
    const TimeSeries y = decimate(x, 2);
    CHECK(y.fs() == 250.0);
    CHECK(y.size() == 2500);
    CHECK(decimate(x, 1) == x);
    CHECK(kind_of([&] { decimate(x, 0); }) == ErrorKind::invalid_argument);

    const TimeSeries t(oracle::tone(5000, 500.0, 40.0), 500.0);
    const TimeSeries d = decimate(t, 2);
    CHECK(oracle::rms(interior(d, 300)) == doctest::Approx(oracle::rms(interior(t, 600))).epsilon(0.05));
  }

  TEST_CASE("zscore") {
    const TimeSeries z = zscore(TimeSeries({1.0, 2.0, 3.0}, 1.0));
    CHECK(z[0] == doctest::Approx(-1.2247448714));
    CHECK(z[1] == doctest::Approx(0.0));
    CHECK(z[2] == doctest::Approx(1.2247448714));
    CHECK(kind_of([] { zscore(TimeSeries({2.0, 2.0, 2.0}, 1.0)); }) == ErrorKind::degenerate_signal);

    const TimeSeries x(oracle::gaussian(1000, 8, 3.0), 250.0);
    const TimeSeries a = zscore(x);
    CHECK(std::abs(mean(a.samples())) < 1e-12);
    CHECK(std::abs(population_sd(a.samples()) - 1.0) < 1e-12);
    const TimeSeries b = zscore(a);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  }

  TEST_CASE("artifact rejection") {
    const TimeSeries clean(oracle::tone(2500, 250.0, 10.0), 250.0);
    const ArtifactRejection same = reject_artifacts(clean, 100.0);
    CHECK(same.clean == clean);
    CHECK(same.fraction_removed == 0.0);

    std::vector<double> spiky = clean.values();
    spiky[1250] = 1000.0;
    const ArtifactRejection r = reject_artifacts(TimeSeries(spiky, 250.0), 100.0);
    CHECK(r.clean.size() <= clean.size() - 250);
    CHECK(r.fraction_removed > 0.0);

    const TimeSeries loud(std::vector<double>(500, 500.0), 250.0);
    CHECK(kind_of([&] { reject_artifacts(loud, 100.0); }) == ErrorKind::signal_too_short);
    CHECK(kind_of([&] { reject_artifacts(clean, 0.0); }) == ErrorKind::invalid_argument);
  }

  TEST_CASE("preprocess chain") {
    PreprocessConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.hp_cutoff = 40.0;
    CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::invalid_argument);

    const TimeSeries x(oracle::gaussian(20000, 12), 500.0);
    const TimeSeries y = preprocess(x, PreprocessConfig{});
    CHECK(y.fs() == 250.0);
    CHECK(y.size() == 10000);
  }

  TEST_CASE("seed derivation is deterministic and stream-sensitive") {
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) != derive_seed(2, 2));
  }
}

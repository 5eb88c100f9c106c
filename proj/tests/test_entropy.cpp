#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "mife/entropy.hpp"
#include "mife/error.hpp"
#include "mife/numeric.hpp"
#include "mife/signals.hpp"
#include "oracles.hpp"

using namespace mife;
using namespace mife::entropy;

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

std::vector<double> random_walk(std::size_t n, std::uint64_t seed) {
  std::vector<double> x = oracle::gaussian(n, seed);
  for (std::size_t i = 1; i < n; ++i) x[i] += x[i - 1];
  return x;
}

}  // namespace

TEST_SUITE("entropy") {
  TEST_CASE("coarse graining by hand") {
    CHECK(coarse_grain(std::vector<double>{1, 2, 3, 4, 5, 6}, 2) == std::vector<double>{1.5, 3.5, 5.5});
    CHECK(coarse_grain(std::vector<double>{1, 2, 3, 4, 5, 6, 7}, 3) == std::vector<double>{2, 5});
    const auto x = oracle::gaussian(101, 3);
    CHECK(coarse_grain(x, 1) == x);
    for (int tau = 1; tau <= 20; ++tau) CHECK(coarse_grain(x, tau) == oracle::coarse_grain(x, tau));
    CHECK(kind_of([] { coarse_grain(std::vector<double>{1, 2}, 3); }) == ErrorKind::signal_too_short);
  }

  TEST_CASE("refined scaling") {
    const auto x = oracle::gaussian(4096, 21);
    CHECK(refined_scale(x, 1) == x);
    CHECK(refined_scale(x, 3).size() == 4096 / 3);
    CHECK(kind_of([&] { refined_scale(std::vector<double>(31, 1.0), 4); }) == ErrorKind::signal_too_short);

    // A tone at 0.8 of Nyquist lies far above the tau = 4 cutoff and must
    // come out at least 20 dB below a passband tone.
    const auto hi = oracle::tone(4096, 1.0, 0.4);
    const auto lo = oracle::tone(4096, 1.0, 0.02);
    const auto yh = refined_scale(hi, 4);
    const auto yl = refined_scale(lo, 4);
    std::vector<double> h(yh.begin() + 100, yh.end() - 100);
    std::vector<double> l(yl.begin() + 100, yl.end() - 100);
    CHECK(20.0 * std::log10(oracle::rms(h) / oracle::rms(l)) < -20.0);
  }

  TEST_CASE("refined scaling keeps only the passband share of white noise") {
    // Unit-variance white noise spreads its power evenly; a cutoff at 1/8 of
    // the band leaves about an eighth once the stop band is suppressed,
    // whereas plain decimation keeps all of it through aliasing.
    const auto x = oracle::gaussian(16384, 5);
    const auto y = refined_scale(x, 4);
    const double kept = oracle::rms(y) * oracle::rms(y);
    CHECK(kept > 0.1);
    CHECK(kept < 0.15);
  }

  TEST_CASE("fuzzy entropy matches the direct oracle") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t n = 60 + rng() % 200;
      const auto x = trial % 2 ? oracle::gaussian(n, trial) : random_walk(n, trial);
      for (int m : {1, 2, 3}) {
        for (double nexp : {1.0, 2.0, 3.0}) {
          const double got = fuzzy_entropy(x, {m, 0.2, nexp});
          CHECK(std::abs(got - oracle::fuzzy_entropy(x, m, 0.2, nexp)) < 1e-10);
        }
      }
    }
  }

  TEST_CASE("fuzzy entropy edge cases") {
    std::vector<double> ramp(200);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
    CHECK(std::abs(fuzzy_entropy(ramp, {})) < 1e-12);
    CHECK(fuzzy_entropy(oracle::gaussian(300, 1), {}) >= -1e-12);
    CHECK(kind_of([] { fuzzy_entropy(std::vector<double>{1, 2, 3}, {}); }) == ErrorKind::signal_too_short);
    CHECK(kind_of([] { fuzzy_entropy(std::vector<double>(50, 1.0), {}); }) == ErrorKind::degenerate_signal);
    CHECK(kind_of([] { FuzzyParams{0, 0.15, 2}.validate(); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([] { FuzzyParams{2, 0.0, 2}.validate(); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([] { FuzzyParams{2, 0.15, 0}.validate(); }) == ErrorKind::invalid_argument);
  }

  TEST_CASE("fuzzy entropy with a linear membership exponent is invariant to offset and scale") {
    const auto x = oracle::gaussian(400, 9);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 3.0 * x[i] + 7.0;
    CHECK(fuzzy_entropy(y, {2, 0.15, 1.0}) == doctest::Approx(fuzzy_entropy(x, {2, 0.15, 1.0})).epsilon(1e-9));
  }

  TEST_CASE("sample entropy matches the direct oracle") {
    for (int trial = 0; trial < 10; ++trial) {
      auto x = oracle::gaussian(80 + 20 * trial, 100 + trial);
      if (trial % 3 == 0) {
        for (double& v : x) v = std::round(v * 2.0);
      }
      for (int m : {1, 2, 3}) {
        const auto got = sample_entropy(x, {m, 0.2});
        const auto want = oracle::sample_entropy(x, m, 0.2);
        REQUIRE(got.has_value() == want.has_value());
        if (got) CHECK(std::abs(*got - *want) < 1e-10);
      }
    }
  }

  TEST_CASE("sample entropy undefined without matches") {
    std::vector<double> x{0, 10, 20, 30, 40, 50, 60, 70};
    CHECK_FALSE(sample_entropy(x, {2, 0.01}).has_value());
  }

  TEST_CASE("approximate entropy matches the direct oracle") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = trial % 2 ? oracle::gaussian(70 + 30 * trial, trial) : random_walk(70 + 30 * trial, trial);
      for (int m : {1, 2, 3}) {
        CHECK(std::abs(approximate_entropy(x, {m, 0.2}) - oracle::approximate_entropy(x, m, 0.2)) < 1e-10);
      }
    }
  }

  TEST_CASE("dispersion entropy") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = oracle::gaussian(300 + 10 * trial, 50 + trial);
      for (int c : {3, 4, 6}) {
        CHECK(std::abs(dispersion_entropy(x, {2, c, 1}) - oracle::dispersion_entropy(x, 2, c, 1)) < 1e-10);
      }
      CHECK(std::abs(dispersion_entropy(x, {3, 4, 2}) - oracle::dispersion_entropy(x, 3, 4, 2)) < 1e-10);
    }
    const double h = dispersion_entropy(oracle::gaussian(5000, 1), {});
    CHECK(h > 0.9);
    CHECK(h <= 1.0);
    CHECK(kind_of([] { dispersion_entropy(oracle::gaussian(30, 1), {2, 6, 1}); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([] { DispersionParams{2, 1, 1}.validate(); }) == ErrorKind::invalid_argument);
  }

  TEST_CASE("scale ranges") {
    CHECK(ScaleRange().size() == 20);
    CHECK(ScaleRange::parse("1..3").values() == std::vector<int>{1, 2, 3});
    CHECK(ScaleRange::parse("1,2,5").values() == std::vector<int>{1, 2, 5});
    CHECK(kind_of([] { ScaleRange::parse("3..1"); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([] { ScaleRange::parse("0..3"); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([] { ScaleRange::parse("2,2"); }) == ErrorKind::invalid_argument);
    CHECK(kind_of([] { ScaleRange::parse("a"); }) == ErrorKind::invalid_argument);
  }

  TEST_CASE("multiscale profile") {
    const auto x = oracle::gaussian(1000, 77);
    KernelSpec k;
    const EntropyProfile p = multiscale_profile(x, ScaleRange(1, 5), k, Scaling::coarse);
    REQUIRE(p.size() == 5);
    for (int tau = 1; tau <= 5; ++tau) {
      CHECK(*p.values[static_cast<std::size_t>(tau - 1)] ==
            doctest::Approx(oracle::fuzzy_entropy(oracle::coarse_grain(x, tau), 2, 0.15, 2.0)).epsilon(1e-10));
    }
    CHECK(p.method == "fuzzy");

    // Scales too coarse for the kernel become undefined instead of failing.
    const EntropyProfile short_profile = multiscale_profile(oracle::gaussian(40, 1), ScaleRange(1, 20), k,
                                                            Scaling::coarse, "mfe");
    CHECK(short_profile.values.front().has_value());
    CHECK_FALSE(short_profile.values.back().has_value());
    CHECK_FALSE(short_profile.all_defined());

    k.tolerance = ToleranceMode::fixed;
    k.kind = Kernel::sample;
    const EntropyProfile fixed = multiscale_profile(x, ScaleRange(1, 3), k, Scaling::coarse);
    const double r_abs = 0.15 * population_sd(x);
    CHECK(*fixed.values[2] == doctest::Approx(*sample_entropy_abs(coarse_grain(x, 3), 2, r_abs)));
  }

  TEST_CASE("fuzzy profile of a 2500-sample epoch is fast") {
    const auto x = oracle::gaussian(2500, 1);
    KernelSpec k;
    const auto t0 = std::chrono::steady_clock::now();
    const EntropyProfile p = multiscale_profile(x, ScaleRange(), k, Scaling::coarse);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(p.all_defined());
    CHECK(s < 2.0);
  }
}

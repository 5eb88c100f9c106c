#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mife::entropy {

// Tolerances `r` are fractions of the population SD of the series the kernel
// is applied to; all entropies are in nats.

struct FuzzyParams {
  int m = 2;
  double r = 0.15;
  // Gradient exponent of the membership function exp(-d^n / r).
  double n = 2.0;

  void validate() const;
};

struct SampleParams {
  int m = 2;
  double r = 0.15;

  void validate() const;
};

struct DispersionParams {
  int m = 2;
  int c = 6;
  int delay = 1;

  void validate() const;
};

class ScaleRange {
 public:
  ScaleRange() : ScaleRange(1, 20) {}
  ScaleRange(int first, int last);
  explicit ScaleRange(std::vector<int> scales);

  // "a..b" or a comma-separated list such as "1,2,5".
  static ScaleRange parse(const std::string& text);

  const std::vector<int>& values() const noexcept { return scales_; }
  std::size_t size() const noexcept { return scales_.size(); }
  int max() const noexcept { return scales_.back(); }
  int operator[](std::size_t i) const noexcept { return scales_[i]; }

  friend bool operator==(const ScaleRange&, const ScaleRange&) = default;

 private:
  std::vector<int> scales_;
};

// Averages non-overlapping windows of length tau; output length floor(N/tau).
std::vector<double> coarse_grain(std::span<const double> x, int tau);

// Order-6 Butterworth lowpass at 0.5/tau of Nyquist (forward-backward), then
// every tau-th sample; output length floor(N/tau). tau = 1 is the identity.
std::vector<double> refined_scale(std::span<const double> x, int tau);

// Fuzzy entropy with baseline-removed templates, Chebyshev distance and
// exponential membership exp(-d^n / r_abs), r_abs = p.r * SD(x). Both template
// lengths use N - m templates.
double fuzzy_entropy(std::span<const double> x, const FuzzyParams& p);
// Same kernel with an already resolved absolute tolerance.
double fuzzy_entropy_abs(std::span<const double> x, int m, double r_abs, double n);

// -ln(A/B) over N - m templates, self-matches excluded. nullopt when A or B
// is zero.
std::optional<double> sample_entropy(std::span<const double> x, const SampleParams& p);
std::optional<double> sample_entropy_abs(std::span<const double> x, int m, double r_abs);

// Classic formulation, self-matches included.
double approximate_entropy(std::span<const double> x, const SampleParams& p);
double approximate_entropy_abs(std::span<const double> x, int m, double r_abs);

// Normalized dispersion entropy in [0, 1].
double dispersion_entropy(std::span<const double> x, const DispersionParams& p);

enum class Kernel { fuzzy, sample, approximate, dispersion };
enum class Scaling { coarse, refined };

// Whether the tolerance is re-resolved against each scaled series, or fixed
// from the SD of the unscaled input.
enum class ToleranceMode { per_scale, fixed };

struct KernelSpec {
  Kernel kind = Kernel::fuzzy;
  FuzzyParams fuzzy;
  SampleParams sample;
  DispersionParams dispersion;
  ToleranceMode tolerance = ToleranceMode::per_scale;
};

std::string to_string(Kernel k);

struct EntropyProfile {
  std::string method;
  ScaleRange scales;
  // nullopt marks an undefined value at that scale.
  std::vector<std::optional<double>> values;

  std::size_t size() const noexcept { return values.size(); }
  bool all_defined() const noexcept;
  friend bool operator==(const EntropyProfile&, const EntropyProfile&) = default;
};

// Applies `kernel` to the scaled series at every scale. Failures at a single
// scale become undefined entries instead of aborting the profile.
EntropyProfile multiscale_profile(std::span<const double> x, const ScaleRange& scales, const KernelSpec& kernel,
                                  Scaling scaling, std::string method = {});

}  // namespace mife::entropy

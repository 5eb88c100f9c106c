#include "mife/numeric.hpp"

#include <cmath>

namespace mife {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

namespace {

double centered_ss(std::span<const double> x) {
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return ss;
}

}  // namespace

double population_sd(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::sqrt(centered_ss(x) / static_cast<double>(x.size()));
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return std::sqrt(centered_ss(x) / static_cast<double>(x.size() - 1));
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace mife

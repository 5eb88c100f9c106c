#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mife {

double mean(std::span<const double> x);

// Population standard deviation (divisor N). Used for z-scoring and for
// resolving entropy tolerances.
double population_sd(std::span<const double> x);

// Sample standard deviation (divisor N - 1). Used inside hypothesis tests.
double sample_sd(std::span<const double> x);

double rms(std::span<const double> x);

// SplitMix64 finalizer; mixes a seed with a stream identifier so that
// independent tasks get decorrelated, reproducible generator seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace mife

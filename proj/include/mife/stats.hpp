#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mife::stats {

// Tests use the sample SD (divisor n - 1). NaN entries mark missing data.

struct TestResult {
  double statistic = 0.0;
  double df1 = 0.0;
  // Second degrees-of-freedom component; 0 for single-df tests.
  double df2 = 0.0;
  double p_raw = 1.0;
  std::optional<double> p_adjusted;
  bool reject = false;

  friend bool operator==(const TestResult&, const TestResult&) = default;
};

enum class Correction { none, bh_fdr };

std::string to_string(Correction c);

struct StatReport {
  std::string family;
  double alpha = 0.05;
  Correction correction = Correction::none;
  // One entry per scale.
  std::vector<TestResult> entries;

  friend bool operator==(const StatReport&, const StatReport&) = default;
};

// One-sample Kolmogorov-Smirnov test against the standard normal, p from the
// asymptotic Kolmogorov distribution with the effective-n correction.
TestResult ks_normality(std::span<const double> x, bool standardize = true, double alpha = 0.05);

// Two-sided paired t-test on x - y; pairs with a NaN on either side are
// dropped.
TestResult paired_t(std::span<const double> x, std::span<const double> y, double alpha = 0.05);

// Two-sample t-test with pooled variance.
TestResult unpaired_t(std::span<const double> x, std::span<const double> y, double alpha = 0.05);

TestResult one_way_anova(const std::vector<std::vector<double>>& groups, double alpha = 0.05);

// Tukey-Kramer comparison of groups pair.first and pair.second (0-based).
TestResult tukey_hsd(const std::vector<std::vector<double>>& groups, std::pair<std::size_t, std::size_t> pair,
                     double alpha = 0.05);

struct FdrResult {
  std::vector<double> adjusted;
  std::vector<bool> reject;
};

// Benjamini-Hochberg step-up. NaN p-values are left out of the family and come
// back as NaN, not rejected.
FdrResult fdr_bh(std::span<const double> p, double q = 0.05);

// Fills p_adjusted and reject of every entry from a BH pass over the family.
void apply_fdr(StatReport& report);

}  // namespace mife::stats

#include "mife/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mife/error.hpp"
#include "mife/numeric.hpp"
#include "mife/special.hpp"

namespace mife::stats {

std::string to_string(Correction c) { return c == Correction::bh_fdr ? "BH-FDR" : "none"; }

namespace {

std::vector<double> finite_only(std::span<const double> x) {
  std::vector<double> out;
  out.reserve(x.size());
  for (double v : x) {
    if (!std::isnan(v)) out.push_back(v);
  }
  return out;
}

struct GroupSummary {
  std::vector<double> means;
  std::vector<std::size_t> counts;
  double ss_within = 0.0;
  double ss_between = 0.0;
  std::size_t total = 0;
};

GroupSummary summarize(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) {
    throw Error(ErrorKind::too_few_groups, "need at least 2 groups, got " + std::to_string(groups.size()));
  }
  GroupSummary s;
  std::vector<std::vector<double>> clean;
  clean.reserve(groups.size());
  for (const auto& g : groups) {
    clean.push_back(finite_only(g));
    if (clean.back().size() < 2) {
      throw Error(ErrorKind::too_few_samples, "every group needs at least 2 observations");
    }
  }
  double grand_sum = 0.0;
  for (const auto& g : clean) {
    s.means.push_back(mean(g));
    s.counts.push_back(g.size());
    s.total += g.size();
    grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const double grand = grand_sum / static_cast<double>(s.total);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    for (double v : clean[i]) s.ss_within += (v - s.means[i]) * (v - s.means[i]);
    const double d = s.means[i] - grand;
    s.ss_between += static_cast<double>(s.counts[i]) * d * d;
  }
  return s;
}

}  // namespace

TestResult ks_normality(std::span<const double> x, bool standardize, double alpha) {
  std::vector<double> v = finite_only(x);
  const std::size_t n = v.size();
  if (n < 5) throw Error(ErrorKind::too_few_samples, "K-S test needs at least 5 samples");
  if (standardize) {
    const double mu = mean(v);
    const double sd = sample_sd(v);
    if (!(sd > 0.0)) throw Error(ErrorKind::degenerate_variance, "K-S input has zero variance");
    for (double& e : v) e = (e - mu) / sd;
  }
  std::sort(v.begin(), v.end());
  const double nn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = special::normal_cdf(v[i]);
    d = std::max({d, static_cast<double>(i + 1) / nn - f, f - static_cast<double>(i) / nn});
  }
  const double root = std::sqrt(nn);
  TestResult r;
  r.statistic = d;
  r.df1 = nn;
  r.p_raw = std::clamp(special::kolmogorov_sf((root + 0.12 + 0.11 / root) * d), 0.0, 1.0);
  r.reject = r.p_raw < alpha;
  return r;
}

TestResult paired_t(std::span<const double> x, std::span<const double> y, double alpha) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::invalid_argument, "paired samples differ in length: " + std::to_string(x.size()) +
                                                 " vs " + std::to_string(y.size()));
  }
  std::vector<double> d;
  d.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isnan(x[i]) && !std::isnan(y[i])) d.push_back(x[i] - y[i]);
  }
  if (d.size() < 2) throw Error(ErrorKind::too_few_samples, "paired t-test needs at least 2 complete pairs");
  const double n = static_cast<double>(d.size());
  const double md = mean(d);
  const double sd = sample_sd(d);
  TestResult r;
  r.df1 = n - 1.0;
  if (!(sd > 0.0)) {
    if (md != 0.0) throw Error(ErrorKind::degenerate_variance, "paired differences are constant and nonzero");
    return r;
  }
  r.statistic = md / (sd / std::sqrt(n));
  r.p_raw = special::student_t_two_sided(r.statistic, r.df1);
  r.reject = r.p_raw < alpha;
  return r;
}

TestResult unpaired_t(std::span<const double> x, std::span<const double> y, double alpha) {
  const std::vector<double> a = finite_only(x);
  const std::vector<double> b = finite_only(y);
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorKind::too_few_samples, "each sample needs at least 2 values");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double df = na + nb - 2.0;
  const double sa = sample_sd(a);
  const double sb = sample_sd(b);
  const double pooled = ((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / df;
  const double diff = mean(a) - mean(b);
  TestResult r;
  r.df1 = df;
  if (!(pooled > 0.0)) {
    if (diff != 0.0) throw Error(ErrorKind::degenerate_variance, "both samples are constant and differ");
    return r;
  }
  r.statistic = diff / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  r.p_raw = special::student_t_two_sided(r.statistic, df);
  r.reject = r.p_raw < alpha;
  return r;
}

TestResult one_way_anova(const std::vector<std::vector<double>>& groups, double alpha) {
  const GroupSummary s = summarize(groups);
  const double k = static_cast<double>(s.means.size());
  const double df1 = k - 1.0;
  const double df2 = static_cast<double>(s.total) - k;
  TestResult r;
  r.df1 = df1;
  r.df2 = df2;
  if (s.ss_within == 0.0) {
    if (s.ss_between == 0.0) throw Error(ErrorKind::degenerate_variance, "all observations are identical");
    r.statistic = std::numeric_limits<double>::infinity();
    r.p_raw = 0.0;
    r.reject = true;
    return r;
  }
  r.statistic = (s.ss_between / df1) / (s.ss_within / df2);
  r.p_raw = std::clamp(special::f_sf(r.statistic, df1, df2), 0.0, 1.0);
  r.reject = r.p_raw < alpha;
  return r;
}

TestResult tukey_hsd(const std::vector<std::vector<double>>& groups, std::pair<std::size_t, std::size_t> pair,
                     double alpha) {
  if (pair.first >= groups.size() || pair.second >= groups.size() || pair.first == pair.second) {
    throw Error(ErrorKind::invalid_argument, "Tukey pair must name two distinct existing groups");
  }
  const GroupSummary s = summarize(groups);
  const int k = static_cast<int>(s.means.size());
  const double df = static_cast<double>(s.total) - k;
  const double diff = std::abs(s.means[pair.first] - s.means[pair.second]);
  TestResult r;
  r.df1 = k;
  r.df2 = df;
  if (s.ss_within == 0.0) {
    if (s.ss_between == 0.0) throw Error(ErrorKind::degenerate_variance, "all observations are identical");
    if (diff == 0.0) return r;
    r.statistic = std::numeric_limits<double>::infinity();
    r.p_raw = 0.0;
    r.reject = true;
    return r;
  }
  const double msw = s.ss_within / df;
  const double se = std::sqrt(msw / 2.0 *
                              (1.0 / static_cast<double>(s.counts[pair.first]) +
                               1.0 / static_cast<double>(s.counts[pair.second])));
  r.statistic = diff / se;
  r.p_raw = r.statistic == 0.0 ? 1.0 : std::clamp(special::studentized_range_sf(r.statistic, k, df), 0.0, 1.0);
  r.reject = r.p_raw < alpha;
  return r;
}

FdrResult fdr_bh(std::span<const double> p, double q) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::isnan(p[i])) continue;
    if (p[i] < 0.0 || p[i] > 1.0) {
      throw Error(ErrorKind::invalid_argument, "p-value outside [0, 1]: " + std::to_string(p[i]));
    }
    order.push_back(i);
  }
  FdrResult out;
  out.adjusted.assign(p.size(), std::numeric_limits<double>::quiet_NaN());
  out.reject.assign(p.size(), false);
  const std::size_t m = order.size();
  if (m == 0) return out;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

  std::size_t k_star = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    if (p[order[k - 1]] <= static_cast<double>(k) * q / static_cast<double>(m)) k_star = k;
  }
  double running = 1.0;
  for (std::size_t k = m; k >= 1; --k) {
    const std::size_t idx = order[k - 1];
    running = std::min(running, static_cast<double>(m) * p[idx] / static_cast<double>(k));
    out.adjusted[idx] = running;
    out.reject[idx] = k <= k_star;
  }
  return out;
}

void apply_fdr(StatReport& report) {
  std::vector<double> raw;
  raw.reserve(report.entries.size());
  for (const TestResult& e : report.entries) raw.push_back(e.p_raw);
  const FdrResult f = fdr_bh(raw, report.alpha);
  report.correction = Correction::bh_fdr;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (std::isnan(raw[i])) {
      report.entries[i].p_adjusted.reset();
      report.entries[i].reject = false;
    } else {
      report.entries[i].p_adjusted = f.adjusted[i];
      report.entries[i].reject = f.reject[i];
    }
  }
}

}  // namespace mife::stats

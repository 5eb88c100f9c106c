#include "mife/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "mife/error.hpp"

namespace mife::io {

using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const fs::path& path, std::size_t line) {
  const std::string t = trim(text);
  if (t == "nan" || t == "NaN") return kNaN;
  double v = 0.0;
  const char* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorKind::parse_error,
                path.string() + ":" + std::to_string(line) + ": cannot parse number '" + t + "'");
  }
  return v;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round12(v);
}

json number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

double to_double(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::optional<double> to_optional(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json matrix(const std::vector<std::vector<std::optional<double>>>& m) {
  json out = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& v : row) r.push_back(number(v));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<std::optional<double>>> matrix_from(const json& j) {
  std::vector<std::vector<std::optional<double>>> out;
  for (const auto& row : j) {
    std::vector<std::optional<double>> r;
    for (const auto& v : row) r.push_back(to_optional(v));
    out.push_back(std::move(r));
  }
  return out;
}

json report_json(const stats::StatReport& r) {
  json entries = json::array();
  for (const stats::TestResult& e : r.entries) {
    entries.push_back({{"statistic", number(e.statistic)},
                       {"df1", number(e.df1)},
                       {"df2", number(e.df2)},
                       {"p_raw", number(e.p_raw)},
                       {"p_adjusted", number(e.p_adjusted)},
                       {"reject", e.reject}});
  }
  return {{"family", r.family},
          {"alpha", number(r.alpha)},
          {"correction", stats::to_string(r.correction)},
          {"entries", std::move(entries)}};
}

stats::StatReport report_from(const json& j) {
  stats::StatReport r;
  r.family = j.at("family").get<std::string>();
  r.alpha = j.at("alpha").get<double>();
  r.correction = j.at("correction").get<std::string>() == "none" ? stats::Correction::none : stats::Correction::bh_fdr;
  for (const auto& e : j.at("entries")) {
    stats::TestResult t;
    // Infinite statistics are stored as null, like NaN; a rejected test with a
    // null statistic had an infinite one.
    t.reject = e.at("reject").get<bool>();
    t.statistic = to_double(e.at("statistic"));
    if (std::isnan(t.statistic) && t.reject) t.statistic = std::numeric_limits<double>::infinity();
    t.df1 = to_double(e.at("df1"));
    t.df2 = to_double(e.at("df2"));
    t.p_raw = to_double(e.at("p_raw"));
    t.p_adjusted = to_optional(e.at("p_adjusted"));
    r.entries.push_back(t);
  }
  return r;
}

void ensure_parent(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::io_error, "cannot create directory " + path.parent_path().string());
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double round12(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_number(v).c_str(), nullptr);
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io_error, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> read_value_csv(const fs::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "value") {
    throw Error(ErrorKind::parse_error, path.string() + ":1: expected header 'value'");
  }
  std::vector<double> out;
  out.reserve(lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double v = parse_double(lines[i], path, i + 1);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::parse_error, path.string() + ":" + std::to_string(i + 1) + ": non-finite sample");
    }
    out.push_back(v);
  }
  return out;
}

void write_value_csv(const fs::path& path, std::span<const double> values) {
  std::string text = "value\n";
  for (double v : values) {
    text += format_number(v);
    text += '\n';
  }
  write_text(path, text);
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  return p.replace_extension(".json");
}

namespace {

struct Meta {
  double fs;
  std::string label;
};

Meta read_meta(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse_error, path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("fs") || !j["fs"].is_number()) {
    throw Error(ErrorKind::parse_error, path.string() + ": metadata lacks a numeric 'fs'");
  }
  Meta m{j["fs"].get<double>(), {}};
  if (j.contains("label") && j["label"].is_string()) m.label = j["label"].get<std::string>();
  return m;
}

void write_meta(const fs::path& path, double fs, const std::string& label) {
  json j = {{"fs", round12(fs)}, {"label", label}};
  write_text(path, j.dump(2) + "\n");
}

}  // namespace

TimeSeries read_series(const fs::path& csv, std::optional<double> fallback_fs) {
  std::vector<double> values = read_value_csv(csv);
  fs::path meta = sidecar_path(csv);
  if (!fs::exists(meta) && fs::exists(csv.parent_path() / "meta.json")) meta = csv.parent_path() / "meta.json";
  const Meta m = !fs::exists(meta) && fallback_fs ? Meta{*fallback_fs, {}} : read_meta(meta);
  try {
    return TimeSeries(std::move(values), m.fs, m.label);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_argument) throw Error(ErrorKind::parse_error, csv.string() + ": " + e.what());
    throw;
  }
}

void write_series(const fs::path& csv, const TimeSeries& x) {
  write_value_csv(csv, x.samples());
  write_meta(sidecar_path(csv), x.fs(), x.label());
}

void write_epoch_set(const fs::path& dir, const EpochSet& set, const std::string& label) {
  for (std::size_t k = 0; k < set.baseline_epochs.size(); ++k) {
    write_value_csv(dir / ("baseline_" + std::to_string(k + 1) + ".csv"), set.baseline_epochs[k].samples());
  }
  for (std::size_t i = 0; i < set.stimulus_epochs.size(); ++i) {
    write_value_csv(dir / ("stim_" + std::to_string(i + 1) + ".csv"), set.stimulus_epochs[i].samples());
  }
  write_meta(dir / "meta.json", set.fs(), label);
}

EpochSet read_epoch_set(const fs::path& dir) {
  const Meta m = read_meta(dir / "meta.json");
  EpochSet set;
  for (int k = 1; fs::exists(dir / ("baseline_" + std::to_string(k) + ".csv")); ++k) {
    set.baseline_epochs.emplace_back(read_value_csv(dir / ("baseline_" + std::to_string(k) + ".csv")), m.fs, m.label);
  }
  for (int i = 1; fs::exists(dir / ("stim_" + std::to_string(i) + ".csv")); ++i) {
    set.stimulus_epochs.emplace_back(read_value_csv(dir / ("stim_" + std::to_string(i) + ".csv")), m.fs, m.label);
  }
  if (set.stimulus_epochs.empty()) {
    throw Error(ErrorKind::parse_error, dir.string() + ": no stim_<i>.csv files");
  }
  return set;
}

void write_profile_csv(const fs::path& path, const entropy::EntropyProfile& p) {
  std::string text = "scale,value\n";
  for (std::size_t k = 0; k < p.size(); ++k) {
    text += std::to_string(p.scales[k]) + "," + format_number(p.values[k] ? *p.values[k] : kNaN) + "\n";
  }
  write_text(path, text);
}

entropy::EntropyProfile read_profile_csv(const fs::path& path, const std::string& method) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || trim(lines[0]) != "scale,value") {
    throw Error(ErrorKind::parse_error, path.string() + ":1: expected header 'scale,value'");
  }
  std::vector<int> scales;
  std::vector<std::optional<double>> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto comma = lines[i].find(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::parse_error, path.string() + ":" + std::to_string(i + 1) + ": expected two fields");
    }
    const double s = parse_double(lines[i].substr(0, comma), path, i + 1);
    if (!(s >= 1.0) || s != std::floor(s)) {
      throw Error(ErrorKind::parse_error, path.string() + ":" + std::to_string(i + 1) + ": bad scale");
    }
    scales.push_back(static_cast<int>(s));
    const double v = parse_double(lines[i].substr(comma + 1), path, i + 1);
    values.push_back(std::isnan(v) ? std::nullopt : std::optional<double>(v));
  }
  return {method, entropy::ScaleRange(std::move(scales)), std::move(values)};
}

std::string experiment_to_json(const pipeline::ExperimentResult& r) {
  json conditions = json::object();
  for (const pipeline::ConditionResult& c : r.conditions) {
    json per_subject = json::array();
    json failures = json::array();
    for (const auto& subject : c.per_subject) {
      json curves = json::array();
      json notes = json::array();
      for (const auto& curve : subject) {
        json values = json::array();
        for (const auto& v : curve.rc_values) values.push_back(number(v));
        curves.push_back(std::move(values));
        notes.push_back(curve.failure ? json(*curve.failure) : json(nullptr));
      }
      per_subject.push_back(std::move(curves));
      failures.push_back(std::move(notes));
    }
    json ks = json::array();
    for (const auto& k : c.ks) ks.push_back(report_json(k));
    conditions[pipeline::to_string(c.eyes)][c.channel] = {
        {"per_subject", std::move(per_subject)},
        {"failures", std::move(failures)},
        {"group_mean", matrix(c.group_mean)},
        {"group_sd", matrix(c.group_sd)},
        {"stats",
         {{"anova", report_json(c.anova)}, {"tukey_last_vs_first", report_json(c.tukey_last_vs_first)}, {"ks", ks}}},
    };
  }
  json paired = json::object();
  for (const auto& cmp : r.ce_vs_oe) {
    json reports = json::array();
    for (const auto& p : cmp.paired) reports.push_back(report_json(p));
    paired[cmp.channel] = std::move(reports);
  }
  const json doc = {
      {"method", r.method},
      {"scales", r.scales.values()},
      {"n_subjects", r.n_subjects},
      {"n_stimuli", r.n_stimuli},
      {"seed", r.seed},
      {"conditions", std::move(conditions)},
      {"stats", {{"ce_vs_oe", std::move(paired)}}},
  };
  return doc.dump(1) + "\n";
}

pipeline::ExperimentResult experiment_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    pipeline::ExperimentResult r;
    r.method = j.at("method").get<std::string>();
    r.scales = entropy::ScaleRange(j.at("scales").get<std::vector<int>>());
    r.n_subjects = j.at("n_subjects").get<int>();
    r.n_stimuli = j.at("n_stimuli").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [eyes_name, channels] : j.at("conditions").items()) {
      for (const auto& [channel, c] : channels.items()) {
        pipeline::ConditionResult cond;
        cond.eyes = eyes_name == "CE" ? pipeline::Eyes::ce : pipeline::Eyes::oe;
        cond.channel = channel;
        const json& failures = c.at("failures");
        const json& subjects = c.at("per_subject");
        for (std::size_t s = 0; s < subjects.size(); ++s) {
          std::vector<pipeline::RelativeComplexityCurve> curves;
          for (std::size_t i = 0; i < subjects[s].size(); ++i) {
            pipeline::RelativeComplexityCurve curve;
            curve.stimulus_index = static_cast<int>(i) + 1;
            for (const auto& v : subjects[s][i]) curve.rc_values.push_back(to_optional(v));
            const json& note = failures.at(s).at(i);
            if (!note.is_null()) curve.failure = note.get<std::string>();
            curves.push_back(std::move(curve));
          }
          cond.per_subject.push_back(std::move(curves));
        }
        cond.group_mean = matrix_from(c.at("group_mean"));
        cond.group_sd = matrix_from(c.at("group_sd"));
        const json& st = c.at("stats");
        cond.anova = report_from(st.at("anova"));
        cond.tukey_last_vs_first = report_from(st.at("tukey_last_vs_first"));
        for (const auto& k : st.at("ks")) cond.ks.push_back(report_from(k));
        r.conditions.push_back(std::move(cond));
      }
    }
    for (const auto& [channel, reports] : j.at("stats").at("ce_vs_oe").items()) {
      pipeline::ChannelComparison cmp;
      cmp.channel = channel;
      for (const auto& p : reports) cmp.paired.push_back(report_from(p));
      r.ce_vs_oe.push_back(std::move(cmp));
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse_error, std::string("experiment JSON: ") + e.what());
  }
}

pipeline::ExperimentResult read_experiment(const fs::path& path) {
  try {
    return experiment_from_json(read_text(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::parse_error) throw Error(ErrorKind::parse_error, path.string() + ": " + e.what());
    throw;
  }
}

std::vector<fs::path> write_figure_csvs(const fs::path& dir, const pipeline::ExperimentResult& r) {
  std::vector<std::string> channels;
  for (const auto& c : r.conditions) {
    if (std::find(channels.begin(), channels.end(), c.channel) == channels.end()) channels.push_back(c.channel);
  }
  auto flag = [](const stats::TestResult& t) { return t.reject ? "1" : "0"; };
  auto cell = [](const std::optional<double>& v) { return format_number(v ? *v : kNaN); };
  std::vector<fs::path> written;
  for (std::size_t ch = 0; ch < channels.size(); ++ch) {
    const std::string prefix = "fig" + std::to_string(3 + ch);
    const pipeline::ChannelComparison* cmp = nullptr;
    for (const auto& c : r.ce_vs_oe) {
      if (c.channel == channels[ch]) cmp = &c;
    }
    std::string a = "condition,scale,stimulus,mean,sd,sig\n";
    for (const auto& c : r.conditions) {
      if (c.channel != channels[ch]) continue;
      for (std::size_t i = 0; i < c.group_mean.size(); ++i) {
        for (std::size_t k = 0; k < r.scales.size(); ++k) {
          const char* sig = cmp ? flag(cmp->paired[i].entries[k]) : "0";
          a += pipeline::to_string(c.eyes) + "," + std::to_string(r.scales[k]) + "," + std::to_string(i + 1) + "," +
               cell(c.group_mean[i][k]) + "," + cell(c.group_sd[i][k]) + "," + sig + "\n";
        }
      }
    }
    written.push_back(dir / (prefix + "A.csv"));
    write_text(written.back(), a);

    for (pipeline::Eyes eyes : {pipeline::Eyes::ce, pipeline::Eyes::oe}) {
      const auto it = std::find_if(r.conditions.begin(), r.conditions.end(),
                                   [&](const auto& c) { return c.eyes == eyes && c.channel == channels[ch]; });
      if (it == r.conditions.end() || it->group_mean.empty()) continue;
      std::string t = "scale,stimulus,mean,sd,sig\n";
      const std::size_t last = it->group_mean.size() - 1;
      for (std::size_t k = 0; k < r.scales.size(); ++k) {
        for (std::size_t i : {std::size_t{0}, last}) {
          t += std::to_string(r.scales[k]) + "," + std::to_string(i + 1) + "," + cell(it->group_mean[i][k]) + "," +
               cell(it->group_sd[i][k]) + "," + flag(it->tukey_last_vs_first.entries[k]) + "\n";
        }
      }
      written.push_back(dir / (prefix + (eyes == pipeline::Eyes::ce ? "B.csv" : "C.csv")));
      write_text(written.back(), t);
    }
  }
  return written;
}

void write_stats_csv(const fs::path& path, const pipeline::ExperimentResult& r) {
  std::string text = "scale,test,statistic,p_raw,p_fdr,reject\n";
  auto emit = [&](const stats::StatReport& rep) {
    for (std::size_t k = 0; k < rep.entries.size() && k < r.scales.size(); ++k) {
      const stats::TestResult& e = rep.entries[k];
      text += std::to_string(r.scales[k]) + "," + rep.family + "," + format_number(e.statistic) + "," +
              format_number(e.p_raw) + "," + (e.p_adjusted ? format_number(*e.p_adjusted) : std::string()) + "," +
              (e.reject ? "1" : "0") + "\n";
    }
  };
  for (const auto& c : r.conditions) {
    emit(c.anova);
    emit(c.tukey_last_vs_first);
    for (const auto& k : c.ks) emit(k);
  }
  for (const auto& cmp : r.ce_vs_oe) {
    for (const auto& p : cmp.paired) emit(p);
  }
  write_text(path, text);
}

}  // namespace mife::io

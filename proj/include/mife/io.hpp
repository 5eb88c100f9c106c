#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mife/entropy.hpp"
#include "mife/pipeline.hpp"
#include "mife/signals.hpp"

namespace mife::io {

namespace fs = std::filesystem;

// Decimal with 12 significant digits; non-finite values print as "nan",
// "inf" or "-inf".
std::string format_number(double v);

// Rounds to the value that format_number would print.
double round12(double v);

// One-column CSV with a `value` header. Parse errors name the line.
std::vector<double> read_value_csv(const fs::path& path);
void write_value_csv(const fs::path& path, std::span<const double> values);

// `<stem>.json` next to a CSV holds {"fs": ..., "label": ...}.
fs::path sidecar_path(const fs::path& csv);

// Reads the sidecar, or the directory's meta.json when there is none, so
// that single epochs of an epoch directory can be read directly. Without
// either, fallback_fs is used when given.
TimeSeries read_series(const fs::path& csv, std::optional<double> fallback_fs = std::nullopt);
void write_series(const fs::path& csv, const TimeSeries& x);

// Directory with baseline_<k>.csv and stim_<i>.csv (both 1-based) plus one
// meta.json.
void write_epoch_set(const fs::path& dir, const EpochSet& set, const std::string& label = {});
EpochSet read_epoch_set(const fs::path& dir);

// `scale,value`; undefined values are written as "nan".
void write_profile_csv(const fs::path& path, const entropy::EntropyProfile& p);
entropy::EntropyProfile read_profile_csv(const fs::path& path, const std::string& method = {});

std::string experiment_to_json(const pipeline::ExperimentResult& r);
pipeline::ExperimentResult experiment_from_json(const std::string& text);
pipeline::ExperimentResult read_experiment(const fs::path& path);

// Figure-ready tables per channel c (0-based): fig<3+c>A.csv with every
// stimulus and both eye conditions, fig<3+c>B.csv (CE) and fig<3+c>C.csv (OE)
// with the first and last stimulus.
std::vector<fs::path> write_figure_csvs(const fs::path& dir, const pipeline::ExperimentResult& r);

// scale,test,statistic,p_raw,p_fdr,reject for every report in the result.
void write_stats_csv(const fs::path& path, const pipeline::ExperimentResult& r);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace mife::io

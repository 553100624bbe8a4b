#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "agl/training.hpp"

namespace agl {

enum class Factor { Architecture, Level, K, Laminations, Window, Neurons, Depth };

std::string_view to_string(Factor f);
Factor parse_factor(std::string_view name);
std::vector<Factor> parse_factors(std::string_view comma_list);

/// Value of a factor for one result row, as written in tables.
std::string factor_value(Factor f, const TrainOutcome& row);

struct ResultSet {
  std::vector<TrainOutcome> rows;
  /// Rows whose status was an error marker; excluded from `rows`.
  std::size_t error_rows = 0;
};

ResultSet read_results(std::istream& in);
ResultSet read_results(const std::filesystem::path& path);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool operator==(const Interval&) const = default;
};

/// Percentile bootstrap interval of the mean: `resamples` resamples with
/// replacement, linear interpolation between order statistics.
Interval bootstrap_interval(std::span<const double> values, int resamples, double level, Rng& rng);

double mean(std::span<const double> values);

struct GroupSummary {
  /// One value per grouping factor.
  std::vector<std::string> key;
  std::size_t count = 0;
  double mean_percent = 0.0;
  Interval percent_interval;
  double mean_brier = 0.0;
  Interval brier_interval;

  bool operator==(const GroupSummary&) const = default;
};

struct SummaryTable {
  std::vector<Factor> factors;
  std::vector<GroupSummary> groups;
  std::size_t error_rows = 0;
  std::uint64_t bootstrap_seed = 0;
  int resamples = 10'000;
  double level = 0.95;

  bool operator==(const SummaryTable&) const = default;
};

struct AggregateOptions {
  std::uint64_t bootstrap_seed = 0;
  int resamples = 10'000;
  double level = 0.95;
};

/// Groups rows by the factors (natural order: hierarchy order for levels,
/// FFN/RNN/GRU for architectures, numeric otherwise). Each group's bootstrap
/// stream is seeded from the bootstrap seed and the group key, and values
/// are sorted before resampling, so the result does not depend on row order.
SummaryTable aggregate(const ResultSet& results, std::span<const Factor> factors, const AggregateOptions& options = {});

/// Summary CSV: a '#' metadata line, then
/// <factors...>,count,mean_percent,percent_lower,percent_upper,mean_brier,brier_lower,brier_upper
void write_summary(std::ostream& out, const SummaryTable& table);
SummaryTable read_summary(std::istream& in);

struct PlotPanel {
  std::string title;
  SummaryTable table;
};

struct PlotReport {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

/// Writes <name>.svg with one panel per entry (x axis = first factor, one
/// series per combination of the remaining factors, mean percent correct
/// with interval bars) and the companion table <name>.csv, or <name>.<i>.csv
/// per panel when there are several. Missing x/series combinations are
/// skipped and reported as warnings.
PlotReport emit_plots(std::span<const PlotPanel> panels, const std::filesystem::path& out_dir, const std::string& name);
PlotReport emit_plots(const SummaryTable& summary, const std::filesystem::path& out_dir, const std::string& name);

/// The three figure analogues: architecture by level, lamination by level and
/// by architecture, window by level for each recurrent architecture. Panels
/// without data are skipped with a warning.
PlotReport emit_standard_figures(const ResultSet& results, const std::filesystem::path& out_dir,
                                 const AggregateOptions& options = {});

}  // namespace agl

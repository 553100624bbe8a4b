#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "agl/analysis.hpp"
#include "agl/errors.hpp"

using namespace agl;
namespace fs = std::filesystem;

namespace {

TrainOutcome row(Architecture a, Level level, int k, int lam, double percent, std::uint64_t rep = 1) {
  TrainOutcome o;
  o.config.architecture = a;
  o.config.laminations = lam;
  o.config.window = 12;
  o.grammar = {level, k, 1};
  o.split_seed = rep;
  o.percent_correct = percent;
  o.brier = (100.0 - percent) / 400.0;
  return o;
}

ResultSet sample_results() {
  ResultSet r;
  for (std::uint64_t rep = 1; rep <= 5; ++rep) {
    r.rows.push_back(row(Architecture::FFN, Level::SL, 2, 1, 90.0 + static_cast<double>(rep), rep));
    r.rows.push_back(row(Architecture::FFN, Level::CS, 0, 2, 80.0 + static_cast<double>(rep), rep));
    r.rows.push_back(row(Architecture::GRU, Level::SL, 2, 2, 95.0 + static_cast<double>(rep) / 2, rep));
  }
  return r;
}

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / "agl_analysis_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Stats, Mean) {
  std::vector<double> v{90, 100};
  EXPECT_EQ(mean(v), 95.0);
  EXPECT_THROW(mean(std::span<const double>()), InputError);
}

TEST(Stats, ConstantValuesGiveDegenerateInterval) {
  std::vector<double> v(10, 87.5);
  Rng rng(1);
  auto iv = bootstrap_interval(v, 1000, 0.95, rng);
  EXPECT_EQ(iv.lower, 87.5);
  EXPECT_EQ(iv.upper, 87.5);
}

TEST(Stats, TwoPointInterval) {
  // Resample means are 0, 50, 100 with probabilities 1/4, 1/2, 1/4, so the
  // 2.5% and 97.5% points sit at the extremes.
  std::vector<double> v{0, 100};
  Rng rng(2);
  auto iv = bootstrap_interval(v, 10000, 0.95, rng);
  EXPECT_EQ(iv.lower, 0.0);
  EXPECT_EQ(iv.upper, 100.0);
}

TEST(Stats, IntervalBracketsMean) {
  Rng data(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v;
    for (int i = 0; i < 8; ++i) v.push_back(data.uniform_real(50, 100));
    Rng rng(static_cast<std::uint64_t>(trial));
    auto iv = bootstrap_interval(v, 2000, 0.95, rng);
    EXPECT_LE(iv.lower, mean(v));
    EXPECT_GE(iv.upper, mean(v));
  }
}

TEST(Stats, RejectsBadArguments) {
  std::vector<double> v{1, 2};
  Rng rng(1);
  EXPECT_THROW(bootstrap_interval(std::span<const double>(), 10, 0.95, rng), InputError);
  EXPECT_THROW(bootstrap_interval(v, 0, 0.95, rng), ParameterError);
  EXPECT_THROW(bootstrap_interval(v, 10, 1.0, rng), ParameterError);
}

TEST(Aggregate, GroupsAndCounts) {
  auto r = sample_results();
  std::vector<Factor> by{Factor::Architecture, Factor::Level};
  auto t = aggregate(r, by, {.resamples = 500});
  ASSERT_EQ(t.groups.size(), 3u);
  std::size_t total = 0;
  for (const auto& g : t.groups) total += g.count;
  EXPECT_EQ(total, r.rows.size());
  EXPECT_EQ(t.groups[0].key, (std::vector<std::string>{"FFN", "SL"}));
  EXPECT_DOUBLE_EQ(t.groups[0].mean_percent, 93.0);
  for (const auto& g : t.groups) {
    EXPECT_LE(g.percent_interval.lower, g.mean_percent);
    EXPECT_GE(g.percent_interval.upper, g.mean_percent);
  }
}

TEST(Aggregate, SingleGroupWithNoFactors) {
  ResultSet r;
  r.rows = {row(Architecture::FFN, Level::SL, 1, 1, 90), row(Architecture::FFN, Level::SL, 1, 1, 100)};
  auto t = aggregate(r, std::vector<Factor>{}, {.resamples = 100});
  ASSERT_EQ(t.groups.size(), 1u);
  EXPECT_EQ(t.groups[0].mean_percent, 95.0);
}

TEST(Aggregate, RowOrderDoesNotMatter) {
  auto r = sample_results();
  std::vector<Factor> by{Factor::Laminations};
  auto a = aggregate(r, by, {.bootstrap_seed = 4, .resamples = 800});
  std::reverse(r.rows.begin(), r.rows.end());
  std::rotate(r.rows.begin(), r.rows.begin() + 4, r.rows.end());
  EXPECT_EQ(aggregate(r, by, {.bootstrap_seed = 4, .resamples = 800}), a);
}

TEST(Factors, ParseAndReject) {
  EXPECT_EQ(parse_factors("architecture,window").size(), 2u);
  EXPECT_THROW(parse_factor("colour"), ParameterError);
  EXPECT_THROW(parse_factors("k,k"), ParameterError);
}

TEST(Results, ErrorRowsExcludedAndCounted) {
  std::stringstream ss;
  ss << outcome_csv_header() << ",status\n";
  ss << to_csv_row(row(Architecture::FFN, Level::SL, 2, 1, 90)) << ",ok\n";
  ss << "SL,2,1,FFN,64,1,1,12,1,0,,,,,,error:boom\n";
  auto r = read_results(ss);
  EXPECT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.error_rows, 1u);
  auto t = aggregate(r, std::vector<Factor>{Factor::Level}, {.resamples = 10});
  EXPECT_EQ(t.error_rows, 1u);
}

TEST(Summary, RoundTrip) {
  std::vector<Factor> by{Factor::Architecture, Factor::Level};
  auto t = aggregate(sample_results(), by, {.bootstrap_seed = 9, .resamples = 300});
  std::stringstream ss;
  write_summary(ss, t);
  EXPECT_EQ(read_summary(ss), t);
}

TEST(Plots, ByteIdenticalAcrossRuns) {
  std::vector<Factor> by{Factor::Level, Factor::Architecture};
  auto t = aggregate(sample_results(), by, {.resamples = 300});
  auto a = scratch_dir("a"), b = scratch_dir("b");
  auto ra = emit_plots(t, a, "fig");
  emit_plots(t, b, "fig");
  ASSERT_EQ(ra.files.size(), 2u);
  EXPECT_EQ(slurp(a / "fig.svg"), slurp(b / "fig.svg"));
  EXPECT_EQ(slurp(a / "fig.csv"), slurp(b / "fig.csv"));
  EXPECT_NE(slurp(a / "fig.svg").find("<svg"), std::string::npos);
  std::ifstream companion(a / "fig.csv");
  EXPECT_EQ(read_summary(companion), t);
}

TEST(Plots, MissingCombinationsWarn) {
  std::vector<Factor> by{Factor::Level, Factor::Architecture};
  auto t = aggregate(sample_results(), by, {.resamples = 100});
  auto report = emit_plots(t, scratch_dir("missing"), "fig");
  // GRU has no CS rows.
  EXPECT_FALSE(report.warnings.empty());
}

TEST(Plots, StandardFigures) {
  auto dir = scratch_dir("standard");
  auto report = emit_standard_figures(sample_results(), dir, {.resamples = 200});
  EXPECT_TRUE(fs::exists(dir / "fig_architecture.svg"));
  EXPECT_TRUE(fs::exists(dir / "fig_lamination.svg"));
  EXPECT_FALSE(report.files.empty());
}

TEST(Plots, UnwritableDirectoryThrows) {
  std::vector<Factor> by{Factor::Level};
  auto t = aggregate(sample_results(), by, {.resamples = 10});
  EXPECT_THROW(emit_plots(t, "/proc/agl-no-such-dir", "fig"), IoError);
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "agl/training.hpp"

namespace agl {

struct LevelSpec {
  Level level = Level::SL;
  /// 0 for CF and CS.
  int k = 0;

  bool operator==(const LevelSpec&) const = default;
};

/// "SL:2", "CS", ...
std::string to_string(const LevelSpec& spec);
LevelSpec parse_level_spec(std::string_view text);

/// Declarative experiment grid. Windows are ignored for FFN (always 12).
struct SweepGrid {
  std::vector<Architecture> architectures;
  std::vector<int> neuron_values;
  std::vector<int> depth_values;
  std::vector<int> lamination_values;
  std::vector<int> window_values;
  std::vector<LevelSpec> levels;
  std::vector<std::uint64_t> instance_seeds;
  std::vector<std::uint64_t> replicate_seeds;
  int per_class = 500;
  double train_fraction = kDefaultTrainFraction;
  TrainingOptions training;
  Candidate gru_candidate = Candidate::Relu;

  /// Every list non-empty and inside the experiment ranges: neurons a
  /// multiple of 32 in 32..512, depth 1..3, laminations 1..2, window 1..12,
  /// k valid for its level. Throws ParameterError.
  void validate() const;
};

/// The full experiment grid: all levels and window sizes, every architecture,
/// 32..512 neurons, depth 1..3, dense and laminated, one instance and one
/// replicate seed.
SweepGrid full_grid();

/// Flat key = value text, '#' comments. Keys mirror SweepGrid fields:
/// architectures, neurons, depths, laminations, windows, levels,
/// instance_seeds, replicate_seeds, per_class, train_fraction, max_epochs,
/// batch_size, per_batch_eval, eval_stride, gru_candidate. Integer lists
/// accept ranges "lo:hi" or "lo:hi:step". Missing keys keep the values of
/// `base`.
SweepGrid parse_grid_config(std::istream& in, SweepGrid base = full_grid());

/// Applies one config key; shared by the config parser and CLI overrides.
void set_grid_value(SweepGrid& grid, const std::string& key, const std::string& value);

struct JobDescriptor {
  LevelSpec level;
  std::uint64_t instance_seed = 0;
  NetworkConfig config;
  std::uint64_t replicate_seed = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t init_seed = 0;

  /// The first ten result columns, comma-joined; unique per job.
  std::string key() const;
};

/// split_seed and init_seed of a job. Both depend only on the replicate seed
/// and the grammar, so adding grid values never reseeds existing jobs and
/// every architecture sees the same split.
std::uint64_t derive_split_seed(std::uint64_t replicate, const LevelSpec& level, std::uint64_t instance_seed);
std::uint64_t derive_init_seed(std::uint64_t replicate, const LevelSpec& level, std::uint64_t instance_seed);

/// Seed of the corpus generator for a grammar instance.
std::uint64_t derive_corpus_seed(const LevelSpec& level, std::uint64_t instance_seed);

/// Cartesian product in the order level, instance seed, architecture,
/// neurons, depth, laminations, window, replicate.
std::vector<JobDescriptor> enumerate_grid(const SweepGrid& grid);

struct SweepOptions {
  int parallelism = 1;
  /// Continue from an existing results file and manifest.
  bool resume = false;
  /// Stop dispatching after this many jobs in this session.
  std::optional<std::size_t> max_jobs;
  /// Called after each finished job with (done in session, pending at start).
  std::function<void(std::size_t, std::size_t)> progress;
};

struct SweepReport {
  std::size_t total_jobs = 0;
  std::size_t already_done = 0;
  std::size_t executed = 0;
  std::size_t failed = 0;
};

std::filesystem::path manifest_path(const std::filesystem::path& results);

/// Outcome header plus a trailing `status` column ("ok" or "error:<msg>").
std::string results_csv_header();

/// Runs every job of the grid not yet listed in the manifest. Rows are
/// appended as jobs finish; the job key is appended to the manifest right
/// after its row.
SweepReport run_sweep(const SweepGrid& grid, const std::filesystem::path& output, const SweepOptions& options = {});

/// Data rows of a results file without the wall_time column, sorted. Two
/// sweeps of the same grid produce equal vectors.
std::vector<std::string> deterministic_rows(const std::filesystem::path& results);

}  // namespace agl

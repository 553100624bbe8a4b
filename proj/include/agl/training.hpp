#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agl/network.hpp"

namespace agl {

struct TrainingOptions {
  int max_epochs = 100;
  int batch_size = 100;
  /// Evaluate on the test split during training and stop at 100% correct.
  bool per_batch_eval = true;
  /// Evaluate after every `eval_stride`-th batch.
  int eval_stride = 1;
  double learning_rate = 0.01;
  double momentum = 0.95;
};

struct SeedBundle {
  /// Also drives per-epoch shuffling.
  std::uint64_t split_seed = 0;
  std::uint64_t init_seed = 0;
};

struct GrammarDescriptor {
  Level level = Level::SL;
  int k = 0;
  std::uint64_t instance_seed = 0;

  bool operator==(const GrammarDescriptor&) const = default;
};

struct TrainOutcome {
  NetworkConfig config;
  GrammarDescriptor grammar;
  std::uint64_t split_seed = 0;
  std::uint64_t init_seed = 0;
  double brier = 0.0;
  double percent_correct = 0.0;
  int epochs_run = 0;
  bool stopped_early = false;
  double wall_time = 0.0;
};

struct Evaluation {
  double brier = 0.0;
  double percent_correct = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
};

/// Brier score and percent correct of probabilities `p` (of being
/// ungrammatical) against 0/1 targets. p >= 0.5 predicts ungrammatical.
Evaluation score_predictions(std::span<const double> p, std::span<const double> targets);

Evaluation evaluate(const Parameters& params, std::span<const EncodedExample> testset);

struct TrainResult {
  TrainOutcome outcome;
  Parameters params;
};

/// One training job: shuffled mini-batches, momentum updates, optional
/// per-batch test evaluation with stop at 100%, final metrics on the test
/// split.
TrainResult train_model(const NetworkConfig& config, const SplitCorpus& data, const SeedBundle& seeds,
                        const TrainingOptions& options = {}, const GrammarDescriptor& grammar = {});

/// level,k,instance_seed,architecture,neurons,depth,laminations,window,
/// split_seed,init_seed,brier,percent_correct,epochs_run,stopped_early,wall_time
std::string outcome_csv_header();
std::string to_csv_row(const TrainOutcome& outcome);
TrainOutcome parse_outcome_fields(std::span<const std::string> fields);

inline constexpr int kOutcomeColumns = 15;

}  // namespace agl

#include "agl/training.hpp"

#include <chrono>
#include <numeric>

#include "agl/csv.hpp"

namespace agl {

Evaluation score_predictions(std::span<const double> p, std::span<const double> targets) {
  if (p.empty()) throw InputError("cannot evaluate an empty test set");
  if (p.size() != targets.size()) throw InputError("prediction and target counts differ");
  Evaluation e;
  e.total = p.size();
  double sq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - targets[i];
    sq += d * d;
    const bool predicted_ungrammatical = p[i] >= 0.5;
    if (predicted_ungrammatical == (targets[i] == 1.0)) ++e.correct;
  }
  e.brier = sq / static_cast<double>(e.total);
  e.percent_correct = 100.0 * static_cast<double>(e.correct) / static_cast<double>(e.total);
  return e;
}

Evaluation evaluate(const Parameters& params, std::span<const EncodedExample> testset) {
  if (testset.empty()) throw InputError("cannot evaluate an empty test set");
  const auto p = forward_batch(params, testset);
  std::vector<double> targets;
  targets.reserve(testset.size());
  for (const auto& e : testset) targets.push_back(e.target);
  return score_predictions(p, targets);
}

TrainResult train_model(const NetworkConfig& config, const SplitCorpus& data, const SeedBundle& seeds,
                        const TrainingOptions& options, const GrammarDescriptor& grammar) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  if (data.train.empty() || data.test.empty()) throw InputError("train and test splits must be non-empty");
  if (options.batch_size < 1 || options.eval_stride < 1 || options.max_epochs < 0) {
    throw ParameterError("batch size and evaluation stride must be positive");
  }
  for (const auto* set : {&data.train, &data.test}) {
    for (const auto& e : *set) {
      if (e.steps != config.steps() || e.step_width != config.input_width()) {
        throw InputError("corpus encoded with window " + std::to_string(data.window) +
                         " does not match network window " + std::to_string(config.window));
      }
    }
  }

  TrainResult result{{}, init_network(config, seeds.init_seed)};
  Parameters& params = result.params;
  OptimizerState opt = OptimizerState::zeros_like(params, options.learning_rate, options.momentum);

  std::vector<double> test_targets;
  for (const auto& e : data.test) test_targets.push_back(e.target);

  std::vector<std::size_t> order(data.train.size());
  std::vector<const EncodedExample*> batch;
  const auto batch_size = static_cast<std::size_t>(options.batch_size);
  int epochs = 0;
  bool stopped = false;
  long long batches_seen = 0;
  for (int epoch = 0; epoch < options.max_epochs && !stopped; ++epoch) {
    ++epochs;
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(seeds.split_seed, "epoch", {static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i) {
        batch.push_back(&data.train[order[i]]);
      }
      const auto grads = backward(params, std::span<const EncodedExample* const>(batch));
      momentum_step(params, grads.gradients, opt);
      ++batches_seen;
      if (options.per_batch_eval && batches_seen % options.eval_stride == 0) {
        const auto p = forward_batch(params, std::span<const EncodedExample>(data.test));
        if (score_predictions(p, test_targets).correct == data.test.size()) {
          stopped = true;
          break;
        }
      }
    }
  }

  const Evaluation final_eval = evaluate(params, data.test);
  TrainOutcome& o = result.outcome;
  o.config = config;
  o.grammar = grammar;
  o.split_seed = seeds.split_seed;
  o.init_seed = seeds.init_seed;
  o.brier = final_eval.brier;
  o.percent_correct = final_eval.percent_correct;
  o.epochs_run = epochs;
  o.stopped_early = stopped;
  o.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string outcome_csv_header() {
  return "level,k,instance_seed,architecture,neurons,depth,laminations,window,split_seed,init_seed,"
         "brier,percent_correct,epochs_run,stopped_early,wall_time";
}

std::string to_csv_row(const TrainOutcome& o) {
  std::string row;
  auto add = [&](const std::string& field) {
    if (!row.empty()) row += ',';
    row += field;
  };
  add(std::string(to_string(o.grammar.level)));
  add(std::to_string(o.grammar.k));
  add(std::to_string(o.grammar.instance_seed));
  add(std::string(to_string(o.config.architecture)));
  add(std::to_string(o.config.neurons));
  add(std::to_string(o.config.depth));
  add(std::to_string(o.config.laminations));
  add(std::to_string(o.config.window));
  add(std::to_string(o.split_seed));
  add(std::to_string(o.init_seed));
  add(format_double(o.brier));
  add(format_double(o.percent_correct));
  add(std::to_string(o.epochs_run));
  add(o.stopped_early ? "1" : "0");
  add(format_double(o.wall_time));
  return row;
}

TrainOutcome parse_outcome_fields(std::span<const std::string> f) {
  if (f.size() < static_cast<std::size_t>(kOutcomeColumns)) {
    throw InputError("result row has " + std::to_string(f.size()) + " fields, expected " +
                     std::to_string(kOutcomeColumns));
  }
  TrainOutcome o;
  o.grammar.level = parse_level(f[0]);
  o.grammar.k = static_cast<int>(parse_int(f[1]));
  o.grammar.instance_seed = parse_u64(f[2]);
  o.config.architecture = parse_architecture(f[3]);
  o.config.neurons = static_cast<int>(parse_int(f[4]));
  o.config.depth = static_cast<int>(parse_int(f[5]));
  o.config.laminations = static_cast<int>(parse_int(f[6]));
  o.config.window = static_cast<int>(parse_int(f[7]));
  o.split_seed = parse_u64(f[8]);
  o.init_seed = parse_u64(f[9]);
  o.brier = parse_double(f[10]);
  o.percent_correct = parse_double(f[11]);
  o.epochs_run = static_cast<int>(parse_int(f[12]));
  o.stopped_early = f[13] == "1";
  o.wall_time = parse_double(f[14]);
  return o;
}

}  // namespace agl

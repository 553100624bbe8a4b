// Command-line front end: generate, train, sweep, analyze.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "agl/analysis.hpp"
#include "agl/checkpoint.hpp"
#include "agl/corpus.hpp"
#include "agl/csv.hpp"
#include "agl/sweep.hpp"

namespace {

using namespace agl;

struct GenerateArgs {
  std::string level = "SL";
  int k = 2;
  std::uint64_t seed = 1;
  int per_class = 500;
  std::string out;
};

struct TrainArgs {
  std::string level = "SL";
  int k = 2;
  std::string arch = "FFN";
  int neurons = 64;
  int depth = 1;
  int laminations = 1;
  int window = kFullWindow;
  std::uint64_t seed = 1;
  std::uint64_t replicate = 1;
  int per_class = 500;
  double train_fraction = kDefaultTrainFraction;
  int max_epochs = 100;
  int eval_stride = 1;
  bool no_batch_eval = false;
  std::string candidate = "relu";
  std::string out;
  std::string checkpoint;
  std::string split_manifest;
};

struct SweepArgs {
  std::string config;
  std::string level, arch, neurons, depth, laminations, window, seed, replicates, candidate;
  int per_class = 0;
  double train_fraction = 0.0;
  int max_epochs = -1;
  int eval_stride = 0;
  std::string out = "results.csv";
  int parallelism = 1;
  bool resume = false;
  std::size_t max_jobs = 0;
  bool quiet = false;
};

struct AnalyzeArgs {
  std::string results;
  std::string by = "architecture,level";
  std::string out = "analysis";
  std::uint64_t bootstrap_seed = 0;
  int resamples = 10'000;
};

int run_generate(const GenerateArgs& a) {
  const Level level = parse_level(a.level);
  const auto instance = generate_instance(level, a.k, a.seed);
  Rng rng(derive_corpus_seed({level, instance.k}, a.seed));
  const auto corpus = build_corpus(instance, a.per_class, rng);
  if (a.out.empty() || a.out == "-") {
    write_corpus(std::cout, instance, corpus);
  } else {
    std::ofstream out(a.out);
    if (!out) throw IoError("cannot write " + a.out);
    write_corpus(out, instance, corpus);
  }
  std::cerr << describe(instance) << ": " << corpus.size() << " strings\n";
  return 0;
}

int run_train(const TrainArgs& a) {
  const LevelSpec spec{parse_level(a.level), (a.level == "CF" || a.level == "CS") ? 0 : a.k};
  check_k(spec.level, spec.k);
  NetworkConfig config{parse_architecture(a.arch), a.neurons, a.depth, a.laminations, a.window,
                       parse_candidate(a.candidate)};
  config.validate();
  const auto instance = generate_instance(spec.level, spec.k, a.seed);
  Rng rng(derive_corpus_seed(spec, a.seed));
  const auto corpus = build_corpus(instance, a.per_class, rng);
  const SeedBundle seeds{derive_split_seed(a.replicate, spec, a.seed), derive_init_seed(a.replicate, spec, a.seed)};
  const auto data = split(corpus, a.train_fraction, seeds.split_seed, config.window);
  TrainingOptions options;
  options.max_epochs = a.max_epochs;
  options.eval_stride = a.eval_stride;
  options.per_batch_eval = !a.no_batch_eval;
  const auto result = train_model(config, data, seeds, options, {spec.level, spec.k, a.seed});
  const std::string row = to_csv_row(result.outcome);
  if (a.out.empty() || a.out == "-") {
    std::cout << outcome_csv_header() << '\n' << row << '\n';
  } else {
    std::ofstream out(a.out);
    if (!out) throw IoError("cannot write " + a.out);
    out << outcome_csv_header() << '\n' << row << '\n';
  }
  if (!a.checkpoint.empty()) save_checkpoint(a.checkpoint, result.params);
  if (!a.split_manifest.empty()) {
    std::ofstream out(a.split_manifest);
    if (!out) throw IoError("cannot write " + a.split_manifest);
    write_split_manifest(out, data);
  }
  return 0;
}

int run_sweep_cmd(const SweepArgs& a) {
  SweepGrid grid = full_grid();
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw IoError("cannot read config " + a.config);
    grid = parse_grid_config(in);
  }
  auto override_with = [&](const std::string& key, const std::string& value) {
    if (!value.empty()) set_grid_value(grid, key, value);
  };
  override_with("levels", a.level);
  override_with("architectures", a.arch);
  override_with("neurons", a.neurons);
  override_with("depths", a.depth);
  override_with("laminations", a.laminations);
  override_with("windows", a.window);
  override_with("instance_seeds", a.seed);
  override_with("replicate_seeds", a.replicates);
  override_with("gru_candidate", a.candidate);
  if (a.per_class > 0) grid.per_class = a.per_class;
  if (a.train_fraction > 0.0) grid.train_fraction = a.train_fraction;
  if (a.max_epochs >= 0) grid.training.max_epochs = a.max_epochs;
  if (a.eval_stride > 0) grid.training.eval_stride = a.eval_stride;

  SweepOptions options;
  options.parallelism = a.parallelism;
  options.resume = a.resume;
  if (a.max_jobs > 0) options.max_jobs = a.max_jobs;
  if (!a.quiet) {
    options.progress = [](std::size_t done, std::size_t pending) {
      std::cerr << "\r" << done << "/" << pending << " jobs" << std::flush;
    };
  }
  const auto report = run_sweep(grid, a.out, options);
  if (!a.quiet) std::cerr << '\n';
  std::cerr << "jobs: " << report.total_jobs << " total, " << report.already_done << " already done, "
            << report.executed << " run, " << report.failed << " failed\n";
  return 0;
}

int run_analyze(const AnalyzeArgs& a) {
  const auto results = read_results(a.results);
  const auto factors = parse_factors(a.by);
  AggregateOptions options{a.bootstrap_seed, a.resamples, 0.95};
  const auto summary = aggregate(results, factors, options);
  auto report = emit_plots(summary, a.out, "summary");
  auto standard = emit_standard_figures(results, a.out, options);
  report.files.insert(report.files.end(), standard.files.begin(), standard.files.end());
  report.warnings.insert(report.warnings.end(), standard.warnings.begin(), standard.warnings.end());
  write_summary(std::cout, summary);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& f : report.files) std::cerr << "wrote " << f.string() << '\n';
  if (results.error_rows > 0) std::cerr << results.error_rows << " error rows excluded\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Artificial grammar corpora, network training and experiment sweeps"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a labeled corpus for one grammar instance");
  g->add_option("--level", gen.level, "SL, LT, LTT, LTTO, MSO, CF or CS");
  g->add_option("--k", gen.k, "Window size k (ignored for CF and CS)");
  g->add_option("--seed", gen.seed, "Instance seed");
  g->add_option("--per-class", gen.per_class, "Strings per label");
  g->add_option("--out", gen.out, "Output file (default stdout)");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train and evaluate a single network; prints one result row");
  t->add_option("--level", tr.level);
  t->add_option("--k", tr.k);
  t->add_option("--arch", tr.arch, "FFN, RNN or GRU");
  t->add_option("--neurons", tr.neurons);
  t->add_option("--depth", tr.depth);
  t->add_option("--laminations", tr.laminations);
  t->add_option("--window", tr.window, "Input window (FFN: 12)");
  t->add_option("--seed", tr.seed, "Grammar instance seed");
  t->add_option("--replicate", tr.replicate, "Replicate seed (derives split and init seeds)");
  t->add_option("--per-class", tr.per_class);
  t->add_option("--train-fraction", tr.train_fraction);
  t->add_option("--max-epochs", tr.max_epochs);
  t->add_option("--eval-stride", tr.eval_stride);
  t->add_flag("--no-batch-eval", tr.no_batch_eval, "Do not evaluate on the test split during training");
  t->add_option("--gru-candidate", tr.candidate, "tanh or relu");
  t->add_option("--out", tr.out, "Result CSV (default stdout)");
  t->add_option("--checkpoint", tr.checkpoint, "Write final parameters here");
  t->add_option("--split-manifest", tr.split_manifest, "Write the train/test index split here");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Run an experiment grid with resumable CSV output");
  s->add_option("--config", sw.config, "key = value grid file");
  s->add_option("--level", sw.level, "Comma list of level specs, e.g. SL:2,CS");
  s->add_option("--arch", sw.arch);
  s->add_option("--neurons", sw.neurons, "List or range lo:hi:step");
  s->add_option("--depth", sw.depth);
  s->add_option("--laminations", sw.laminations);
  s->add_option("--window", sw.window);
  s->add_option("--seed", sw.seed, "Instance seeds");
  s->add_option("--replicates", sw.replicates, "Replicate seeds");
  s->add_option("--per-class", sw.per_class);
  s->add_option("--train-fraction", sw.train_fraction);
  s->add_option("--max-epochs", sw.max_epochs);
  s->add_option("--eval-stride", sw.eval_stride);
  s->add_option("--gru-candidate", sw.candidate);
  s->add_option("--out", sw.out, "Results CSV; the manifest is <out>.manifest");
  s->add_option("--parallelism", sw.parallelism);
  s->add_flag("--resume", sw.resume, "Skip jobs already listed in the manifest");
  s->add_option("--max-jobs", sw.max_jobs, "Stop after this many jobs");
  s->add_flag("--quiet", sw.quiet);

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Summarise a results file and write figures");
  a->add_option("--results", an.results)->required();
  a->add_option("--by", an.by, "Comma list of factors");
  a->add_option("--out", an.out, "Output directory");
  a->add_option("--bootstrap-seed", an.bootstrap_seed);
  a->add_option("--resamples", an.resamples);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*g) return run_generate(gen);
    if (*t) return run_train(tr);
    if (*s) return run_sweep_cmd(sw);
    if (*a) return run_analyze(an);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

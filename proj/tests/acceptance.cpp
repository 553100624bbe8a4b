// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agl/analysis.hpp"
#include "agl/corpus.hpp"
#include "agl/csv.hpp"
#include "agl/sweep.hpp"

namespace fs = std::filesystem;
using namespace agl;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// 1. Generator and oracle agree on every sampled label.
Verdict oracle_agreement() {
  const auto t0 = Clock::now();
  const std::vector<LevelSpec> specs{{Level::SL, 1},  {Level::SL, 2},  {Level::SL, 3},   {Level::LT, 2},
                                     {Level::LT, 3},  {Level::LTT, 2}, {Level::LTT, 3},  {Level::LTTO, 2},
                                     {Level::LTTO, 3}, {Level::MSO, 2}, {Level::MSO, 3}, {Level::CF, 0},
                                     {Level::CS, 0}};
  std::size_t checked = 0, mismatched = 0;
  for (const auto& spec : specs) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto g = generate_instance(spec.level, spec.k, seed);
      Rng rng(derive_seed(seed, "acceptance-oracle", {static_cast<std::uint64_t>(spec.level), static_cast<std::uint64_t>(spec.k)}));
      for (Label label : {Label::Grammatical, Label::Ungrammatical}) {
        for (int i = 0; i < 20; ++i) {
          const auto s = sample_string(g, label, rng);
          ++checked;
          if (oracle_accepts(g, s.text) != (label == Label::Grammatical)) ++mismatched;
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {mismatched == 0 && secs < 60.0, std::to_string(checked) + " strings, " + std::to_string(mismatched) +
                                              " mismatches, " + fmt(secs) + " s"};
}

double mean_loss(const Parameters& p, std::span<const EncodedExample> batch) {
  const auto probs = forward_batch(p, batch);
  double s = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) s += loss_bce(probs[i], batch[i].target);
  return s / static_cast<double>(batch.size());
}

// 2. Backward pass against central differences on toy networks.
Verdict gradient_fidelity() {
  const auto t0 = Clock::now();
  const double h = 1e-5;
  double worst = 0.0;
  std::string worst_case;
  int cases = 0;
  std::vector<NetworkConfig> configs;
  for (Architecture arch : {Architecture::FFN, Architecture::RNN, Architecture::GRU}) {
    for (int lam : {1, 2}) {
      for (int window : {1, 5, 12}) {
        if (arch == Architecture::FFN && window != kFullWindow) continue;
        configs.push_back({arch, 8, 2, lam, window, Candidate::Relu});
        if (arch == Architecture::GRU) configs.push_back({arch, 8, 2, lam, window, Candidate::Tanh});
      }
    }
  }
  for (const auto& c : configs) {
    const Architecture arch = c.architecture;
    const int lam = c.laminations, window = c.window;
    const Candidate cand = c.gru_candidate;
    auto p = init_network(c, derive_seed(17, "toy", {static_cast<std::uint64_t>(arch), static_cast<std::uint64_t>(lam)}));
    Rng rng(5);
    for (auto& t : p.tensors) {
      if (t.value.cols() == 1) {
        for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value(i) = rng.uniform_real(-0.1, 0.1);
      }
    }
    std::vector<EncodedExample> batch;
    for (int n = 0; n < 4; ++n) {
      std::string s;
      for (int j = 0; j < 12; ++j) s += static_cast<char>('a' + rng.uniform_index(6));
      batch.push_back(encode_example({s, n % 2 ? Label::Ungrammatical : Label::Grammatical}, window));
    }
    const auto analytic = backward(p, batch);
    for (std::size_t ti = 0; ti < p.tensors.size(); ++ti) {
      auto& t = p.tensors[ti];
      for (Eigen::Index i = 0; i < t.value.size(); ++i) {
        if (t.masked() && t.mask(i) == 0.0) continue;
        const double saved = t.value(i);
        t.value(i) = saved + h;
        const double up = mean_loss(p, batch);
        t.value(i) = saved - h;
        const double down = mean_loss(p, batch);
        t.value(i) = saved;
        const double numeric = (up - down) / (2 * h);
        const double a = analytic.gradients[ti](i);
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
        if (rel > worst) {
          worst = rel;
          worst_case = std::string(to_string(arch)) + " lam=" + std::to_string(lam) + " w=" + std::to_string(window) +
                       " " + std::string(to_string(cand)) + " " + t.name;
        }
      }
    }
    ++cases;
  }
  const double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d configurations, max relative error %.3g (%s), %.2f s", cases, worst,
                worst_case.c_str(), secs);
  return {worst < 1e-4 && secs < 60.0, buf};
}

// 3. Metric identities.
Verdict metric_identities() {
  bool ok = true;
  std::string detail;
  auto check = [&](const char* name, std::vector<double> p, std::vector<double> t, double brier, double percent) {
    const auto e = score_predictions(p, t);
    const bool good = std::abs(e.brier - brier) <= 1e-15 && e.percent_correct == percent;
    ok = ok && good;
    detail += std::string(detail.empty() ? "" : "; ") + name + " brier=" + format_double(e.brier) +
              " pct=" + format_double(e.percent_correct) + (good ? "" : " (expected " + format_double(brier) + ")");
  };
  check("perfect", {0, 1, 1, 0}, {0, 1, 1, 0}, 0.0, 100.0);
  check("constant-0.5", {0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}, 0.25, 50.0);
  check("{0.9,0.2}", {0.9, 0.2}, {1, 0}, 0.025, 100.0);
  return {ok, detail};
}

// 4. FFN-64 learns SL k=1.
Verdict training_sanity() {
  const auto t0 = Clock::now();
  const auto g = generate_instance(Level::SL, 1, 1);
  Rng rng(derive_corpus_seed({Level::SL, 1}, 1));
  const auto corpus = build_corpus(g, 500, rng);
  const auto data = split(corpus, 0.8, derive_split_seed(1, {Level::SL, 1}, 1));
  NetworkConfig c;
  c.neurons = 64;
  const auto r = train_model(c, data, {data.split_seed, derive_init_seed(1, {Level::SL, 1}, 1)}, {}, {Level::SL, 1, 1});
  const double secs = seconds_since(t0);
  return {r.outcome.percent_correct >= 95.0 && r.outcome.epochs_run <= 100 && secs < 120.0,
          fmt(r.outcome.percent_correct) + "% after " + std::to_string(r.outcome.epochs_run) + " epochs, " +
              fmt(secs) + " s"};
}

SweepGrid recurrence_grid() {
  SweepGrid g;
  g.architectures = {Architecture::FFN, Architecture::GRU};
  g.neuron_values = {64, 128};
  g.depth_values = {1};
  // Dense rows answer the architecture question; laminated rows are used
  // only for the lamination comparison.
  g.lamination_values = {1, 2};
  g.window_values = {5, 12};
  g.levels = {{Level::SL, 2}, {Level::CS, 0}};
  g.instance_seeds = {1};
  g.replicate_seeds = {1, 2, 3, 4, 5};
  return g;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

// 5. GRU beats FFN on CS by more than on SL.
Verdict recurrence_direction(const ResultSet& results, double sweep_seconds) {
  std::map<std::pair<Architecture, Level>, std::vector<double>> cells;
  for (const auto& r : results.rows) {
    if (r.config.laminations != 1) continue;
    cells[{r.config.architecture, r.grammar.level}].push_back(r.percent_correct);
  }
  const double ffn_sl = mean_of(cells[{Architecture::FFN, Level::SL}]);
  const double gru_sl = mean_of(cells[{Architecture::GRU, Level::SL}]);
  const double ffn_cs = mean_of(cells[{Architecture::FFN, Level::CS}]);
  const double gru_cs = mean_of(cells[{Architecture::GRU, Level::CS}]);
  const double gap_cs = gru_cs - ffn_cs, gap_sl = gru_sl - ffn_sl;
  const bool pass = results.error_rows == 0 && gru_cs > ffn_cs && gap_cs > gap_sl && sweep_seconds < 7200.0;
  return {pass, "CS: GRU " + fmt(gru_cs) + " vs FFN " + fmt(ffn_cs) + " (gap " + fmt(gap_cs) + "); SL: GRU " +
                    fmt(gru_sl) + " vs FFN " + fmt(ffn_sl) + " (gap " + fmt(gap_sl) + "); sweep " +
                    fmt(sweep_seconds, 0) + " s"};
}

// 6. Window 1 hurts GRU on MSO but not on SL.
Verdict window_direction(const fs::path& work, bool reuse) {
  SweepGrid g;
  g.architectures = {Architecture::GRU};
  g.neuron_values = {128};
  g.depth_values = {1};
  g.lamination_values = {1};
  g.window_values = {1, 12};
  g.levels = {{Level::MSO, 2}, {Level::SL, 2}};
  g.instance_seeds = {1};
  g.replicate_seeds = {1, 2, 3, 4, 5};
  const auto out = work / "window.csv";
  run_sweep(g, out, {.resume = reuse});
  const auto results = read_results(out);
  std::map<std::pair<Level, int>, std::vector<double>> cells;
  for (const auto& r : results.rows) cells[{r.grammar.level, r.config.window}].push_back(r.percent_correct);
  const double mso1 = mean_of(cells[{Level::MSO, 1}]), mso12 = mean_of(cells[{Level::MSO, 12}]);
  const double sl1 = mean_of(cells[{Level::SL, 1}]), sl12 = mean_of(cells[{Level::SL, 12}]);
  // "Absent or reversed" on SL: window 1 is not worse than window 12 by more
  // than one percentage point of seed noise.
  const bool pass = results.error_rows == 0 && mso1 < mso12 && sl1 >= sl12 - 1.0;
  return {pass, "MSO: w1 " + fmt(mso1) + " vs w12 " + fmt(mso12) + "; SL: w1 " + fmt(sl1) + " vs w12 " + fmt(sl12)};
}

// 7. Dense and laminated networks within 3 points per cell.
Verdict lamination_neutrality(const ResultSet& results) {
  struct Cell {
    Architecture arch;
    int neurons;
    int window;
    Level level;
    auto operator<=>(const Cell&) const = default;
  };
  std::map<Cell, std::map<int, std::vector<double>>> cells;
  for (const auto& r : results.rows) {
    cells[{r.config.architecture, r.config.neurons, r.config.window, r.grammar.level}][r.config.laminations].push_back(
        r.percent_correct);
  }
  double worst = 0.0;
  std::string worst_cell;
  bool complete = true;
  for (auto& [cell, by_lam] : cells) {
    if (by_lam[1].empty() || by_lam[2].empty()) {
      complete = false;
      continue;
    }
    const double d = std::abs(mean_of(by_lam[1]) - mean_of(by_lam[2]));
    if (d >= worst) {
      worst = d;
      worst_cell = std::string(to_string(cell.arch)) + "-" + std::to_string(cell.neurons) + " w" +
                   std::to_string(cell.window) + " " + std::string(to_string(cell.level));
    }
  }
  return {complete && !cells.empty() && worst <= 3.0,
          std::to_string(cells.size()) + " cells, max |dense - laminated| " + fmt(worst) + " pp (" + worst_cell + ")"};
}

std::string without_wall_time(const std::string& row) {
  auto fields = split_csv_line(row);
  fields.erase(fields.begin() + 14);
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + fields[i];
  return out;
}

// 8. Single-job and parallel determinism.
Verdict determinism(const fs::path& work, const fs::path& serial_results, bool reuse) {
  // One job from the sweep, re-run twice in-process.
  const auto jobs = enumerate_grid(recurrence_grid());
  const auto it = std::find_if(jobs.begin(), jobs.end(), [](const JobDescriptor& j) {
    return j.config.architecture == Architecture::GRU && j.level.level == Level::CS && j.config.neurons == 64 &&
           j.config.window == 12 && j.replicate_seed == 2;
  });
  const auto& job = *it;
  const auto grid = recurrence_grid();
  const auto instance = generate_instance(job.level.level, job.level.k, job.instance_seed);
  Rng rng(derive_corpus_seed(job.level, job.instance_seed));
  const auto corpus = build_corpus(instance, grid.per_class, rng);
  const auto data = split(corpus, grid.train_fraction, job.split_seed, job.config.window);
  const GrammarDescriptor gd{job.level.level, job.level.k, job.instance_seed};
  const auto a = train_model(job.config, data, {job.split_seed, job.init_seed}, grid.training, gd);
  const auto b = train_model(job.config, data, {job.split_seed, job.init_seed}, grid.training, gd);
  const std::string row_a = without_wall_time(to_csv_row(a.outcome) + ",ok");
  const std::string row_b = without_wall_time(to_csv_row(b.outcome) + ",ok");
  const auto serial = deterministic_rows(serial_results);
  const bool in_sweep = std::find(serial.begin(), serial.end(), row_a) != serial.end();

  const auto parallel_out = work / "recurrence_p4.csv";
  run_sweep(grid, parallel_out, {.parallelism = 4, .resume = reuse});
  const bool same = deterministic_rows(parallel_out) == serial;
  return {row_a == row_b && in_sweep && same,
          std::string("single job rerun ") + (row_a == row_b ? "identical" : "DIFFERS") + ", matches sweep row: " +
              (in_sweep ? "yes" : "no") + "; parallelism 1 vs 4: " + (same ? "identical" : "DIFFERENT") + " (" +
              std::to_string(serial.size()) + " rows)"};
}

// 9. Interrupted then resumed sweep equals an uninterrupted one.
Verdict resume_correctness(const fs::path& work, const fs::path& reference) {
  const auto grid = recurrence_grid();
  const auto out = work / "recurrence_resumed.csv";
  fs::remove(out);
  fs::remove(manifest_path(out));
  const std::size_t first_batch = 45;
  const auto first = run_sweep(grid, out, {.max_jobs = first_batch});
  {
    // A crash while writing leaves a torn line with no manifest entry.
    std::ofstream torn(out, std::ios::app);
    torn << "CS,0,1,GRU,128,1,";
  }
  const auto second = run_sweep(grid, out, {.resume = true});
  const bool counts = first.executed == first_batch && second.already_done == first_batch &&
                      second.executed == second.total_jobs - first_batch;
  const bool same = deterministic_rows(out) == deterministic_rows(reference);
  return {counts && same, "first session " + std::to_string(first.executed) + " jobs, resumed session " +
                              std::to_string(second.executed) + " of " + std::to_string(second.total_jobs) +
                              "; final file " + (same ? "identical" : "DIFFERENT") + " to uninterrupted run"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string workdir = "acceptance_work";
  std::vector<int> only;
  bool reuse = false;
  app.add_option("--workdir", workdir, "Scratch directory for sweep outputs");
  app.add_option("--only", only, "Run only these criteria");
  app.add_flag("--reuse", reuse, "Keep finished sweep jobs from a previous run");
  CLI11_PARSE(app, argc, argv);

  const fs::path work(workdir);
  if (!reuse) fs::remove_all(work);
  fs::create_directories(work);

  auto wanted = [&](int n) { return only.empty() || std::find(only.begin(), only.end(), n) != only.end(); };
  int failures = 0;
  auto report = [&](int n, const std::function<Verdict()>& run) {
    if (!wanted(n)) return;
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("criterion %d: %s  %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  };

  report(1, oracle_agreement);
  report(2, gradient_fidelity);
  report(3, metric_identities);
  report(4, training_sanity);

  const auto sweep_out = work / "recurrence.csv";
  double sweep_seconds = 0.0;
  if (wanted(5) || wanted(7) || wanted(8) || wanted(9)) {
    const auto t0 = Clock::now();
    try {
      run_sweep(recurrence_grid(), sweep_out, {.parallelism = 1, .resume = reuse});
    } catch (const std::exception& e) {
      std::printf("recurrence sweep failed: %s\n", e.what());
    }
    sweep_seconds = seconds_since(t0);
  }
  report(5, [&] { return recurrence_direction(read_results(sweep_out), sweep_seconds); });
  report(6, [&] { return window_direction(work, reuse); });
  report(7, [&] { return lamination_neutrality(read_results(sweep_out)); });
  report(8, [&] { return determinism(work, sweep_out, reuse); });
  report(9, [&] { return resume_correctness(work, sweep_out); });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

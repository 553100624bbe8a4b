#include "agl/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "agl/corpus.hpp"
#include "agl/csv.hpp"

namespace agl {

namespace {

constexpr int kKeyColumns = 10;
constexpr std::size_t kWallTimeColumn = 14;

std::vector<long long> parse_int_list(const std::string& value) {
  std::vector<long long> out;
  for (const auto& item : split_list(value, ',')) {
    const auto parts = split_list(item, ':');
    if (parts.size() == 1) {
      out.push_back(parse_int(parts[0]));
    } else if (parts.size() == 2 || parts.size() == 3) {
      const long long lo = parse_int(parts[0]);
      const long long hi = parse_int(parts[1]);
      const long long step = parts.size() == 3 ? parse_int(parts[2]) : 1;
      if (step <= 0 || hi < lo) throw ParameterError("bad range: " + item);
      for (long long v = lo; v <= hi; v += step) out.push_back(v);
    } else {
      throw ParameterError("bad list item: " + item);
    }
  }
  return out;
}

std::vector<int> to_ints(const std::vector<long long>& v) { return {v.begin(), v.end()}; }

std::vector<std::uint64_t> to_seeds(const std::vector<long long>& v) {
  std::vector<std::uint64_t> out;
  for (long long x : v) {
    if (x < 0) throw ParameterError("seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(x));
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ParameterError("not a boolean: " + v);
}

std::uint64_t level_code(const LevelSpec& l) {
  return static_cast<std::uint64_t>(l.level) * 16 + static_cast<std::uint64_t>(l.k);
}

std::string sanitize(std::string msg) {
  for (auto& c : msg) {
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  }
  return msg;
}

std::string key_of_row(const std::string& row) {
  std::size_t pos = 0;
  for (int i = 0; i < kKeyColumns; ++i) {
    pos = row.find(',', pos);
    if (pos == std::string::npos) throw InputError("malformed results row: " + row);
    ++pos;
  }
  return row.substr(0, pos - 1);
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void write_lines_atomically(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    for (const auto& l : lines) out << l << '\n';
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Loads completed keys, dropping any results row the manifest does not
/// confirm and any manifest key without a row, so both files agree.
std::set<std::string> reconcile(const std::filesystem::path& results, const std::filesystem::path& manifest) {
  std::set<std::string> listed;
  for (const auto& k : read_lines(manifest)) listed.insert(k);
  std::vector<std::string> kept{results_csv_header()};
  std::set<std::string> done;
  for (const auto& row : read_lines(results)) {
    if (row.rfind("level,", 0) == 0) continue;
    // A row cut short by an interruption has no complete key; drop it.
    if (std::count(row.begin(), row.end(), ',') < kKeyColumns) continue;
    const std::string key = key_of_row(row);
    if (listed.contains(key) && !done.contains(key)) {
      kept.push_back(row);
      done.insert(key);
    }
  }
  write_lines_atomically(results, kept);
  write_lines_atomically(manifest, std::vector<std::string>(done.begin(), done.end()));
  return done;
}

struct GrammarKey {
  LevelSpec level;
  std::uint64_t seed;
  bool operator<(const GrammarKey& o) const {
    return std::tuple(level.level, level.k, seed) < std::tuple(o.level.level, o.level.k, o.seed);
  }
};

}  // namespace

std::string to_string(const LevelSpec& spec) {
  std::string out(to_string(spec.level));
  if (spec.level != Level::CF && spec.level != Level::CS) out += ":" + std::to_string(spec.k);
  return out;
}

LevelSpec parse_level_spec(std::string_view text) {
  const auto parts = split_list(text, ':');
  if (parts.empty() || parts.size() > 2) throw ParameterError("bad level spec: " + std::string(text));
  LevelSpec spec{parse_level(parts[0]), 0};
  const bool uses_k = spec.level != Level::CF && spec.level != Level::CS;
  if (uses_k) {
    if (parts.size() != 2) throw ParameterError(parts[0] + " needs a k, e.g. " + parts[0] + ":2");
    spec.k = static_cast<int>(parse_int(parts[1]));
  }
  check_k(spec.level, spec.k);
  return spec;
}

void SweepGrid::validate() const {
  auto non_empty = [](bool empty, const char* what) {
    if (empty) throw ParameterError(std::string("sweep grid has no ") + what);
  };
  non_empty(architectures.empty(), "architectures");
  non_empty(neuron_values.empty(), "neuron values");
  non_empty(depth_values.empty(), "depth values");
  non_empty(lamination_values.empty(), "lamination values");
  non_empty(levels.empty(), "levels");
  non_empty(instance_seeds.empty(), "instance seeds");
  non_empty(replicate_seeds.empty(), "replicate seeds");
  const bool recurrent = std::any_of(architectures.begin(), architectures.end(),
                                     [](Architecture a) { return a != Architecture::FFN; });
  non_empty(recurrent && window_values.empty(), "window values");
  for (int n : neuron_values) {
    if (n < 32 || n > 512 || n % 32 != 0) throw ParameterError("neurons must be a multiple of 32 in 32..512");
  }
  for (int d : depth_values) {
    if (d < 1 || d > 3) throw ParameterError("depth must be in 1..3");
  }
  for (int l : lamination_values) {
    if (l < 1 || l > 2) throw ParameterError("laminations must be 1 or 2");
  }
  for (int w : window_values) {
    if (w < 1 || w > kFullWindow) throw ParameterError("window must be in 1..12");
  }
  for (const auto& l : levels) check_k(l.level, l.k);
  if (per_class < 1) throw ParameterError("per_class must be at least 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ParameterError("train_fraction must be in (0,1)");
}

SweepGrid full_grid() {
  SweepGrid g;
  g.architectures = {Architecture::FFN, Architecture::RNN, Architecture::GRU};
  for (int n = 32; n <= 512; n += 32) g.neuron_values.push_back(n);
  g.depth_values = {1, 2, 3};
  g.lamination_values = {1, 2};
  for (int w = 1; w <= kFullWindow; ++w) g.window_values.push_back(w);
  g.levels = {{Level::SL, 1},   {Level::SL, 2},   {Level::SL, 3},  {Level::LT, 2},  {Level::LT, 3},
              {Level::LTT, 2},  {Level::LTT, 3},  {Level::LTTO, 2}, {Level::LTTO, 3}, {Level::MSO, 2},
              {Level::MSO, 3},  {Level::CF, 0},   {Level::CS, 0}};
  g.instance_seeds = {1};
  g.replicate_seeds = {1};
  return g;
}

void set_grid_value(SweepGrid& g, const std::string& key, const std::string& value) {
  if (key == "architectures") {
    g.architectures.clear();
    for (const auto& a : split_list(value)) g.architectures.push_back(parse_architecture(a));
  } else if (key == "neurons") {
    g.neuron_values = to_ints(parse_int_list(value));
  } else if (key == "depths") {
    g.depth_values = to_ints(parse_int_list(value));
  } else if (key == "laminations") {
    g.lamination_values = to_ints(parse_int_list(value));
  } else if (key == "windows") {
    g.window_values = to_ints(parse_int_list(value));
  } else if (key == "levels") {
    g.levels.clear();
    for (const auto& l : split_list(value)) g.levels.push_back(parse_level_spec(l));
  } else if (key == "instance_seeds") {
    g.instance_seeds = to_seeds(parse_int_list(value));
  } else if (key == "replicate_seeds") {
    g.replicate_seeds = to_seeds(parse_int_list(value));
  } else if (key == "per_class") {
    g.per_class = static_cast<int>(parse_int(value));
  } else if (key == "train_fraction") {
    g.train_fraction = parse_double(value);
  } else if (key == "max_epochs") {
    g.training.max_epochs = static_cast<int>(parse_int(value));
  } else if (key == "batch_size") {
    g.training.batch_size = static_cast<int>(parse_int(value));
  } else if (key == "per_batch_eval") {
    g.training.per_batch_eval = parse_bool(value);
  } else if (key == "eval_stride") {
    g.training.eval_stride = static_cast<int>(parse_int(value));
  } else if (key == "gru_candidate") {
    g.gru_candidate = parse_candidate(value);
  } else {
    throw ParameterError("unknown sweep config key: " + key);
  }
}

SweepGrid parse_grid_config(std::istream& in, SweepGrid base) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_grid_value(base, trim(content.substr(0, eq)), trim(content.substr(eq + 1)));
  }
  return base;
}

std::string JobDescriptor::key() const {
  TrainOutcome o;
  o.grammar = {level.level, level.k, instance_seed};
  o.config = config;
  o.split_seed = split_seed;
  o.init_seed = init_seed;
  return key_of_row(to_csv_row(o));
}

std::uint64_t derive_split_seed(std::uint64_t replicate, const LevelSpec& level, std::uint64_t instance_seed) {
  return derive_seed(replicate, "split", {level_code(level), instance_seed});
}

std::uint64_t derive_init_seed(std::uint64_t replicate, const LevelSpec& level, std::uint64_t instance_seed) {
  return derive_seed(replicate, "init", {level_code(level), instance_seed});
}

std::uint64_t derive_corpus_seed(const LevelSpec& level, std::uint64_t instance_seed) {
  return derive_seed(instance_seed, "corpus", {level_code(level)});
}

std::vector<JobDescriptor> enumerate_grid(const SweepGrid& grid) {
  grid.validate();
  std::vector<JobDescriptor> jobs;
  for (const auto& level : grid.levels) {
    for (auto iseed : grid.instance_seeds) {
      for (auto arch : grid.architectures) {
        const std::vector<int> windows = arch == Architecture::FFN ? std::vector<int>{kFullWindow} : grid.window_values;
        for (int neurons : grid.neuron_values) {
          for (int depth : grid.depth_values) {
            for (int lam : grid.lamination_values) {
              for (int window : windows) {
                for (auto rep : grid.replicate_seeds) {
                  JobDescriptor j;
                  j.level = level;
                  j.instance_seed = iseed;
                  j.config = {arch, neurons, depth, lam, window, grid.gru_candidate};
                  j.replicate_seed = rep;
                  j.split_seed = derive_split_seed(rep, level, iseed);
                  j.init_seed = derive_init_seed(rep, level, iseed);
                  jobs.push_back(j);
                }
              }
            }
          }
        }
      }
    }
  }
  return jobs;
}

std::filesystem::path manifest_path(const std::filesystem::path& results) {
  return std::filesystem::path(results.string() + ".manifest");
}

std::string results_csv_header() { return outcome_csv_header() + ",status"; }

SweepReport run_sweep(const SweepGrid& grid, const std::filesystem::path& output, const SweepOptions& options) {
  if (options.parallelism < 1) throw ParameterError("parallelism must be at least 1");
  const auto jobs = enumerate_grid(grid);
  const auto manifest = manifest_path(output);

  std::set<std::string> done;
  if (options.resume && std::filesystem::exists(output) && std::filesystem::exists(manifest)) {
    done = reconcile(output, manifest);
  } else {
    std::ofstream res(output, std::ios::trunc);
    std::ofstream man(manifest, std::ios::trunc);
    if (!res || !man) throw IoError("cannot write results to " + output.string());
    res << results_csv_header() << '\n';
  }

  std::ofstream res(output, std::ios::app);
  std::ofstream man(manifest, std::ios::app);
  if (!res || !man) throw IoError("cannot append to " + output.string());

  std::vector<const JobDescriptor*> pending;
  for (const auto& j : jobs) {
    if (!done.contains(j.key())) pending.push_back(&j);
  }
  SweepReport report;
  report.total_jobs = jobs.size();
  report.already_done = jobs.size() - pending.size();
  const std::size_t budget = std::min(pending.size(), options.max_jobs.value_or(pending.size()));

  // One shared corpus per grammar instance, built before dispatch.
  std::map<GrammarKey, std::vector<LabeledString>> corpora;
  for (std::size_t i = 0; i < budget; ++i) {
    const GrammarKey gk{pending[i]->level, pending[i]->instance_seed};
    if (corpora.contains(gk)) continue;
    const auto instance = generate_instance(gk.level.level, gk.level.k, gk.seed);
    Rng rng(derive_corpus_seed(gk.level, gk.seed));
    corpora.emplace(gk, build_corpus(instance, grid.per_class, rng));
  }

  std::mutex writer;
  std::atomic<std::size_t> next{0};
  std::size_t finished = 0;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= budget) return;
      const JobDescriptor& job = *pending[i];
      std::string row;
      bool failed = false;
      try {
        const auto& corpus = corpora.at({job.level, job.instance_seed});
        const SplitCorpus data = split(corpus, grid.train_fraction, job.split_seed, job.config.window);
        const auto result = train_model(job.config, data, {job.split_seed, job.init_seed}, grid.training,
                                        {job.level.level, job.level.k, job.instance_seed});
        row = to_csv_row(result.outcome) + ",ok";
      } catch (const std::exception& e) {
        failed = true;
        row = job.key() + ",,,,,,error:" + sanitize(e.what());
      }
      std::lock_guard lock(writer);
      res << row << '\n' << std::flush;
      man << job.key() << '\n' << std::flush;
      ++finished;
      ++report.executed;
      if (failed) ++report.failed;
      if (options.progress) options.progress(finished, pending.size());
    }
  };
  {
    std::vector<std::jthread> pool;
    const int threads = std::max(1, std::min<int>(options.parallelism, static_cast<int>(std::max<std::size_t>(budget, 1))));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (!res || !man) throw IoError("failed writing results to " + output.string());
  return report;
}

std::vector<std::string> deterministic_rows(const std::filesystem::path& results) {
  if (!std::filesystem::exists(results)) throw IoError("no results file " + results.string());
  std::vector<std::string> rows;
  for (const auto& line : read_lines(results)) {
    if (line.rfind("level,", 0) == 0) continue;
    auto fields = split_csv_line(line);
    if (fields.size() > kWallTimeColumn) fields.erase(fields.begin() + static_cast<std::ptrdiff_t>(kWallTimeColumn));
    std::string joined;
    for (std::size_t i = 0; i < fields.size(); ++i) joined += (i ? "," : "") + fields[i];
    rows.push_back(std::move(joined));
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace agl

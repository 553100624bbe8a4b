#include "agl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "agl/csv.hpp"

namespace agl {

namespace {

constexpr std::array<Factor, 7> kFactors{Factor::Architecture, Factor::Level,  Factor::K,    Factor::Laminations,
                                         Factor::Window,       Factor::Neurons, Factor::Depth};

constexpr std::array<const char*, 8> kPalette{"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                              "#66a61e", "#e6ab02", "#a6761d", "#666666"};

/// Sort rank of a factor value: hierarchy order for levels, FFN/RNN/GRU for
/// architectures, numeric value otherwise.
long long rank_of(Factor f, const std::string& v) {
  switch (f) {
    case Factor::Level: return static_cast<long long>(parse_level(v));
    case Factor::Architecture: return static_cast<long long>(parse_architecture(v));
    default: return parse_int(v);
  }
}

bool key_less(std::span<const Factor> factors, const std::vector<std::string>& a, const std::vector<std::string>& b) {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    const long long ra = rank_of(factors[i], a[i]);
    const long long rb = rank_of(factors[i], b[i]);
    if (ra != rb) return ra < rb;
  }
  return false;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

struct PanelLayout {
  std::vector<std::vector<std::string>> xs;      // distinct x values (single-element keys)
  std::vector<std::vector<std::string>> series;  // distinct series keys
};

PanelLayout layout_of(const SummaryTable& t) {
  PanelLayout l;
  const std::vector<Factor> xf(t.factors.begin(), t.factors.begin() + 1);
  const std::vector<Factor> sf(t.factors.begin() + 1, t.factors.end());
  for (const auto& g : t.groups) {
    std::vector<std::string> x{g.key[0]};
    std::vector<std::string> s(g.key.begin() + 1, g.key.end());
    if (std::find(l.xs.begin(), l.xs.end(), x) == l.xs.end()) l.xs.push_back(x);
    if (std::find(l.series.begin(), l.series.end(), s) == l.series.end()) l.series.push_back(s);
  }
  std::sort(l.xs.begin(), l.xs.end(), [&](const auto& a, const auto& b) { return key_less(xf, a, b); });
  std::sort(l.series.begin(), l.series.end(), [&](const auto& a, const auto& b) { return key_less(sf, a, b); });
  return l;
}

void render_panel(std::ostringstream& svg, const PlotPanel& panel, double top, std::vector<std::string>& warnings) {
  const SummaryTable& t = panel.table;
  const PanelLayout l = layout_of(t);
  constexpr double left = 70, width = 520, height = 240, legend_x = 610;
  double lo = 100.0, hi = 0.0;
  for (const auto& g : t.groups) {
    lo = std::min(lo, g.percent_interval.lower);
    hi = std::max(hi, g.percent_interval.upper);
  }
  double ymin = std::max(0.0, std::floor(lo / 5.0) * 5.0);
  double ymax = std::min(100.0, std::ceil(hi / 5.0) * 5.0);
  if (ymax - ymin < 5.0) {
    ymin = std::max(0.0, ymax - 5.0);
    ymax = ymin + 5.0;
  }
  auto y_of = [&](double v) { return top + height - (v - ymin) / (ymax - ymin) * height; };
  const double slot = width / static_cast<double>(l.xs.size());
  auto x_of = [&](std::size_t xi, std::size_t si) {
    const double spread = std::min(12.0, slot / static_cast<double>(l.series.size() + 1));
    return left + slot * (static_cast<double>(xi) + 0.5) +
           spread * (static_cast<double>(si) - (static_cast<double>(l.series.size()) - 1.0) / 2.0);
  };

  svg << "<text x=\"" << fmt(left) << "\" y=\"" << fmt(top - 10) << "\" font-size=\"14\">" << xml_escape(panel.title)
      << "</text>\n";
  svg << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" fill=\"none\" stroke=\"#000\"/>\n";
  const double tick = (ymax - ymin) > 20.0 ? 10.0 : ((ymax - ymin) > 10.0 ? 5.0 : 1.0);
  for (double v = ymin; v <= ymax + 1e-9; v += tick) {
    svg << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(y_of(v)) << "\" x2=\"" << fmt(left) << "\" y2=\""
        << fmt(y_of(v)) << "\" stroke=\"#000\"/>"
        << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(y_of(v) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
        << fmt(v) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(18) << "\" y=\"" << fmt(top + height / 2) << "\" font-size=\"12\" transform=\"rotate(-90 18 "
      << fmt(top + height / 2) << ")\" text-anchor=\"middle\">percent correct</text>\n";
  for (std::size_t xi = 0; xi < l.xs.size(); ++xi) {
    svg << "<text x=\"" << fmt(x_of(xi, (l.series.size() - 1) / 2) ) << "\" y=\"" << fmt(top + height + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << xml_escape(l.xs[xi][0]) << "</text>\n";
  }
  svg << "<text x=\"" << fmt(left + width / 2) << "\" y=\"" << fmt(top + height + 36)
      << "\" font-size=\"12\" text-anchor=\"middle\">" << to_string(t.factors[0]) << "</text>\n";

  for (std::size_t si = 0; si < l.series.size(); ++si) {
    const char* colour = kPalette[si % kPalette.size()];
    const std::string label = l.series[si].empty() ? "mean" : join(l.series[si], " / ");
    svg << "<circle cx=\"" << fmt(legend_x) << "\" cy=\"" << fmt(top + 10 + 16 * static_cast<double>(si))
        << "\" r=\"4\" fill=\"" << colour << "\"/><text x=\"" << fmt(legend_x + 10) << "\" y=\""
        << fmt(top + 14 + 16 * static_cast<double>(si)) << "\" font-size=\"11\">" << xml_escape(label) << "</text>\n";
    for (std::size_t xi = 0; xi < l.xs.size(); ++xi) {
      std::vector<std::string> key = l.xs[xi];
      key.insert(key.end(), l.series[si].begin(), l.series[si].end());
      const auto it = std::find_if(t.groups.begin(), t.groups.end(), [&](const GroupSummary& g) { return g.key == key; });
      if (it == t.groups.end()) {
        warnings.push_back(panel.title + ": no rows for " + join(key, "/"));
        continue;
      }
      const double x = x_of(xi, si);
      svg << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y_of(it->percent_interval.lower)) << "\" x2=\"" << fmt(x)
          << "\" y2=\"" << fmt(y_of(it->percent_interval.upper)) << "\" stroke=\"" << colour << "\"/>"
          << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y_of(it->mean_percent)) << "\" r=\"3.5\" fill=\"" << colour
          << "\"/>\n";
    }
  }
}

std::vector<TrainOutcome> filter_architecture(const ResultSet& r, Architecture a) {
  std::vector<TrainOutcome> out;
  for (const auto& row : r.rows) {
    if (row.config.architecture == a) out.push_back(row);
  }
  return out;
}

}  // namespace

std::string_view to_string(Factor f) {
  switch (f) {
    case Factor::Architecture: return "architecture";
    case Factor::Level: return "level";
    case Factor::K: return "k";
    case Factor::Laminations: return "laminations";
    case Factor::Window: return "window";
    case Factor::Neurons: return "neurons";
    case Factor::Depth: return "depth";
  }
  return "?";
}

Factor parse_factor(std::string_view name) {
  for (Factor f : kFactors) {
    if (to_string(f) == name) return f;
  }
  throw ParameterError("unknown factor: " + std::string(name) +
                       " (expected architecture, level, k, laminations, window, neurons or depth)");
}

std::vector<Factor> parse_factors(std::string_view comma_list) {
  std::vector<Factor> out;
  for (const auto& name : split_list(comma_list)) {
    const Factor f = parse_factor(name);
    if (std::find(out.begin(), out.end(), f) != out.end()) throw ParameterError("duplicate factor: " + name);
    out.push_back(f);
  }
  return out;
}

std::string factor_value(Factor f, const TrainOutcome& row) {
  switch (f) {
    case Factor::Architecture: return std::string(to_string(row.config.architecture));
    case Factor::Level: return std::string(to_string(row.grammar.level));
    case Factor::K: return std::to_string(row.grammar.k);
    case Factor::Laminations: return std::to_string(row.config.laminations);
    case Factor::Window: return std::to_string(row.config.window);
    case Factor::Neurons: return std::to_string(row.config.neurons);
    case Factor::Depth: return std::to_string(row.config.depth);
  }
  return {};
}

ResultSet read_results(std::istream& in) {
  ResultSet out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("level,", 0) == 0) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() > static_cast<std::size_t>(kOutcomeColumns) && fields.back().rfind("error", 0) == 0) {
      ++out.error_rows;
      continue;
    }
    out.rows.push_back(parse_outcome_fields(fields));
  }
  return out;
}

ResultSet read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read results " + path.string());
  return read_results(in);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw InputError("mean of an empty list");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

Interval bootstrap_interval(std::span<const double> values, int resamples, double level, Rng& rng) {
  if (values.empty()) throw InputError("bootstrap of an empty list");
  if (resamples < 1) throw ParameterError("resamples must be positive");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("confidence level must lie in (0,1)");
  std::vector<double> means(static_cast<std::size_t>(resamples));
  const std::size_t n = values.size();
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[rng.uniform_index(n)];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto below = static_cast<std::size_t>(std::floor(pos));
    const std::size_t above = std::min(below + 1, means.size() - 1);
    const double frac = pos - static_cast<double>(below);
    return means[below] + frac * (means[above] - means[below]);
  };
  const double alpha = 1.0 - level;
  return {quantile(alpha / 2.0), quantile(1.0 - alpha / 2.0)};
}

SummaryTable aggregate(const ResultSet& results, std::span<const Factor> factors, const AggregateOptions& options) {
  SummaryTable table;
  table.factors.assign(factors.begin(), factors.end());
  table.error_rows = results.error_rows;
  table.bootstrap_seed = options.bootstrap_seed;
  table.resamples = options.resamples;
  table.level = options.level;

  std::map<std::vector<std::string>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& row : results.rows) {
    std::vector<std::string> key;
    for (Factor f : factors) key.push_back(factor_value(f, row));
    auto& [percent, brier] = groups[key];
    percent.push_back(row.percent_correct);
    brier.push_back(row.brier);
  }
  for (auto& [key, values] : groups) {
    auto& [percent, brier] = values;
    std::sort(percent.begin(), percent.end());
    std::sort(brier.begin(), brier.end());
    GroupSummary g;
    g.key = key;
    g.count = percent.size();
    g.mean_percent = mean(percent);
    g.mean_brier = mean(brier);
    const std::string joined = join(key, "|");
    Rng percent_rng(derive_seed(options.bootstrap_seed, "percent", {tag_hash(joined)}));
    Rng brier_rng(derive_seed(options.bootstrap_seed, "brier", {tag_hash(joined)}));
    g.percent_interval = bootstrap_interval(percent, options.resamples, options.level, percent_rng);
    g.brier_interval = bootstrap_interval(brier, options.resamples, options.level, brier_rng);
    table.groups.push_back(std::move(g));
  }
  std::sort(table.groups.begin(), table.groups.end(),
            [&](const GroupSummary& a, const GroupSummary& b) { return key_less(factors, a.key, b.key); });
  return table;
}

void write_summary(std::ostream& out, const SummaryTable& t) {
  out << "# bootstrap_seed=" << t.bootstrap_seed << " resamples=" << t.resamples << " level=" << format_double(t.level)
      << " error_rows=" << t.error_rows << '\n';
  for (Factor f : t.factors) out << to_string(f) << ',';
  out << "count,mean_percent,percent_lower,percent_upper,mean_brier,brier_lower,brier_upper\n";
  for (const auto& g : t.groups) {
    for (const auto& v : g.key) out << v << ',';
    out << g.count << ',' << format_double(g.mean_percent) << ',' << format_double(g.percent_interval.lower) << ','
        << format_double(g.percent_interval.upper) << ',' << format_double(g.mean_brier) << ','
        << format_double(g.brier_interval.lower) << ',' << format_double(g.brier_interval.upper) << '\n';
  }
}

SummaryTable read_summary(std::istream& in) {
  SummaryTable t;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string item;
      while (meta >> item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        if (key == "bootstrap_seed") t.bootstrap_seed = parse_u64(value);
        if (key == "resamples") t.resamples = static_cast<int>(parse_int(value));
        if (key == "level") t.level = parse_double(value);
        if (key == "error_rows") t.error_rows = static_cast<std::size_t>(parse_int(value));
      }
      continue;
    }
    const auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() < 7) throw InputError("summary header too short");
      for (std::size_t i = 0; i + 7 < fields.size(); ++i) t.factors.push_back(parse_factor(fields[i]));
      continue;
    }
    const std::size_t nf = t.factors.size();
    if (fields.size() != nf + 7) throw InputError("summary row has wrong field count: " + line);
    GroupSummary g;
    g.key.assign(fields.begin(), fields.begin() + static_cast<std::ptrdiff_t>(nf));
    g.count = static_cast<std::size_t>(parse_int(fields[nf]));
    g.mean_percent = parse_double(fields[nf + 1]);
    g.percent_interval = {parse_double(fields[nf + 2]), parse_double(fields[nf + 3])};
    g.mean_brier = parse_double(fields[nf + 4]);
    g.brier_interval = {parse_double(fields[nf + 5]), parse_double(fields[nf + 6])};
    t.groups.push_back(std::move(g));
  }
  return t;
}

PlotReport emit_plots(std::span<const PlotPanel> panels, const std::filesystem::path& out_dir, const std::string& name) {
  if (panels.empty()) throw InputError("no panels to plot");
  for (const auto& p : panels) {
    if (p.table.groups.empty() || p.table.factors.empty()) {
      throw InputError("cannot plot an empty summary (" + p.title + ")");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!std::filesystem::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());

  PlotReport report;
  constexpr double panel_height = 320;
  std::ostringstream svg;
  const double total_height = panel_height * static_cast<double>(panels.size()) + 20;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"" << fmt(total_height)
      << "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    render_panel(svg, panels[i], 40 + panel_height * static_cast<double>(i), report.warnings);
  }
  svg << "</svg>\n";
  const auto svg_path = out_dir / (name + ".svg");
  write_text_file(svg_path, svg.str());
  report.files.push_back(svg_path);

  for (std::size_t i = 0; i < panels.size(); ++i) {
    std::ostringstream table;
    write_summary(table, panels[i].table);
    const auto path = out_dir / (panels.size() == 1 ? name + ".csv" : name + "." + std::to_string(i) + ".csv");
    write_text_file(path, table.str());
    report.files.push_back(path);
  }
  return report;
}

PlotReport emit_plots(const SummaryTable& summary, const std::filesystem::path& out_dir, const std::string& name) {
  const PlotPanel panel{name, summary};
  return emit_plots(std::span<const PlotPanel>(&panel, 1), out_dir, name);
}

PlotReport emit_standard_figures(const ResultSet& results, const std::filesystem::path& out_dir,
                                 const AggregateOptions& options) {
  PlotReport report;
  auto merge = [&](PlotReport r) {
    report.files.insert(report.files.end(), r.files.begin(), r.files.end());
    report.warnings.insert(report.warnings.end(), r.warnings.begin(), r.warnings.end());
  };
  auto build = [&](const std::string& name, std::vector<PlotPanel> panels) {
    std::vector<PlotPanel> kept;
    for (auto& p : panels) {
      if (p.table.groups.empty()) {
        report.warnings.push_back(name + ": panel '" + p.title + "' has no rows, omitted");
      } else {
        kept.push_back(std::move(p));
      }
    }
    if (kept.empty()) {
      report.warnings.push_back(name + ": no data, figure not written");
      return;
    }
    merge(emit_plots(std::span<const PlotPanel>(kept), out_dir, name));
  };

  const std::vector<Factor> level_arch{Factor::Level, Factor::Architecture};
  build("fig_architecture", {{"percent correct by grammar and architecture", aggregate(results, level_arch, options)}});

  const std::vector<Factor> level_lam{Factor::Level, Factor::Laminations};
  const std::vector<Factor> arch_lam{Factor::Architecture, Factor::Laminations};
  build("fig_lamination", {{"dense (1) vs laminated (2) by grammar", aggregate(results, level_lam, options)},
                           {"dense (1) vs laminated (2) by architecture", aggregate(results, arch_lam, options)}});

  const std::vector<Factor> window_level{Factor::Window, Factor::Level};
  std::vector<PlotPanel> window_panels;
  for (auto arch : {Architecture::RNN, Architecture::GRU}) {
    ResultSet subset{filter_architecture(results, arch), 0};
    window_panels.push_back(
        {std::string(to_string(arch)) + ": percent correct by input window", aggregate(subset, window_level, options)});
  }
  build("fig_window", std::move(window_panels));
  return report;
}

}  // namespace agl

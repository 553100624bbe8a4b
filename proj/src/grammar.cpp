#include "agl/grammar.hpp"

#include <algorithm>
#include <numeric>

namespace agl {

namespace {

constexpr std::array<int, 4> kMsoPeriods{2, 3, 4, 6};
constexpr std::size_t kCfHalf = kStringLength / 2;
constexpr std::size_t kCsThird = kStringLength / 3;

bool is_subset_letter(const GrammarInstance& g, char c) {
  return g.letter_subset.find(c) != std::string::npos;
}

char random_letter(Rng& rng) { return Alphabet::letter(rng.uniform_index(kAlphabetSize)); }

/// Random successor of `from` allowed by `table` (width 1). Tables built
/// here never have empty rows.
char random_successor(const TransitionTable& table, char from, Rng& rng) {
  const auto& row = table.row(Alphabet::index(from));
  std::array<char, kAlphabetSize> options{};
  std::size_t n = 0;
  for (std::size_t l = 0; l < kAlphabetSize; ++l) {
    if (row[l]) options[n++] = Alphabet::letter(l);
  }
  return options[rng.uniform_index(n)];
}

bool all_windows_legal(const TransitionTable& table, std::string_view text) {
  const std::size_t k = static_cast<std::size_t>(table.context_width()) + 1;
  for (std::size_t end = k; end <= text.size(); ++end) {
    if (!table.allows_window(text.substr(end - k, k))) return false;
  }
  return true;
}

bool is_periodic(std::string_view text, std::size_t period) {
  for (std::size_t i = period; i < text.size(); ++i) {
    if (text[i] != text[i - period]) return false;
  }
  return true;
}

std::string reversed(std::string_view s) { return std::string(s.rbegin(), s.rend()); }

bool is_palindrome(std::string_view s) { return std::equal(s.begin(), s.begin() + s.size() / 2, s.rbegin()); }

/// Fills the free positions (marked '\0') of `pattern` left to right with
/// letters that keep every fully determined k-window legal under `table`.
/// Returns nullopt on a dead end.
std::optional<std::string> fill_walk(const TransitionTable& table, std::string pattern, Rng& rng) {
  const std::size_t k = static_cast<std::size_t>(table.context_width()) + 1;
  const std::size_t n = pattern.size();
  auto known = [&](std::size_t pos, std::size_t filled_upto) {
    return pos <= filled_upto || pattern[pos] != '\0';
  };
  // Checks every window containing position i whose letters are all known.
  auto windows_ok = [&](std::size_t i) {
    for (std::size_t end = i; end < i + k && end < n; ++end) {
      if (end + 1 < k) continue;
      const std::size_t start = end + 1 - k;
      bool complete = true;
      for (std::size_t p = start; p <= end; ++p) complete = complete && known(p, i);
      if (complete && !table.allows_window(std::string_view(pattern).substr(start, k))) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (pattern[i] != '\0') {
      if (i + 1 >= k && !table.allows_window(std::string_view(pattern).substr(i + 1 - k, k))) {
        return std::nullopt;
      }
      continue;
    }
    std::array<char, kAlphabetSize> options{};
    std::size_t count = 0;
    for (char c : Alphabet::letters) {
      pattern[i] = c;
      if (windows_ok(i)) options[count++] = c;
    }
    if (count == 0) return std::nullopt;
    pattern[i] = options[rng.uniform_index(count)];
  }
  return pattern;
}

/// Writes the k-grams at random non-overlapping positions of a blank
/// 12-character pattern. With `keep_order` the grams appear left to right in
/// the given order, otherwise in random order.
std::optional<std::string> plant(const std::vector<std::string>& grams, bool keep_order, Rng& rng) {
  std::string pattern(kStringLength, '\0');
  std::vector<std::size_t> starts;
  const std::size_t k = grams.front().size();
  for (std::size_t g = 0; g < grams.size(); ++g) {
    bool placed = false;
    for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
      const std::size_t s = rng.uniform_index(kStringLength - k + 1);
      placed = std::none_of(starts.begin(), starts.end(),
                            [&](std::size_t o) { return s < o + k && o < s + k; });
      if (placed) starts.push_back(s);
    }
    if (!placed) return std::nullopt;
  }
  if (keep_order) std::sort(starts.begin(), starts.end());
  for (std::size_t g = 0; g < grams.size(); ++g) {
    std::copy(grams[g].begin(), grams[g].end(), pattern.begin() + static_cast<std::ptrdiff_t>(starts[g]));
  }
  return pattern;
}

std::vector<int> mso_periods(int modulus, Label label) {
  std::vector<int> out;
  for (int p : kMsoPeriods) {
    const bool grammatical = (static_cast<int>(kStringLength) / p) % modulus == 0;
    if (grammatical == (label == Label::Grammatical)) out.push_back(p);
  }
  return out;
}

std::vector<std::string> constraint_grams(const GrammarInstance& g) {
  std::vector<std::string> out;
  for (const auto& c : g.constraints) out.push_back(c.kgram);
  return out;
}

/// One proposal from the level's generator; not yet checked by the oracle.
std::optional<std::string> propose(const GrammarInstance& g, Label label, Rng& rng) {
  const bool gram = label == Label::Grammatical;
  switch (g.level) {
    case Level::SL: {
      if (g.k == 1) {
        std::string pool;
        for (char c : Alphabet::letters) {
          if (is_subset_letter(g, c) == gram) pool.push_back(c);
        }
        std::string text(kStringLength, 'a');
        for (auto& c : text) c = pool[rng.uniform_index(pool.size())];
        return text;
      }
      const TransitionTable table = gram ? g.tables[0] : g.tables[0].complement();
      return fill_walk(table, std::string(kStringLength, '\0'), rng);
    }
    case Level::LT: {
      if (!gram) return fill_walk(g.tables[0], std::string(kStringLength, '\0'), rng);
      auto pattern = plant(constraint_grams(g), false, rng);
      if (!pattern) return std::nullopt;
      return fill_walk(g.tables[0], *pattern, rng);
    }
    case Level::LTT: {
      auto grams = constraint_grams(g);
      if (!gram) grams.push_back(grams[rng.uniform_index(grams.size())]);
      auto pattern = plant(grams, false, rng);
      if (!pattern) return std::nullopt;
      return fill_walk(g.tables[0], *pattern, rng);
    }
    case Level::LTTO: {
      auto grams = constraint_grams(g);
      if (!gram) std::reverse(grams.begin(), grams.end());
      auto pattern = plant(grams, true, rng);
      if (!pattern) return std::nullopt;
      return fill_walk(g.tables[0], *pattern, rng);
    }
    case Level::MSO: {
      const auto periods = mso_periods(g.modulus, label);
      const auto period = static_cast<std::size_t>(periods[rng.uniform_index(periods.size())]);
      auto unit = fill_walk(g.tables[0], std::string(period, '\0'), rng);
      if (!unit) return std::nullopt;
      std::string text;
      while (text.size() < kStringLength) text += *unit;
      text.resize(kStringLength);
      return text;
    }
    case Level::CF: {
      if (*g.cf_variant == CfVariant::AnBn) {
        const TransitionTable table = gram ? g.tables[0] : g.tables[0].complement();
        std::string text(kStringLength, 'a');
        for (std::size_t i = 0; i < kCfHalf; ++i) {
          text[i] = random_letter(rng);
          text[i + kCfHalf] = random_successor(table, text[i], rng);
        }
        return text;
      }
      auto half = fill_walk(g.tables[0], std::string(kCfHalf, '\0'), rng);
      if (!half) return std::nullopt;
      const bool repeat = (*g.cf_variant == CfVariant::Repeated) == gram;
      return *half + (repeat ? *half : reversed(*half));
    }
    case Level::CS: {
      const TransitionTable first = gram ? g.tables[0] : g.tables[0].complement();
      const TransitionTable second = gram ? g.tables[1] : g.tables[1].complement();
      std::string text(kStringLength, 'a');
      for (std::size_t i = 0; i < kCsThird; ++i) {
        text[i] = random_letter(rng);
        text[i + kCsThird] = random_successor(first, text[i], rng);
        text[i + 2 * kCsThird] = random_successor(second, text[i + kCsThird], rng);
      }
      return text;
    }
  }
  return std::nullopt;
}

/// Legal k-grams under a table with context width k-1.
std::vector<std::string> legal_kgrams(const TransitionTable& table) {
  std::vector<std::string> out;
  for (std::size_t r = 0; r < table.row_count(); ++r) {
    std::string context;
    if (table.context_width() == 1) {
      context = std::string(1, Alphabet::letter(r));
    } else {
      context = {Alphabet::letter(r / kAlphabetSize), Alphabet::letter(r % kAlphabetSize)};
    }
    for (std::size_t l = 0; l < kAlphabetSize; ++l) {
      if (table.allows(r, l)) out.push_back(context + Alphabet::letter(l));
    }
  }
  return out;
}

GrammarInstance draw_instance(Level level, int k, std::uint64_t seed, const InstanceOptions& options,
                              Rng& rng) {
  GrammarInstance g;
  g.level = level;
  g.k = (level == Level::CF || level == Level::CS) ? 0 : k;
  g.seed = seed;
  const int degree = out_degree_for(level);
  switch (level) {
    case Level::SL:
      if (k == 1) {
        std::array<char, kAlphabetSize> letters = Alphabet::letters;
        rng.shuffle(std::span<char>(letters));
        g.letter_subset.assign(letters.begin(), letters.begin() + kAlphabetSize / 2);
        std::sort(g.letter_subset.begin(), g.letter_subset.end());
      } else {
        g.tables.push_back(TransitionTable::random(k - 1, degree, rng));
      }
      break;
    case Level::LT:
    case Level::LTT:
    case Level::LTTO: {
      g.tables.push_back(TransitionTable::random(k - 1, degree, rng));
      auto grams = legal_kgrams(g.tables[0]);
      rng.shuffle(std::span<std::string>(grams));
      for (std::size_t i = 0; i < 2; ++i) {
        Constraint c{grams[i], 1, std::nullopt};
        if (level != Level::LT) c.max_count = 1;
        g.constraints.push_back(std::move(c));
      }
      g.ordered = level == Level::LTTO;
      break;
    }
    case Level::MSO: {
      g.tables.push_back(TransitionTable::random(k - 1, degree, rng));
      const int drawn = rng.uniform_index(2) == 0 ? 2 : 3;
      g.modulus = options.modulus.value_or(drawn);
      if (g.modulus != 2 && g.modulus != 3) throw ParameterError("MSO modulus must be 2 or 3");
      break;
    }
    case Level::CF: {
      g.tables.push_back(TransitionTable::random(1, degree, rng));
      const auto drawn = static_cast<CfVariant>(rng.uniform_index(3));
      g.cf_variant = options.cf_variant.value_or(drawn);
      break;
    }
    case Level::CS:
      g.tables.push_back(TransitionTable::random(1, degree, rng));
      g.tables.push_back(TransitionTable::random(1, degree, rng));
      break;
  }
  return g;
}

bool can_sample(const GrammarInstance& g, Label label, Rng& rng) {
  for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
    auto text = propose(g, label, rng);
    if (text && oracle_accepts(g, *text) == (label == Label::Grammatical)) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::SL: return "SL";
    case Level::LT: return "LT";
    case Level::LTT: return "LTT";
    case Level::LTTO: return "LTTO";
    case Level::MSO: return "MSO";
    case Level::CF: return "CF";
    case Level::CS: return "CS";
  }
  return "?";
}

std::string_view to_string(CfVariant variant) {
  switch (variant) {
    case CfVariant::Repeated: return "Repeated";
    case CfVariant::Mirrored: return "Mirrored";
    case CfVariant::AnBn: return "AnBn";
  }
  return "?";
}

std::string_view to_string(Label label) {
  return label == Label::Grammatical ? "grammatical" : "ungrammatical";
}

Level parse_level(std::string_view name) {
  for (Level l : kAllLevels) {
    if (to_string(l) == name) return l;
  }
  throw ParameterError("unknown grammar level: " + std::string(name));
}

CfVariant parse_cf_variant(std::string_view name) {
  for (auto v : {CfVariant::Repeated, CfVariant::Mirrored, CfVariant::AnBn}) {
    if (to_string(v) == name) return v;
  }
  throw ParameterError("unknown CF variant: " + std::string(name));
}

Label parse_label(std::string_view name) {
  if (name == "grammatical") return Label::Grammatical;
  if (name == "ungrammatical") return Label::Ungrammatical;
  throw InputError("unknown label: " + std::string(name));
}

TransitionTable::TransitionTable(int context_width, std::vector<Row> rows)
    : context_width_(context_width), out_degree_(0), rows_(std::move(rows)) {
  if (context_width_ != 1 && context_width_ != 2) {
    throw ParameterError("transition context width must be 1 or 2");
  }
  std::size_t expected = context_width_ == 1 ? kAlphabetSize : kAlphabetSize * kAlphabetSize;
  if (rows_.size() != expected) throw ParameterError("transition table has wrong row count");
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const int d = static_cast<int>(std::count(rows_[r].begin(), rows_[r].end(), true));
    if (r == 0) out_degree_ = d;
    if (d != out_degree_) throw ParameterError("transition table rows differ in out-degree");
  }
}

TransitionTable TransitionTable::random(int context_width, int out_degree, Rng& rng) {
  if (context_width != 1 && context_width != 2) {
    throw ParameterError("transition context width must be 1 or 2, got " + std::to_string(context_width));
  }
  if (out_degree != 3 && out_degree != 5) {
    throw ParameterError("transition out-degree must be 3 or 5, got " + std::to_string(out_degree));
  }
  const std::size_t n_rows = context_width == 1 ? kAlphabetSize : kAlphabetSize * kAlphabetSize;
  std::vector<Row> rows(n_rows);
  for (auto& row : rows) {
    std::array<std::size_t, kAlphabetSize> order{};
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Partial Fisher-Yates: the first out_degree slots are a uniform subset.
    for (std::size_t i = 0; i < static_cast<std::size_t>(out_degree); ++i) {
      std::swap(order[i], order[i + rng.uniform_index(kAlphabetSize - i)]);
      row[order[i]] = true;
    }
  }
  return TransitionTable(context_width, std::move(rows));
}

std::size_t TransitionTable::row_index(std::string_view context) const {
  if (context.size() != static_cast<std::size_t>(context_width_)) {
    throw InputError("context length does not match table width");
  }
  std::size_t r = 0;
  for (char c : context) r = r * kAlphabetSize + Alphabet::index(c);
  return r;
}

TransitionTable TransitionTable::complement() const {
  std::vector<Row> rows = rows_;
  for (auto& row : rows) {
    for (auto& cell : row) cell = !cell;
  }
  return TransitionTable(context_width_, std::move(rows));
}

void check_k(Level level, int k) {
  switch (level) {
    case Level::SL:
      if (k < 1 || k > 3) throw ParameterError("SL requires 1 <= k <= 3, got " + std::to_string(k));
      break;
    case Level::LT:
    case Level::LTT:
    case Level::LTTO:
    case Level::MSO:
      if (k < 2 || k > 3) {
        throw ParameterError(std::string(to_string(level)) + " requires 2 <= k <= 3, got " +
                             std::to_string(k));
      }
      break;
    case Level::CF:
    case Level::CS:
      break;
  }
}

int out_degree_for(Level level) {
  return (level == Level::LTTO || level == Level::MSO) ? 5 : 3;
}

GrammarInstance generate_instance(Level level, int k, std::uint64_t seed, const InstanceOptions& options) {
  check_k(level, k);
  for (int attempt = 0; attempt < kInstanceResampleLimit; ++attempt) {
    Rng rng(derive_seed(seed, "instance", {static_cast<std::uint64_t>(attempt)}));
    GrammarInstance g = draw_instance(level, k, seed, options, rng);
    g.resamples = attempt;
    Rng probe(derive_seed(seed, "probe", {static_cast<std::uint64_t>(attempt)}));
    if (can_sample(g, Label::Grammatical, probe) && can_sample(g, Label::Ungrammatical, probe)) return g;
  }
  throw GenerationError("no feasible instance for " + std::string(to_string(level)) +
                        " k=" + std::to_string(k) + " seed=" + std::to_string(seed));
}

LabeledString sample_string(const GrammarInstance& instance, Label label, Rng& rng) {
  const bool want = label == Label::Grammatical;
  for (int attempt = 0; attempt < kRejectionBudget; ++attempt) {
    auto text = propose(instance, label, rng);
    if (text && oracle_accepts(instance, *text) == want) return {std::move(*text), label};
  }
  throw GenerationError("rejection budget exhausted sampling a " + std::string(to_string(label)) +
                        " string for " + describe(instance));
}

int count_occurrences(std::string_view text, std::string_view needle) {
  int n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string_view::npos; pos = text.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

bool oracle_accepts(const GrammarInstance& g, std::string_view text) {
  check_string(text);
  switch (g.level) {
    case Level::SL:
      if (g.k == 1) {
        return std::all_of(text.begin(), text.end(), [&](char c) { return is_subset_letter(g, c); });
      }
      return all_windows_legal(g.tables[0], text);
    case Level::LT:
    case Level::LTT:
    case Level::LTTO: {
      if (!all_windows_legal(g.tables[0], text)) return false;
      for (const auto& c : g.constraints) {
        const int n = count_occurrences(text, c.kgram);
        if (n < c.min_count || (c.max_count && n > *c.max_count)) return false;
      }
      if (g.ordered) {
        std::size_t previous = 0;
        for (std::size_t i = 0; i < g.constraints.size(); ++i) {
          const std::size_t pos = text.find(g.constraints[i].kgram);
          if (i > 0 && pos <= previous) return false;
          previous = pos;
        }
      }
      return true;
    }
    case Level::MSO:
      return std::any_of(kMsoPeriods.begin(), kMsoPeriods.end(), [&](int p) {
        return is_periodic(text, static_cast<std::size_t>(p)) &&
               (static_cast<int>(kStringLength) / p) % g.modulus == 0;
      });
    case Level::CF: {
      const auto& table = g.tables[0];
      if (*g.cf_variant == CfVariant::AnBn) {
        for (std::size_t i = 0; i < kCfHalf; ++i) {
          if (!table.allows(std::string_view(&text[i], 1), text[i + kCfHalf])) return false;
        }
        return true;
      }
      const auto first = text.substr(0, kCfHalf);
      const auto second = text.substr(kCfHalf);
      if (!all_windows_legal(table, first) || is_palindrome(first)) return false;
      return *g.cf_variant == CfVariant::Repeated ? second == first : second == reversed(first);
    }
    case Level::CS:
      for (std::size_t i = 0; i < kCsThird; ++i) {
        if (!g.tables[0].allows(std::string_view(&text[i], 1), text[i + kCsThird])) return false;
        if (!g.tables[1].allows(std::string_view(&text[i + kCsThird], 1), text[i + 2 * kCsThird])) {
          return false;
        }
      }
      return true;
  }
  return false;
}

std::string describe(const GrammarInstance& g) {
  std::string out(to_string(g.level));
  if (g.k > 0) out += " k=" + std::to_string(g.k);
  if (g.modulus > 0) out += " mod=" + std::to_string(g.modulus);
  if (g.cf_variant) out += " variant=" + std::string(to_string(*g.cf_variant));
  out += " seed=" + std::to_string(g.seed);
  return out;
}

}  // namespace agl

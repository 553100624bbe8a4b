#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agl/alphabet.hpp"
#include "agl/random.hpp"

namespace agl {

/// Levels of the combined sub-regular / Chomsky hierarchy, simplest first.
enum class Level { SL, LT, LTT, LTTO, MSO, CF, CS };

inline constexpr std::array<Level, 7> kAllLevels{Level::SL,   Level::LT, Level::LTT, Level::LTTO,
                                                  Level::MSO, Level::CF, Level::CS};

enum class CfVariant { Repeated, Mirrored, AnBn };

enum class Label { Grammatical, Ungrammatical };

std::string_view to_string(Level level);
std::string_view to_string(CfVariant variant);
std::string_view to_string(Label label);
Level parse_level(std::string_view name);
CfVariant parse_cf_variant(std::string_view name);
Label parse_label(std::string_view name);

/// Maximum proposals drawn for a single string before giving up.
inline constexpr int kRejectionBudget = 10'000;

/// Number of fresh instance draws tried before a level/k/seed is declared
/// unusable.
inline constexpr int kInstanceResampleLimit = 100;

/// Adjacency matrix from a context (one letter or one ordered bigram) to the
/// letters that may follow it. Every row has the same number of successors.
class TransitionTable {
 public:
  using Row = std::array<bool, kAlphabetSize>;

  TransitionTable(int context_width, std::vector<Row> rows);

  /// Uniformly random table: each row gets `out_degree` distinct successors.
  /// Width must be 1 or 2 and degree 3 or 5.
  static TransitionTable random(int context_width, int out_degree, Rng& rng);

  int context_width() const { return context_width_; }
  int out_degree() const { return out_degree_; }
  std::size_t row_count() const { return rows_.size(); }
  const Row& row(std::size_t r) const { return rows_[r]; }

  /// Row index of a context string of length context_width().
  std::size_t row_index(std::string_view context) const;

  bool allows(std::size_t row, std::size_t letter) const { return rows_[row][letter]; }
  bool allows(std::string_view context, char next) const {
    return rows_[row_index(context)][Alphabet::index(next)];
  }
  /// True when the last letter of `window` may follow the preceding letters.
  bool allows_window(std::string_view window) const {
    return allows(window.substr(0, window.size() - 1), window.back());
  }

  /// Rowwise set complement; out-degree becomes 6 - out_degree().
  TransitionTable complement() const;

  bool operator==(const TransitionTable&) const = default;

 private:
  int context_width_;
  int out_degree_;
  std::vector<Row> rows_;
};

/// A k-gram that must occur between min_count and max_count times.
struct Constraint {
  std::string kgram;
  int min_count = 1;
  std::optional<int> max_count;

  bool operator==(const Constraint&) const = default;
};

struct GrammarInstance {
  Level level = Level::SL;
  /// Window size; 0 for CF and CS, which do not use one.
  int k = 0;
  /// Counting modulus for MSO (2 or 3), 0 elsewhere.
  int modulus = 0;
  /// One table for transition-based levels, CF and AnBn; two chained tables
  /// (A->B then B->C) for CS; empty for SL k=1.
  std::vector<TransitionTable> tables;
  /// SL k=1 only: the three permitted letters, in alphabet order.
  std::string letter_subset;
  std::vector<Constraint> constraints;
  /// Constraints must first occur in listed order (LTTO).
  bool ordered = false;
  std::optional<CfVariant> cf_variant;
  /// Seed the caller asked for.
  std::uint64_t seed = 0;
  /// Number of infeasible draws skipped before this instance was accepted.
  int resamples = 0;

  bool operator==(const GrammarInstance&) const = default;
};

struct InstanceOptions {
  std::optional<int> modulus;
  std::optional<CfVariant> cf_variant;
};

struct LabeledString {
  std::string text;
  Label label = Label::Grammatical;

  bool operator==(const LabeledString&) const = default;
};

/// Throws ParameterError unless k is valid for the level
/// (SL 1-3, LT/LTT/LTTO/MSO 2-3; CF and CS accept anything).
void check_k(Level level, int k);

/// Out-degree used for the level's transition tables.
int out_degree_for(Level level);

/// Samples a grammar instance. Instances that cannot produce a string of
/// both labels are redrawn from the next derived seed.
GrammarInstance generate_instance(Level level, int k, std::uint64_t seed,
                                  const InstanceOptions& options = {});

/// Draws proposals from the level's generator until the oracle verdict
/// matches `label`; throws GenerationError after kRejectionBudget proposals.
LabeledString sample_string(const GrammarInstance& instance, Label label, Rng& rng);

/// Membership decision. Pure; throws InputError for malformed text.
bool oracle_accepts(const GrammarInstance& instance, std::string_view text);

/// Number of (possibly overlapping) occurrences of `needle` in `text`.
int count_occurrences(std::string_view text, std::string_view needle);

/// Short description such as "LTTO k=3 seed=7".
std::string describe(const GrammarInstance& instance);

}  // namespace agl

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "agl/grammar.hpp"

namespace agl {

/// Network input for one string: `steps` consecutive step vectors of width
/// `step_width`, stored contiguously. The whole-string encoding is the
/// single-step case (window 12, width 72).
struct EncodedExample {
  std::vector<double> features;
  int steps = 0;
  int step_width = 0;
  /// 1 = ungrammatical, 0 = grammatical.
  double target = 0.0;

  std::span<const double> step(int t) const {
    return std::span<const double>(features).subspan(static_cast<std::size_t>(t * step_width),
                                                     static_cast<std::size_t>(step_width));
  }
};

inline constexpr int kFullWindow = static_cast<int>(kStringLength);
inline constexpr int kFullWidth = static_cast<int>(kStringLength * kAlphabetSize);

inline double target_for(Label label) { return label == Label::Ungrammatical ? 1.0 : 0.0; }

/// 72-long concatenation of twelve one-hot letter vectors.
std::vector<double> encode_full(std::string_view text);

/// 12 - w + 1 steps; step j is the one-hot concatenation of letters j..j+w-1.
std::vector<std::vector<double>> encode_windows(std::string_view text, int w);

EncodedExample encode_example(const LabeledString& s, int window);

struct ClassCounts {
  std::size_t grammatical = 0;
  std::size_t ungrammatical = 0;
};

struct SplitCorpus {
  std::vector<EncodedExample> train;
  std::vector<EncodedExample> test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::uint64_t split_seed = 0;
  double train_fraction = 0.8;
  int window = kFullWindow;
  ClassCounts train_counts;
  ClassCounts test_counts;
};

inline constexpr double kDefaultTrainFraction = 0.8;

/// Uniform partition of 0..n-1 without replacement. The train side gets
/// round(n * fraction) indices, clamped so that neither side is empty.
void split_indices(std::size_t n, double train_fraction, Rng& rng, std::vector<std::size_t>& train,
                   std::vector<std::size_t>& test);

SplitCorpus split(std::span<const LabeledString> corpus, double train_fraction, std::uint64_t seed,
                  int window = kFullWindow);

/// Audit file: one "train,<index>" or "test,<index>" line per corpus row.
void write_split_manifest(std::ostream& out, const SplitCorpus& split);

}  // namespace agl

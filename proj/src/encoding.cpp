#include "agl/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace agl {

std::vector<double> encode_full(std::string_view text) {
  check_string(text);
  std::vector<double> out(kStringLength * kAlphabetSize, 0.0);
  for (std::size_t i = 0; i < text.size(); ++i) out[i * kAlphabetSize + Alphabet::index(text[i])] = 1.0;
  return out;
}

std::vector<std::vector<double>> encode_windows(std::string_view text, int w) {
  if (w < 1 || w > kFullWindow) throw ParameterError("window must be in 1..12, got " + std::to_string(w));
  const auto full = encode_full(text);
  const std::size_t width = static_cast<std::size_t>(w) * kAlphabetSize;
  std::vector<std::vector<double>> steps;
  for (std::size_t j = 0; j + static_cast<std::size_t>(w) <= kStringLength; ++j) {
    const auto first = full.begin() + static_cast<std::ptrdiff_t>(j * kAlphabetSize);
    steps.emplace_back(first, first + static_cast<std::ptrdiff_t>(width));
  }
  return steps;
}

EncodedExample encode_example(const LabeledString& s, int window) {
  EncodedExample e;
  for (auto& step : encode_windows(s.text, window)) {
    e.features.insert(e.features.end(), step.begin(), step.end());
    ++e.steps;
  }
  e.step_width = window * static_cast<int>(kAlphabetSize);
  e.target = target_for(s.label);
  return e;
}

void split_indices(std::size_t n, double train_fraction, Rng& rng, std::vector<std::size_t>& train,
                   std::vector<std::size_t>& test) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("train fraction must lie strictly between 0 and 1");
  }
  if (n < 2) throw InputError("corpus needs at least two strings to split");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
}

SplitCorpus split(std::span<const LabeledString> corpus, double train_fraction, std::uint64_t seed, int window) {
  if (corpus.empty()) throw InputError("cannot split an empty corpus");
  SplitCorpus out;
  out.split_seed = seed;
  out.train_fraction = train_fraction;
  out.window = window;
  Rng rng(seed);
  split_indices(corpus.size(), train_fraction, rng, out.train_indices, out.test_indices);
  auto fill = [&](const std::vector<std::size_t>& idx, std::vector<EncodedExample>& dst, ClassCounts& counts) {
    for (std::size_t i : idx) {
      dst.push_back(encode_example(corpus[i], window));
      (corpus[i].label == Label::Grammatical ? counts.grammatical : counts.ungrammatical)++;
    }
  };
  fill(out.train_indices, out.train, out.train_counts);
  fill(out.test_indices, out.test, out.test_counts);
  return out;
}

void write_split_manifest(std::ostream& out, const SplitCorpus& s) {
  out << "# split_seed=" << s.split_seed << " train_fraction=" << s.train_fraction << " train="
      << s.train_indices.size() << " (g=" << s.train_counts.grammatical << ",u=" << s.train_counts.ungrammatical
      << ") test=" << s.test_indices.size() << " (g=" << s.test_counts.grammatical
      << ",u=" << s.test_counts.ungrammatical << ")\n";
  for (std::size_t i : s.train_indices) out << "train," << i << '\n';
  for (std::size_t i : s.test_indices) out << "test," << i << '\n';
}

}  // namespace agl

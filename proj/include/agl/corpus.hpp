#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "agl/grammar.hpp"

namespace agl {

/// `per_class` grammatical strings followed by `per_class` ungrammatical
/// strings, each in generation order. Every label is oracle-checked.
std::vector<LabeledString> build_corpus(const GrammarInstance& instance, int per_class, Rng& rng);

/// Corpus file row: text,label,level,k,instance_seed
struct CorpusRecord {
  LabeledString item;
  Level level = Level::SL;
  int k = 0;
  std::uint64_t instance_seed = 0;

  bool operator==(const CorpusRecord&) const = default;
};

inline constexpr const char* kCorpusHeader = "text,label,level,k,instance_seed";

void write_corpus(std::ostream& out, const GrammarInstance& instance, std::span<const LabeledString> corpus);
std::vector<CorpusRecord> read_corpus(std::istream& in);

}  // namespace agl

#include "agl/corpus.hpp"

#include <istream>
#include <ostream>
#include <set>

#include "agl/csv.hpp"

namespace agl {

std::vector<LabeledString> build_corpus(const GrammarInstance& instance, int per_class, Rng& rng) {
  if (per_class < 1) throw ParameterError("per_class must be at least 1");
  std::vector<LabeledString> corpus;
  corpus.reserve(2 * static_cast<std::size_t>(per_class));
  for (Label label : {Label::Grammatical, Label::Ungrammatical}) {
    for (int i = 0; i < per_class; ++i) corpus.push_back(sample_string(instance, label, rng));
  }
  std::set<std::string> grammatical;
  for (const auto& s : corpus) {
    if (s.label == Label::Grammatical) grammatical.insert(s.text);
  }
  for (const auto& s : corpus) {
    if (s.label == Label::Ungrammatical && grammatical.contains(s.text)) {
      throw GenerationError("string '" + s.text + "' sampled under both labels for " + describe(instance));
    }
  }
  return corpus;
}

void write_corpus(std::ostream& out, const GrammarInstance& instance, std::span<const LabeledString> corpus) {
  out << kCorpusHeader << '\n';
  for (const auto& s : corpus) {
    out << s.text << ',' << to_string(s.label) << ',' << to_string(instance.level) << ',' << instance.k << ','
        << instance.seed << '\n';
  }
}

std::vector<CorpusRecord> read_corpus(std::istream& in) {
  std::vector<CorpusRecord> records;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("text,", 0) == 0) continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw InputError("corpus row must have 5 fields: " + line);
    CorpusRecord r;
    check_string(f[0]);
    r.item = {f[0], parse_label(f[1])};
    r.level = parse_level(f[2]);
    r.k = static_cast<int>(parse_int(f[3]));
    r.instance_seed = parse_u64(f[4]);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace agl

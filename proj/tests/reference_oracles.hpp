#pragma once

// Second implementations used as test oracles. They are written directly
// from the definitions with plain loops and share no code with the library
// beyond the data types they read.

#include <cmath>
#include <string>
#include <vector>

#include "agl/grammar.hpp"
#include "agl/network.hpp"

namespace agl::oracle {

inline int letter_of(char c) { return c - 'a'; }

inline bool table_row_allows(const TransitionTable& t, const std::string& context, char next) {
  int row = 0;
  for (char c : context) row = row * 6 + letter_of(c);
  return t.row(static_cast<std::size_t>(row))[static_cast<std::size_t>(letter_of(next))];
}

/// Every start position where `gram` occurs, by scanning all substrings.
inline std::vector<int> positions_of(const std::string& text, const std::string& gram) {
  std::vector<int> out;
  for (int i = 0; i + static_cast<int>(gram.size()) <= static_cast<int>(text.size()); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < gram.size(); ++j) match = match && text[static_cast<std::size_t>(i) + j] == gram[j];
    if (match) out.push_back(i);
  }
  return out;
}

/// MSO acceptance by enumerating factorizations: the string equals its first
/// p letters repeated 12/p times for some p in {2,3,4,6} with 12/p = 0 mod n.
inline bool mso_brute_force(const std::string& text, int modulus) {
  for (int p : {2, 3, 4, 6}) {
    const int reps = 12 / p;
    std::string rebuilt;
    for (int r = 0; r < reps; ++r) rebuilt += text.substr(0, static_cast<std::size_t>(p));
    if (rebuilt == text && reps % modulus == 0) return true;
  }
  return false;
}

/// Membership for the transition/constraint levels (SL, LT, LTT, LTTO).
inline bool local_brute_force(const GrammarInstance& g, const std::string& text) {
  if (g.level == Level::SL && g.k == 1) {
    for (char c : text) {
      if (g.letter_subset.find(c) == std::string::npos) return false;
    }
    return true;
  }
  const int k = g.k;
  for (int start = 0; start + k <= 12; ++start) {
    const std::string w = text.substr(static_cast<std::size_t>(start), static_cast<std::size_t>(k));
    if (!table_row_allows(g.tables[0], w.substr(0, static_cast<std::size_t>(k - 1)), w.back())) return false;
  }
  std::vector<int> firsts;
  for (const auto& c : g.constraints) {
    const auto pos = positions_of(text, c.kgram);
    const int n = static_cast<int>(pos.size());
    if (n < c.min_count) return false;
    if (c.max_count && n > *c.max_count) return false;
    firsts.push_back(pos.empty() ? -1 : pos.front());
  }
  if (g.ordered) {
    for (std::size_t i = 1; i < firsts.size(); ++i) {
      if (!(firsts[i - 1] < firsts[i])) return false;
    }
  }
  return true;
}

/// Plain-loop forward pass for one example.
class ReferenceNetwork {
 public:
  explicit ReferenceNetwork(const Parameters& p) : p_(p) {}

  double probability(const EncodedExample& e) const {
    const NetworkConfig& c = p_.config;
    const int H = c.neurons;
    const int per = tensors_per_layer(c.architecture);
    std::vector<std::vector<double>> inputs;
    for (int t = 0; t < e.steps; ++t) {
      inputs.emplace_back(e.features.begin() + t * e.step_width, e.features.begin() + (t + 1) * e.step_width);
    }
    for (int l = 0; l < c.depth; ++l) {
      auto T = [&](int off) -> const Eigen::MatrixXd& { return p_.tensors[static_cast<std::size_t>(l * per + off)].value; };
      std::vector<double> h(static_cast<std::size_t>(H), 0.0);
      std::vector<std::vector<double>> outputs;
      for (const auto& x : inputs) {
        std::vector<double> next(static_cast<std::size_t>(H));
        if (c.architecture == Architecture::FFN) {
          for (int i = 0; i < H; ++i) next[i] = relu(affine(T(0), x, i) + T(1)(i, 0));
        } else if (c.architecture == Architecture::RNN) {
          for (int i = 0; i < H; ++i) next[i] = relu(affine(T(0), x, i) + affine(T(1), h, i) + T(2)(i, 0));
        } else {
          std::vector<double> z(H), r(H), rh(H);
          for (int i = 0; i < H; ++i) {
            z[i] = logistic(affine(T(0), x, i) + affine(T(1), h, i) + T(2)(i, 0));
            r[i] = logistic(affine(T(3), x, i) + affine(T(4), h, i) + T(5)(i, 0));
          }
          for (int i = 0; i < H; ++i) rh[i] = r[i] * h[i];
          for (int i = 0; i < H; ++i) {
            const double a = affine(T(6), x, i) + affine(T(7), rh, i) + T(8)(i, 0);
            const double cand = c.gru_candidate == Candidate::Tanh ? std::tanh(a) : relu(a);
            next[i] = (1.0 - z[i]) * h[i] + z[i] * cand;
          }
        }
        h = next;
        outputs.push_back(next);
      }
      inputs = outputs;
    }
    const auto& top = inputs.back();
    const auto& v = p_.tensors[static_cast<std::size_t>(c.depth * per)].value;
    double logit = p_.tensors[static_cast<std::size_t>(c.depth * per + 1)].value(0, 0);
    for (int i = 0; i < H; ++i) logit += v(0, i) * top[static_cast<std::size_t>(i)];
    return logistic(logit);
  }

 private:
  static double relu(double x) { return x > 0 ? x : 0.0; }
  static double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
  static double affine(const Eigen::MatrixXd& m, const std::vector<double>& x, int row) {
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += m(row, static_cast<Eigen::Index>(j)) * x[j];
    return s;
  }

  const Parameters& p_;
};

}  // namespace agl::oracle

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "agl/errors.hpp"

namespace agl {

inline constexpr std::size_t kAlphabetSize = 6;
inline constexpr std::size_t kStringLength = 12;

/// The six-letter terminal alphabet. Letter order defines one-hot indices.
struct Alphabet {
  static constexpr std::array<char, kAlphabetSize> letters{'a', 'b', 'c', 'd', 'e', 'f'};

  static constexpr bool contains(char c) { return c >= 'a' && c <= 'f'; }

  static constexpr std::size_t index(char c) {
    if (!contains(c)) throw InputError(std::string("character outside alphabet: '") + c + "'");
    return static_cast<std::size_t>(c - 'a');
  }

  static constexpr char letter(std::size_t i) { return letters[i]; }
};

/// Throws InputError unless `text` is exactly 12 letters from the alphabet.
inline void check_string(std::string_view text) {
  if (text.size() != kStringLength) {
    throw InputError("string must have length 12, got " + std::to_string(text.size()) + ": '" +
                     std::string(text) + "'");
  }
  for (char c : text) (void)Alphabet::index(c);
}

}  // namespace agl

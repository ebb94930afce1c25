#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "idpf/unicode.hpp"

namespace idpf::match {

// The text as every strategy sees it: one code point per slot, simple-case
// folded unless the matcher is case-sensitive, every whitespace character
// replaced by U+0020. Slot i covers bytes [offset(i), offset(i+1)) of the
// original, so candidates found in slot space map back to splice-safe byte
// offsets.
class FoldedText {
 public:
  FoldedText(std::string_view text, bool case_sensitive) {
    chars_.reserve(text.size());
    offsets_.reserve(text.size() + 1);
    flags_.reserve(text.size());
    for (std::size_t pos = 0; pos < text.size();) {
      offsets_.push_back(pos);
      char32_t cp = unicode::next_char(text, pos);
      std::uint8_t flags = 0;
      if (unicode::is_word_char(cp)) flags |= kWord;
      if (unicode::is_decimal_digit(cp)) flags |= kDigit;
      if (unicode::is_space(cp)) {
        cp = U' ';
      } else if (!case_sensitive) {
        cp = unicode::fold_char(cp);
      }
      chars_.push_back(cp);
      flags_.push_back(flags);
    }
    offsets_.push_back(text.size());
  }

  std::size_t size() const noexcept { return chars_.size(); }
  const std::u32string& chars() const noexcept { return chars_; }
  char32_t operator[](std::size_t i) const { return chars_[i]; }
  std::size_t byte_offset(std::size_t slot) const { return offsets_[slot]; }

  bool is_word(std::size_t i) const { return flags_[i] & kWord; }
  bool is_digit(std::size_t i) const { return flags_[i] & kDigit; }

  // A match may start at slot i only if the preceding character is not a word
  // character, and may end before slot j only if slot j is not one.
  bool can_start(std::size_t i) const { return i == 0 || !is_word(i - 1); }
  bool can_end(std::size_t j) const { return j == size() || !is_word(j); }

 private:
  static constexpr std::uint8_t kWord = 1;
  static constexpr std::uint8_t kDigit = 2;

  std::u32string chars_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint8_t> flags_;
};

// A candidate in slot coordinates, before overlap resolution.
struct Candidate {
  std::size_t start;
  std::size_t end;
  std::uint32_t term;
};

// Leftmost-then-longest, non-overlapping. On an exact tie a term beats a
// digit run (numerals carry the largest id).
inline void select_leftmost_longest(std::vector<Candidate>& candidates) {
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;
    return a.term < b.term;
  });
  std::size_t out = 0;
  std::size_t resume = 0;
  for (const auto& c : candidates) {
    if (c.start < resume) continue;
    candidates[out++] = c;
    resume = c.end;
  }
  candidates.resize(out);
}

inline void append_digit_runs(const FoldedText& text, std::uint32_t numeral_id, std::vector<Candidate>& out) {
  for (std::size_t i = 0; i < text.size();) {
    if (!text.is_digit(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && text.is_digit(j)) ++j;
    out.push_back({i, j, numeral_id});
    i = j;
  }
}

}  // namespace idpf::match

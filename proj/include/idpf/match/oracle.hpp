#pragma once

#include <string_view>
#include <vector>

#include "idpf/match/span.hpp"
#include "idpf/term.hpp"
#include "idpf/unicode.hpp"

namespace idpf {

// Brute-force reference matcher: every character position is tried against
// every term, with the boundary rules checked explicitly on the raw text.
// Quadratic-ish; meant for inputs of a few thousand characters and as ground
// truth for the compiled strategies. Shares no code with Matcher beyond the
// per-character Unicode predicates.
inline std::vector<MatchSpan> oracle_matches(const TermSet& terms, std::string_view text, bool numeral_mode = false) {
  struct Char {
    std::size_t offset;
    char32_t cp;
  };
  std::vector<Char> chars;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t at = pos;
    chars.push_back({at, unicode::next_char(text, pos)});
  }
  const std::size_t n = chars.size();
  auto offset = [&](std::size_t i) { return i < n ? chars[i].offset : text.size(); };
  auto word_at = [&](std::size_t i) { return unicode::is_word_char(chars[i].cp); };

  std::vector<std::u32string> patterns;
  patterns.reserve(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t) patterns.push_back(unicode::to_u32(terms.key(t)));

  // best[i] = (end, term) of the longest candidate starting at character i.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> best_end(n, kNone);
  std::vector<std::uint32_t> best_term(n, MatchSpan::kNumeral);

  auto offer = [&](std::size_t start, std::size_t end, std::uint32_t term) {
    if (best_end[start] == kNone || end > best_end[start] ||
        (end == best_end[start] && term < best_term[start])) {
      best_end[start] = end;
      best_term[start] = term;
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && word_at(i - 1)) continue;
    for (std::size_t t = 0; t < patterns.size(); ++t) {
      const std::u32string& p = patterns[t];
      if (i + p.size() > n) continue;
      bool ok = true;
      for (std::size_t k = 0; k < p.size() && ok; ++k) {
        const char32_t c = chars[i + k].cp;
        if (p[k] == U' ') {
          ok = unicode::is_space(c);
        } else {
          ok = !unicode::is_space(c) && (terms.case_sensitive() ? c : unicode::fold_char(c)) == p[k];
        }
      }
      if (!ok) continue;
      const std::size_t j = i + p.size();
      if (j < n && word_at(j)) continue;
      offer(i, j, static_cast<std::uint32_t>(t));
    }
  }

  if (numeral_mode) {
    for (std::size_t i = 0; i < n;) {
      if (!unicode::is_decimal_digit(chars[i].cp)) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < n && unicode::is_decimal_digit(chars[j].cp)) ++j;
      offer(i, j, MatchSpan::kNumeral);
      i = j;
    }
  }

  std::vector<MatchSpan> spans;
  for (std::size_t i = 0; i < n;) {
    if (best_end[i] == kNone) {
      ++i;
      continue;
    }
    spans.push_back({offset(i), offset(best_end[i]), best_term[i]});
    i = best_end[i];
  }
  return spans;
}

}  // namespace idpf

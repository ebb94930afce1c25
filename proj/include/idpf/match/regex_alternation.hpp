#pragma once

#include <unicode/regex.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "idpf/error.hpp"
#include "idpf/match/folded_text.hpp"
#include "idpf/term.hpp"

namespace idpf::match {

// All keywords joined into one ICU pattern,
//   (?<![\p{L}\p{Nd}_])(?:longest|...|shortest)(?![\p{L}\p{Nd}_])
// run over the folded text. Alternation is ordered, so listing keywords by
// descending length makes each match the longest one valid at the leftmost
// position.
class RegexAlternation {
 public:
  explicit RegexAlternation(const TermSet& terms) : terms_(&terms) {
    if (terms.empty()) return;
    std::vector<std::size_t> order(terms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return terms.chars(a).size() > terms.chars(b).size(); });

    std::u32string pattern = U"(?<![\\p{L}\\p{Nd}_])(?:";
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k) pattern.push_back(U'|');
      for (char32_t ch : terms.chars(order[k])) {
        const bool ascii_alnum = (ch >= U'a' && ch <= U'z') || (ch >= U'A' && ch <= U'Z') || (ch >= U'0' && ch <= U'9');
        if (ch < 0x80 && !ascii_alnum) pattern.push_back(U'\\');
        pattern.push_back(ch);
      }
    }
    pattern += U")(?![\\p{L}\\p{Nd}_])";

    UErrorCode status = U_ZERO_ERROR;
    UParseError parse_error;
    const auto source =
        icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(pattern.data()), static_cast<int32_t>(pattern.size()));
    pattern_.reset(icu::RegexPattern::compile(source, 0, parse_error, status));
    if (U_FAILURE(status)) {
      throw Error(ErrorCode::InvalidTerm, std::string("regex compilation failed: ") + u_errorName(status));
    }
  }

  void scan(const FoldedText& text, std::vector<Candidate>& out) const {
    if (!pattern_ || text.size() == 0) return;
    const std::u32string& chars = text.chars();
    const auto input = icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(chars.data()),
                                                     static_cast<int32_t>(chars.size()));
    // UTF-16 unit index -> slot index.
    std::vector<std::size_t> slot_of(static_cast<std::size_t>(input.length()) + 1);
    {
      std::size_t unit = 0;
      for (std::size_t slot = 0; slot < chars.size(); ++slot) {
        slot_of[unit++] = slot;
        if (chars[slot] > 0xFFFF) slot_of[unit++] = slot;
      }
      slot_of[unit] = chars.size();
    }

    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::RegexMatcher> matcher(pattern_->matcher(input, status));
    if (U_FAILURE(status)) return;
    while (matcher->find(status) && U_SUCCESS(status)) {
      const std::size_t begin = slot_of[static_cast<std::size_t>(matcher->start(status))];
      const std::size_t end = slot_of[static_cast<std::size_t>(matcher->end(status))];
      // The matched slice is exactly some keyword's key.
      const std::string key = unicode::to_utf8(std::u32string_view(chars).substr(begin, end - begin));
      out.push_back({begin, end, static_cast<std::uint32_t>(terms_->find(key))});
    }
  }

 private:
  const TermSet* terms_;
  std::shared_ptr<icu::RegexPattern> pattern_;
};

}  // namespace idpf::match

#pragma once

#include <cstdint>
#include <vector>

#include "idpf/match/folded_text.hpp"
#include "idpf/term.hpp"

namespace idpf::match {

// One Knuth-Morris-Pratt automaton per keyword; the text is scanned once per
// keyword and every boundary-respecting occurrence becomes a candidate.
class KmpPerKeyword {
 public:
  explicit KmpPerKeyword(const TermSet& terms) : terms_(&terms) {
    std::size_t total = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) total += terms.chars(i).size();
    failure_.resize(total);
    starts_.reserve(terms.size() + 1);
    std::size_t base = 0;
    for (std::size_t t = 0; t < terms.size(); ++t) {
      starts_.push_back(base);
      const std::u32string& pattern = terms.chars(t);
      std::uint32_t* fail = failure_.data() + base;
      fail[0] = 0;
      std::uint32_t k = 0;
      for (std::size_t i = 1; i < pattern.size(); ++i) {
        while (k > 0 && pattern[i] != pattern[k]) k = fail[k - 1];
        if (pattern[i] == pattern[k]) ++k;
        fail[i] = k;
      }
      base += pattern.size();
    }
    starts_.push_back(base);
  }

  void scan(const FoldedText& text, std::vector<Candidate>& out) const {
    const std::u32string& hay = text.chars();
    for (std::size_t t = 0; t < terms_->size(); ++t) {
      const std::u32string& pattern = terms_->chars(t);
      const std::uint32_t* fail = failure_.data() + starts_[t];
      const std::size_t m = pattern.size();
      std::size_t k = 0;
      for (std::size_t i = 0; i < hay.size(); ++i) {
        while (k > 0 && hay[i] != pattern[k]) k = fail[k - 1];
        if (hay[i] == pattern[k]) ++k;
        if (k == m) {
          const std::size_t start = i + 1 - m;
          if (text.can_start(start) && text.can_end(i + 1)) {
            out.push_back({start, i + 1, static_cast<std::uint32_t>(t)});
          }
          k = fail[k - 1];
        }
      }
    }
  }

 private:
  const TermSet* terms_;
  std::vector<std::uint32_t> failure_;
  std::vector<std::size_t> starts_;
};

}  // namespace idpf::match

#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "idpf/match/folded_text.hpp"
#include "idpf/match/kmp_per_keyword.hpp"
#include "idpf/match/regex_alternation.hpp"
#include "idpf/match/span.hpp"
#include "idpf/match/trie_keyword_processor.hpp"
#include "idpf/term.hpp"

namespace idpf {

enum class MatchStrategy { RegexAlternation, KmpPerKeyword, TrieKeywordProcessor };

inline constexpr MatchStrategy kAllStrategies[] = {MatchStrategy::RegexAlternation, MatchStrategy::KmpPerKeyword,
                                                   MatchStrategy::TrieKeywordProcessor};

constexpr std::string_view to_string(MatchStrategy s) {
  switch (s) {
    case MatchStrategy::RegexAlternation: return "regex";
    case MatchStrategy::KmpPerKeyword: return "kmp";
    case MatchStrategy::TrieKeywordProcessor: return "trie";
  }
  return "trie";
}

inline std::optional<MatchStrategy> parse_strategy(std::string_view name) {
  if (name == "regex" || name == "RegexAlternation") return MatchStrategy::RegexAlternation;
  if (name == "kmp" || name == "KmpPerKeyword") return MatchStrategy::KmpPerKeyword;
  if (name == "trie" || name == "TrieKeywordProcessor" || name == "flashtext") return MatchStrategy::TrieKeywordProcessor;
  return std::nullopt;
}

struct MatchOptions {
  bool case_sensitive = false;
  // Also report maximal runs of decimal digits as numeral spans.
  bool numeral_mode = false;
};

// A compiled, immutable keyword matcher. Copies share the compiled state and
// may be used from any number of threads.
class Matcher {
 public:
  static Matcher compile(std::shared_ptr<const TermSet> terms, MatchStrategy strategy, bool numeral_mode = false) {
    const auto begin = std::chrono::steady_clock::now();
    Matcher m;
    m.terms_ = std::move(terms);
    m.strategy_ = strategy;
    m.numeral_mode_ = numeral_mode;
    switch (strategy) {
      case MatchStrategy::RegexAlternation:
        m.impl_ = std::make_shared<Impl>(match::RegexAlternation(*m.terms_));
        break;
      case MatchStrategy::KmpPerKeyword:
        m.impl_ = std::make_shared<Impl>(match::KmpPerKeyword(*m.terms_));
        break;
      case MatchStrategy::TrieKeywordProcessor:
        m.impl_ = std::make_shared<Impl>(match::TrieKeywordProcessor(*m.terms_));
        break;
    }
    m.compile_duration_ = std::chrono::steady_clock::now() - begin;
    return m;
  }

  static Matcher compile(std::vector<Term> terms, MatchStrategy strategy, MatchOptions options = {}) {
    return compile(std::make_shared<const TermSet>(std::move(terms), options.case_sensitive), strategy,
                   options.numeral_mode);
  }

  std::vector<MatchSpan> find_matches(std::string_view text) const {
    const match::FoldedText folded(text, terms_->case_sensitive());
    std::vector<match::Candidate> candidates;
    std::visit([&](const auto& impl) { impl.scan(folded, candidates); }, *impl_);
    if (numeral_mode_) match::append_digit_runs(folded, MatchSpan::kNumeral, candidates);
    match::select_leftmost_longest(candidates);

    std::vector<MatchSpan> spans;
    spans.reserve(candidates.size());
    for (const auto& c : candidates) spans.push_back({folded.byte_offset(c.start), folded.byte_offset(c.end), c.term});
    return spans;
  }

  const TermSet& terms() const noexcept { return *terms_; }
  const std::shared_ptr<const TermSet>& shared_terms() const noexcept { return terms_; }
  MatchStrategy strategy() const noexcept { return strategy_; }
  bool numeral_mode() const noexcept { return numeral_mode_; }
  bool case_sensitive() const noexcept { return terms_->case_sensitive(); }
  std::chrono::nanoseconds compile_duration() const noexcept { return compile_duration_; }

 private:
  using Impl = std::variant<match::RegexAlternation, match::KmpPerKeyword, match::TrieKeywordProcessor>;

  Matcher() = default;

  std::shared_ptr<const TermSet> terms_;
  std::shared_ptr<const Impl> impl_;
  MatchStrategy strategy_ = MatchStrategy::TrieKeywordProcessor;
  bool numeral_mode_ = false;
  std::chrono::nanoseconds compile_duration_{0};
};

}  // namespace idpf

#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "idpf/match.hpp"
#include "idpf/policy.hpp"
#include "idpf/unicode.hpp"
#include "idpf/vocab.hpp"

namespace idpf::filter {

struct ReportSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string source;
  friend bool operator==(const ReportSpan&, const ReportSpan&) = default;
};

// Spans refer to byte offsets in the original text.
struct FilterReport {
  std::size_t total_masked = 0;
  std::map<std::string, std::size_t> by_source;
  std::vector<ReportSpan> spans;
  policy::Timestamp timestamp{};
};

struct FilterResult {
  std::string filtered_text;
  FilterReport report;
};

namespace detail {

// Pattern matches (digit runs, links) are attributed to the matched text so
// a sender can whitelist one specific number or URL. Terms are capped at
// Term::kMaxChars, so longer matches are keyed by their leading characters.
inline Term pattern_term(std::string_view text) {
  std::size_t pos = 0;
  for (std::size_t chars = 0; pos < text.size() && chars < Term::kMaxChars; ++chars) (void)unicode::next_char(text, pos);
  return Term::make(text.substr(0, pos));
}

}  // namespace detail

// The effective blacklist compiled into a matcher, plus the table that maps
// each matcher term back to its owned entries.
class CompiledPolicy {
 public:
  static CompiledPolicy compile(const policy::EffectivePolicy& effective, MatchStrategy strategy) {
    CompiledPolicy out;
    std::vector<Term> terms;
    std::vector<Term> prefixes;
    for (const auto& e : effective.blacklist) {
      if (e.kind == policy::OwnerKind::System && e.category == vocab::CategoryId::Links) {
        prefixes.push_back(e.term);
      } else {
        terms.push_back(e.term);
      }
    }
    out.matcher_ = std::make_shared<const Matcher>(
        Matcher::compile(std::move(terms), strategy, MatchOptions{false, effective.scheme.numerals_enabled()}));
    out.prefixes_ = std::make_shared<const TermSet>(std::move(prefixes));

    const TermSet& set = out.matcher_->terms();
    out.owners_.resize(set.size());
    for (const auto& e : effective.blacklist) {
      if (e.kind == policy::OwnerKind::System && e.category == vocab::CategoryId::Links) continue;
      out.owners_[set.find(e.term.normalized())].push_back(e);
    }
    return out;
  }

  std::vector<policy::AttributedSpan> attribute(std::string_view text) const {
    std::vector<match::Candidate> candidates;
    for (const auto& s : matcher_->find_matches(text)) candidates.push_back({s.start, s.end, s.term});
    // Link ids sit just below the numeral id so that on a tie a term wins.
    const auto link_base = MatchSpan::kNumeral - static_cast<std::uint32_t>(prefixes_->size()) - 1;
    for (const auto& s : vocab::find_link_spans(*prefixes_, text)) {
      candidates.push_back({s.start, s.end, link_base + s.term});
    }
    match::select_leftmost_longest(candidates);

    std::vector<policy::AttributedSpan> spans;
    spans.reserve(candidates.size());
    for (const auto& c : candidates) {
      policy::AttributedSpan span{c.start, c.end, {}};
      const std::string_view slice = text.substr(c.start, c.end - c.start);
      if (c.term == MatchSpan::kNumeral) {
        span.entries.push_back(
            {detail::pattern_term(slice), policy::OwnerKind::System, {}, vocab::CategoryId::Numerals});
      } else if (c.term >= link_base) {
        span.entries.push_back({detail::pattern_term(slice), policy::OwnerKind::System, {}, vocab::CategoryId::Links});
      } else {
        span.entries = owners_[c.term];
      }
      spans.push_back(std::move(span));
    }
    return spans;
  }

  const Matcher& matcher() const noexcept { return *matcher_; }

 private:
  std::shared_ptr<const Matcher> matcher_;
  std::shared_ptr<const TermSet> prefixes_;
  std::vector<std::vector<policy::OwnedEntry>> owners_;
};

// Masks the resolved spans and builds the report.
inline FilterResult apply(const policy::EffectivePolicy& effective, std::string_view text,
                          const policy::Resolution& resolution) {
  FilterResult result;
  std::vector<MatchSpan> masked;
  masked.reserve(resolution.masked.size());
  for (const auto& r : resolution.masked) {
    masked.push_back({r.start, r.end, 0});
    const std::string source = policy::source_label(r.entry);
    result.report.spans.push_back({r.start, r.end, source});
    ++result.report.by_source[source];
  }
  result.report.total_masked = masked.size();
  result.filtered_text = apply_mask(text, masked, effective.scheme.placeholder);
  result.report.timestamp = policy::now();
  return result;
}

inline FilterResult filter_text(const policy::EffectivePolicy& effective, std::string_view text,
                                MatchStrategy strategy = MatchStrategy::TrieKeywordProcessor) {
  const auto compiled = CompiledPolicy::compile(effective, strategy);
  return apply(effective, text, policy::resolve(effective, compiled.attribute(text)));
}

}  // namespace idpf::filter

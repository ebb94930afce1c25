#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "idpf/error.hpp"
#include "idpf/unicode.hpp"

namespace idpf {

// A blacklist / whitelist vocabulary item. `normalized` is the case-folded,
// whitespace-collapsed form used for identity and matching; `collapsed` keeps
// the original case and is what a case-sensitive matcher compares against.
class Term {
 public:
  static constexpr std::size_t kMaxChars = 256;

  static Term make(std::string_view surface) {
    if (!unicode::is_valid_utf8(surface)) throw Error(ErrorCode::InvalidTerm, "term is not valid UTF-8");
    Term t;
    t.surface_ = std::string(surface);
    std::size_t chars = 0;
    bool pending_space = false;
    bool has_word = false;
    for (std::size_t pos = 0; pos < surface.size();) {
      const char32_t cp = unicode::next_char(surface, pos);
      ++chars;
      if (unicode::is_space(cp)) {
        pending_space = !t.collapsed_.empty();
        continue;
      }
      if (pending_space) {
        t.collapsed_.push_back(' ');
        t.normalized_.push_back(' ');
        pending_space = false;
      }
      has_word = has_word || unicode::is_word_char(cp);
      unicode::append_utf8(t.collapsed_, cp);
      unicode::append_utf8(t.normalized_, unicode::fold_char(cp));
    }
    if (chars == 0 || chars > kMaxChars) {
      throw Error(ErrorCode::InvalidTerm, "term length must be 1.." + std::to_string(kMaxChars) +
                                              " characters: \"" + t.surface_ + "\"");
    }
    if (t.normalized_.empty()) throw Error(ErrorCode::InvalidTerm, "whitespace-only term: \"" + t.surface_ + "\"");
    if (!has_word) throw Error(ErrorCode::InvalidTerm, "term has no word character: \"" + t.surface_ + "\"");
    return t;
  }

  const std::string& surface() const noexcept { return surface_; }
  const std::string& normalized() const noexcept { return normalized_; }
  const std::string& collapsed() const noexcept { return collapsed_; }
  const std::string& key(bool case_sensitive) const noexcept { return case_sensitive ? collapsed_ : normalized_; }

  friend bool operator==(const Term& a, const Term& b) { return a.normalized_ == b.normalized_; }

 private:
  Term() = default;

  std::string surface_;
  std::string normalized_;
  std::string collapsed_;
};

// Deduplicated term collection ordered by match key. Matchers and the oracle
// both index terms through a TermSet, so a span's term id means the same
// thing on either side.
class TermSet {
 public:
  TermSet() = default;

  explicit TermSet(std::vector<Term> terms, bool case_sensitive = false) : case_sensitive_(case_sensitive) {
    std::stable_sort(terms.begin(), terms.end(),
                     [&](const Term& a, const Term& b) { return a.key(case_sensitive) < b.key(case_sensitive); });
    auto last = std::unique(terms.begin(), terms.end(), [&](const Term& a, const Term& b) {
      return a.key(case_sensitive) == b.key(case_sensitive);
    });
    terms.erase(last, terms.end());
    terms_ = std::move(terms);
    chars_.reserve(terms_.size());
    for (const auto& t : terms_) chars_.push_back(unicode::to_u32(t.key(case_sensitive_)));
  }

  static TermSet from_strings(const std::vector<std::string>& surfaces, bool case_sensitive = false) {
    std::vector<Term> terms;
    terms.reserve(surfaces.size());
    for (const auto& s : surfaces) terms.push_back(Term::make(s));
    return TermSet(std::move(terms), case_sensitive);
  }

  bool case_sensitive() const noexcept { return case_sensitive_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const Term& operator[](std::size_t i) const { return terms_[i]; }
  const std::string& key(std::size_t i) const { return terms_[i].key(case_sensitive_); }
  // Match key as code points.
  const std::u32string& chars(std::size_t i) const { return chars_[i]; }
  auto begin() const { return terms_.begin(); }
  auto end() const { return terms_.end(); }

  // Index of the term whose key equals `key`, or size() when absent.
  std::size_t find(std::string_view key) const {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), key,
                               [&](const Term& t, std::string_view k) { return t.key(case_sensitive_) < k; });
    if (it != terms_.end() && it->key(case_sensitive_) == key) return static_cast<std::size_t>(it - terms_.begin());
    return terms_.size();
  }

 private:
  std::vector<Term> terms_;
  std::vector<std::u32string> chars_;
  bool case_sensitive_ = false;
};

// Newline-delimited UTF-8 term file: '#' lines are comments, trailing
// whitespace is stripped, blank lines are skipped.
inline std::vector<Term> load_term_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  if (!unicode::is_valid_utf8(content)) throw Error(ErrorCode::InvalidEncoding, path.string());

  std::vector<Term> terms;
  std::istringstream lines(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    try {
      terms.push_back(Term::make(line));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.detail());
    }
  }
  return terms;
}

}  // namespace idpf

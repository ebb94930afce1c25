#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "idpf/match/folded_text.hpp"
#include "idpf/term.hpp"

namespace idpf::match {

// Character trie over normalized terms, scanned in one pass: from each
// position that may start a match, walk as deep as the text allows and keep
// the deepest terminal whose end is a word boundary, then jump past it.
//
// Nodes live in one vector with first-child / next-sibling links, so building
// touches no allocator beyond the vector's growth. Root children for ASCII are
// indexed directly since almost every walk starts there.
class TrieKeywordProcessor {
 public:
  explicit TrieKeywordProcessor(const TermSet& terms) {
    root_ascii_.fill(kNone);
    std::size_t total = 1;
    for (std::size_t i = 0; i < terms.size(); ++i) total += terms.chars(i).size();
    nodes_.reserve(total);
    nodes_.push_back(Node{});
    for (std::size_t i = 0; i < terms.size(); ++i) insert(terms.chars(i), static_cast<std::uint32_t>(i));
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }

  void scan(const FoldedText& text, std::vector<Candidate>& out) const {
    const std::size_t n = text.size();
    if (nodes_.size() == 1) return;
    std::size_t i = 0;
    while (i < n) {
      if (!text.can_start(i)) {
        ++i;
        continue;
      }
      std::uint32_t node = 0;
      std::uint32_t best_term = kNone;
      std::size_t best_end = 0;
      for (std::size_t j = i; j < n; ++j) {
        node = child(node, text[j]);
        if (node == kNone) break;
        if (nodes_[node].term != kNone && text.can_end(j + 1)) {
          best_term = nodes_[node].term;
          best_end = j + 1;
        }
      }
      if (best_term != kNone) {
        out.push_back({i, best_end, best_term});
        i = best_end;
      } else {
        ++i;
      }
    }
  }

 private:
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  struct Node {
    char32_t ch = 0;
    std::uint32_t first_child = kNone;
    std::uint32_t next_sibling = kNone;
    std::uint32_t term = kNone;
  };

  std::uint32_t child(std::uint32_t node, char32_t ch) const {
    if (node == 0 && ch < root_ascii_.size()) return root_ascii_[ch];
    for (std::uint32_t c = nodes_[node].first_child; c != kNone; c = nodes_[c].next_sibling) {
      if (nodes_[c].ch == ch) return c;
    }
    return kNone;
  }

  void insert(const std::u32string& key, std::uint32_t term) {
    std::uint32_t node = 0;
    for (char32_t ch : key) {
      std::uint32_t next = child(node, ch);
      if (next == kNone) {
        next = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(Node{ch, kNone, nodes_[node].first_child, kNone});
        nodes_[node].first_child = next;
        if (node == 0 && ch < root_ascii_.size()) root_ascii_[ch] = next;
      }
      node = next;
    }
    nodes_[node].term = term;
  }

  std::vector<Node> nodes_;
  std::array<std::uint32_t, 128> root_ascii_{};
};

}  // namespace idpf::match

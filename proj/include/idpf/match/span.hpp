#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

namespace idpf {

// A located hit. Offsets are bytes into the scanned text and always sit on
// character boundaries. `term` indexes the TermSet the matcher was compiled
// from, or is kNumeral for a digit run.
struct MatchSpan {
  static constexpr std::uint32_t kNumeral = std::numeric_limits<std::uint32_t>::max();

  std::size_t start = 0;
  std::size_t end = 0;
  std::uint32_t term = kNumeral;

  bool is_numeral() const noexcept { return term == kNumeral; }
  std::size_t length() const noexcept { return end - start; }

  friend bool operator==(const MatchSpan&, const MatchSpan&) = default;
};

}  // namespace idpf

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "idpf/error.hpp"
#include "idpf/match/span.hpp"

namespace idpf {

inline constexpr std::string_view kDefaultPlaceholder = "[FILTERED]";

namespace detail {
inline bool is_continuation_byte(std::string_view text, std::size_t offset) {
  return offset < text.size() && (static_cast<unsigned char>(text[offset]) & 0xC0) == 0x80;
}
}  // namespace detail

// Replaces every span with `placeholder`; bytes outside spans are copied
// unchanged. Spans must be in bounds, on character boundaries, sorted and
// non-overlapping.
inline std::string apply_mask(std::string_view text, std::span<const MatchSpan> spans,
                              std::string_view placeholder = kDefaultPlaceholder) {
  std::string out;
  std::size_t masked_bytes = 0;
  std::size_t cursor = 0;
  for (const auto& s : spans) {
    if (s.start >= s.end || s.end > text.size() || detail::is_continuation_byte(text, s.start) ||
        detail::is_continuation_byte(text, s.end)) {
      throw Error(ErrorCode::SpanOutOfBounds,
                  "span " + std::to_string(s.start) + ".." + std::to_string(s.end) + " in text of " +
                      std::to_string(text.size()) + " bytes");
    }
    if (s.start < cursor) {
      throw Error(ErrorCode::OverlappingSpans,
                  "span " + std::to_string(s.start) + ".." + std::to_string(s.end) + " overlaps or precedes byte " +
                      std::to_string(cursor));
    }
    masked_bytes += s.length();
    cursor = s.end;
  }

  out.reserve(text.size() - masked_bytes + spans.size() * placeholder.size());
  cursor = 0;
  for (const auto& s : spans) {
    out.append(text.substr(cursor, s.start - cursor));
    out.append(placeholder);
    cursor = s.end;
  }
  out.append(text.substr(cursor));
  return out;
}

}  // namespace idpf

#pragma once

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace idpf::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

// Letter (general category L*), decimal digit (Nd) or underscore.
inline bool is_word_char(char32_t cp) {
  if (cp == U'_') return true;
  if (cp < 0x80) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || (cp >= U'0' && cp <= U'9');
  }
  const auto c = static_cast<UChar32>(cp);
  return u_isalpha(c) || u_charType(c) == U_DECIMAL_DIGIT_NUMBER;
}

inline bool is_decimal_digit(char32_t cp) {
  if (cp < 0x80) return cp >= U'0' && cp <= U'9';
  return u_charType(static_cast<UChar32>(cp)) == U_DECIMAL_DIGIT_NUMBER;
}

inline bool is_space(char32_t cp) {
  if (cp < 0x80) return cp == U' ' || (cp >= 0x09 && cp <= 0x0D);
  return u_isUWhiteSpace(static_cast<UChar32>(cp));
}

// Simple (1:1) case folding. A fold that would move a character across the
// word / non-word divide is not applied, so boundaries computed on folded
// text agree with boundaries computed on the original.
inline char32_t fold_char(char32_t cp) {
  if (cp < 0x80) return (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp;
  const auto folded = static_cast<char32_t>(u_foldCase(static_cast<UChar32>(cp), U_FOLD_CASE_DEFAULT));
  if (folded == cp || is_word_char(folded) != is_word_char(cp) || is_space(folded) != is_space(cp)) return cp;
  return folded;
}

// Decodes one scalar value starting at `pos`. Ill-formed input yields
// kReplacement and advances past the maximal ill-formed subsequence, so
// decoding never stalls and every reported offset is a decoder boundary.
inline char32_t next_char(std::string_view text, std::size_t& pos, bool* ill_formed = nullptr) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  auto i = static_cast<std::int32_t>(pos);
  UChar32 c;
  U8_NEXT(bytes, i, length, c);
  pos = static_cast<std::size_t>(i);
  if (c < 0) {
    if (ill_formed) *ill_formed = true;
    return kReplacement;
  }
  return static_cast<char32_t>(c);
}

inline bool is_valid_utf8(std::string_view text) {
  bool bad = false;
  for (std::size_t pos = 0; pos < text.size() && !bad;) next_char(text, pos, &bad);
  return !bad;
}

inline std::size_t count_chars(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t pos = 0; pos < text.size(); ++n) next_char(text, pos);
  return n;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::u32string to_u32(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t pos = 0; pos < text.size();) out.push_back(next_char(text, pos));
  return out;
}

inline std::string to_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

}  // namespace idpf::unicode

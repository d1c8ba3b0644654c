#pragma once

#include <string>
#include <string_view>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <fmt/format.h>

#include "emocycle/error.hpp"

namespace emocycle {

namespace detail {

inline const icu::Normalizer2& nfkc_casefold() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
    if (U_FAILURE(status) || n == nullptr)
      throw std::runtime_error(fmt::format("ICU NFKC_Casefold unavailable: {}", u_errorName(status)));
    return n;
  }();
  return *instance;
}

}  // namespace detail

// NFKC normalization plus case folding. Full-width and half-width forms,
// compatibility ligatures and letter case all collapse to one spelling, so
// dictionary terms and document text meet on the same representation.
inline std::string canonicalize(std::string_view utf8) {
  bool ascii = true;
  for (unsigned char c : utf8)
    if (c >= 0x80) {
      ascii = false;
      break;
    }
  if (ascii) {
    // NFKC leaves ASCII unchanged; case folding maps A-Z to a-z only.
    std::string out(utf8);
    for (char& c : out)
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
  }
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  icu::UnicodeString dst = detail::nfkc_casefold().normalize(src, status);
  if (U_FAILURE(status))
    throw ValidationError(fmt::format("cannot normalize text: {}", u_errorName(status)));
  std::string out;
  dst.toUTF8String(out);
  return out;
}

// True when the code point ending just before `pos` (or starting at `pos`)
// is a letter, digit or underscore. Used for the optional word-boundary mode.
inline bool word_char_before(std::string_view s, std::size_t pos) {
  if (pos == 0) return false;
  int32_t i = static_cast<int32_t>(pos);
  UChar32 c;
  U8_PREV(reinterpret_cast<const uint8_t*>(s.data()), 0, i, c);
  return c == '_' || (c >= 0 && u_isalnum(c));
}

inline bool word_char_at(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return false;
  int32_t i = static_cast<int32_t>(pos);
  UChar32 c;
  U8_NEXT(reinterpret_cast<const uint8_t*>(s.data()), i, static_cast<int32_t>(s.size()), c);
  return c == '_' || (c >= 0 && u_isalnum(c));
}

}  // namespace emocycle

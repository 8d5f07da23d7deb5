#include "lucbat/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/uchar.h>
#include <unicode/ustring.h>
#include <unicode/locid.h>

#include "lucbat/error.hpp"

namespace lucbat::unicode {
namespace {

icu::UnicodeString from_utf8(std::string_view text) {
  return icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
}

std::string to_utf8(const icu::UnicodeString& text) {
  std::string out;
  text.toUTF8String(out);
  return out;
}

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::InvalidEncoding, "ICU NFC normalizer unavailable");
  }
  return *n;
}

const icu::Normalizer2& nfd() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::InvalidEncoding, "ICU NFD normalizer unavailable");
  }
  return *n;
}

std::string normalize(const icu::Normalizer2& norm, const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = norm.normalize(s, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::InvalidEncoding, u_errorName(status));
  }
  return to_utf8(out);
}

}  // namespace

bool is_valid_utf8(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  int32_t needed = 0;
  u_strFromUTF8(nullptr, 0, &needed, text.data(),
                static_cast<int32_t>(text.size()), &status);
  return status == U_BUFFER_OVERFLOW_ERROR || U_SUCCESS(status) ||
         (status == U_STRING_NOT_TERMINATED_WARNING);
}

std::string to_nfc(std::string_view text) {
  return normalize(nfc(), from_utf8(text));
}

std::string to_nfd(std::string_view text) {
  return normalize(nfd(), from_utf8(text));
}

std::string to_lower_nfc(std::string_view text) {
  icu::UnicodeString s = from_utf8(text);
  s.toLower(icu::Locale::getRoot());
  return normalize(nfc(), s);
}

bool is_whitespace(char32_t c) {
  return u_isUWhiteSpace(static_cast<UChar32>(c));
}

std::u32string decode(std::string_view text) {
  icu::UnicodeString s = from_utf8(text);
  std::u32string out;
  out.reserve(static_cast<size_t>(s.length()));
  for (int32_t i = 0; i < s.length();) {
    UChar32 c = s.char32At(i);
    out.push_back(static_cast<char32_t>(c));
    i += U16_LENGTH(c);
  }
  return out;
}

std::string encode(std::u32string_view text) {
  icu::UnicodeString s;
  for (char32_t c : text) s.append(static_cast<UChar32>(c));
  return to_utf8(s);
}

}  // namespace lucbat::unicode

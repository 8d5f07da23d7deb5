#pragma once

#include <string>
#include <string_view>

namespace lucbat::unicode {

// Thin wrappers over ICU. All strings are UTF-8.

bool is_valid_utf8(std::string_view text);

// Canonical composed form (NFC).
std::string to_nfc(std::string_view text);

// Canonical decomposed form (NFD).
std::string to_nfd(std::string_view text);

// Locale-independent lowercase followed by NFC.
std::string to_lower_nfc(std::string_view text);

bool is_whitespace(char32_t c);

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);

}  // namespace lucbat::unicode

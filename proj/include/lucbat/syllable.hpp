#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lucbat/error.hpp"

namespace lucbat {

enum class Tone { Ngang, Huyen, Sac, Hoi, Nga, Nang };

// Bằng (level) and trắc (oblique).
enum class ToneClass { Level, Oblique };

constexpr ToneClass tone_class_of(Tone tone) noexcept {
  return (tone == Tone::Ngang || tone == Tone::Huyen) ? ToneClass::Level
                                                      : ToneClass::Oblique;
}

std::string_view to_string(Tone tone);
std::string_view to_string(ToneClass tone_class);

struct Syllable {
  std::string raw;
  // Lowercase NFC with the tone mark at its canonical vowel.
  std::string normalized;
  std::string onset;
  // Vowel nucleus plus coda, tone mark removed (vowel quality marks kept).
  std::string rime;
  Tone tone = Tone::Ngang;
  ToneClass tone_class = ToneClass::Level;

  friend bool operator==(const Syllable&, const Syllable&) = default;
};

/// Splits one orthographic syllable into onset, rime and tone.
///
/// Onsets are matched longest-first against the 27 standard initials.
/// "gi" is an onset only when another vowel follows it ("già" is gi + a,
/// "gì" is g + i); "qu" is always an onset. Input may be in any Unicode
/// normalization form and any case.
///
/// Throws Error(NotASyllable) for tokens that are not a single Vietnamese
/// syllable, Error(MultipleToneMarks) when more than one tone mark is present.
Syllable parse_syllable(std::string_view token);

/// Like parse_syllable but returns nullopt instead of throwing.
std::optional<Syllable> try_parse_syllable(std::string_view token);

/// Rebuilds the lowercase composed syllable from its parts, placing the tone
/// mark on the canonical vowel of the rime.
std::string compose_syllable(std::string_view onset, std::string_view rime,
                             Tone tone);

/// True if `rime` is a toneless vowel cluster followed by an optional coda
/// (c, ch, m, n, ng, nh, p, t).
bool is_valid_rime(std::string_view rime);

/// Splits a verse into word tokens on whitespace and the punctuation that
/// normalize_verse() drops. Case and Unicode form are preserved.
std::vector<std::string> split_verse(std::string_view line);

/// Lowercase NFC, punctuation dropped, whitespace collapsed and trimmed.
std::string normalize_verse(std::string_view line);

}  // namespace lucbat

#include "lucbat/syllable.hpp"

#include <algorithm>
#include <array>
#include <vector>

#include "lucbat/unicode.hpp"

namespace lucbat {
namespace {

// Combining marks as they appear after NFD.
constexpr char32_t kGrave = 0x0300;      // huyền
constexpr char32_t kAcute = 0x0301;      // sắc
constexpr char32_t kCircumflex = 0x0302;
constexpr char32_t kTilde = 0x0303;      // ngã
constexpr char32_t kBreve = 0x0306;
constexpr char32_t kHookAbove = 0x0309;  // hỏi
constexpr char32_t kHorn = 0x031B;
constexpr char32_t kDotBelow = 0x0323;   // nặng
constexpr char32_t kDStroke = 0x0111;    // đ

struct Letter {
  char32_t base = 0;
  char32_t modifier = 0;  // circumflex, breve, horn or 0
};

bool is_vowel_base(char32_t c) {
  return c == U'a' || c == U'e' || c == U'i' || c == U'o' || c == U'u' ||
         c == U'y';
}

bool is_letter_base(char32_t c) {
  if (c == kDStroke) return true;
  if (c < U'a' || c > U'z') return false;
  return c != U'f' && c != U'j' && c != U'w' && c != U'z';
}

std::optional<Tone> tone_of_mark(char32_t mark) {
  switch (mark) {
    case kGrave: return Tone::Huyen;
    case kAcute: return Tone::Sac;
    case kHookAbove: return Tone::Hoi;
    case kTilde: return Tone::Nga;
    case kDotBelow: return Tone::Nang;
    default: return std::nullopt;
  }
}

char32_t mark_of_tone(Tone tone) {
  switch (tone) {
    case Tone::Huyen: return kGrave;
    case Tone::Sac: return kAcute;
    case Tone::Hoi: return kHookAbove;
    case Tone::Nga: return kTilde;
    case Tone::Nang: return kDotBelow;
    case Tone::Ngang: break;
  }
  return 0;
}

bool valid_modifier(char32_t base, char32_t modifier) {
  switch (modifier) {
    case kBreve: return base == U'a';
    case kCircumflex: return base == U'a' || base == U'e' || base == U'o';
    case kHorn: return base == U'o' || base == U'u';
    default: return false;
  }
}

struct Decomposed {
  std::vector<Letter> letters;
  std::optional<Tone> tone;
};

// Splits an NFD lowercase string into letters and a single tone.
Decomposed decompose(std::string_view token, std::string_view raw) {
  std::u32string cps = unicode::decode(unicode::to_nfd(unicode::to_lower_nfc(token)));
  Decomposed out;
  for (char32_t c : cps) {
    if (auto tone = tone_of_mark(c)) {
      if (out.letters.empty() || !is_vowel_base(out.letters.back().base)) {
        throw Error(ErrorCode::NotASyllable,
                    "tone mark not on a vowel in '" + std::string(raw) + "'");
      }
      if (out.tone) {
        throw Error(ErrorCode::MultipleToneMarks, std::string(raw));
      }
      out.tone = tone;
      continue;
    }
    if (c == kCircumflex || c == kBreve || c == kHorn) {
      if (out.letters.empty() || out.letters.back().modifier != 0 ||
          !valid_modifier(out.letters.back().base, c)) {
        throw Error(ErrorCode::NotASyllable,
                    "misplaced vowel mark in '" + std::string(raw) + "'");
      }
      out.letters.back().modifier = c;
      continue;
    }
    if (!is_letter_base(c)) {
      throw Error(ErrorCode::NotASyllable,
                  "'" + std::string(raw) + "' contains a non-Vietnamese character");
    }
    out.letters.push_back({c, 0});
  }
  return out;
}

bool is_vowel(const Letter& l) { return is_vowel_base(l.base); }

bool plain(const Letter& l, char32_t c) { return l.modifier == 0 && l.base == c; }

constexpr std::array<std::string_view, 27> kOnsets = {
    "ngh", "ng", "nh", "ch", "gh", "gi", "kh", "ph", "qu", "th", "tr",
    "b",   "c",  "d",  "đ",  "g",  "h",  "k",  "l",  "m",  "n",  "p",
    "r",   "s",  "t",  "v",  "x"};

constexpr std::array<std::string_view, 8> kCodas = {"c", "ch", "m",  "n",
                                                    "ng", "nh", "p", "t"};

bool matches(const std::vector<Letter>& letters, size_t from,
             std::u32string_view pattern) {
  if (letters.size() - from < pattern.size()) return false;
  for (size_t i = 0; i < pattern.size(); ++i) {
    if (!plain(letters[from + i], pattern[i])) return false;
  }
  return true;
}

size_t onset_length(const std::vector<Letter>& letters) {
  for (std::string_view onset : kOnsets) {
    std::u32string pattern = unicode::decode(onset);
    if (!matches(letters, 0, pattern)) continue;
    if (onset == "gi" && (letters.size() == 2 || !is_vowel(letters[2]))) {
      return 1;  // "gì", "gìn": g + i...
    }
    return pattern.size();
  }
  return 0;
}

struct RimeShape {
  size_t vowels = 0;  // length of the vowel cluster
  bool has_coda = false;
};

std::optional<RimeShape> rime_shape(const std::vector<Letter>& letters,
                                    size_t from) {
  size_t i = from;
  while (i < letters.size() && is_vowel(letters[i])) ++i;
  size_t vowels = i - from;
  if (vowels == 0 || vowels > 3) return std::nullopt;
  if (i == letters.size()) return RimeShape{vowels, false};
  for (std::string_view coda : kCodas) {
    std::u32string pattern = unicode::decode(coda);
    if (letters.size() - i == pattern.size() && matches(letters, i, pattern)) {
      return RimeShape{vowels, true};
    }
  }
  return std::nullopt;
}

// Index (within the rime) of the vowel that carries the tone mark.
size_t tone_vowel(const std::vector<Letter>& rime, const RimeShape& shape) {
  for (size_t k = shape.vowels; k-- > 0;) {
    if (rime[k].modifier != 0) return k;
  }
  if (shape.has_coda) return shape.vowels - 1;
  if (shape.vowels == 3) return 1;
  return 0;
}

std::u32string letters_nfd(const std::vector<Letter>& letters, size_t from,
                           size_t to) {
  std::u32string out;
  for (size_t i = from; i < to; ++i) {
    out.push_back(letters[i].base);
    if (letters[i].modifier != 0) out.push_back(letters[i].modifier);
  }
  return out;
}

std::string to_text(std::u32string_view nfd) {
  return unicode::to_nfc(unicode::encode(nfd));
}

std::string compose(const std::vector<Letter>& onset,
                    const std::vector<Letter>& rime, const RimeShape& shape,
                    Tone tone) {
  std::u32string nfd = letters_nfd(onset, 0, onset.size());
  size_t marked = tone_vowel(rime, shape);
  for (size_t i = 0; i < rime.size(); ++i) {
    nfd += letters_nfd(rime, i, i + 1);
    if (i == marked && tone != Tone::Ngang) nfd.push_back(mark_of_tone(tone));
  }
  return to_text(nfd);
}

Syllable parse_impl(std::string_view token) {
  if (token.empty()) {
    throw Error(ErrorCode::NotASyllable, "empty token");
  }
  Decomposed d = decompose(token, token);
  if (std::none_of(d.letters.begin(), d.letters.end(), is_vowel)) {
    throw Error(ErrorCode::NotASyllable, "'" + std::string(token) + "' has no vowel");
  }
  size_t onset_len = onset_length(d.letters);
  auto shape = rime_shape(d.letters, onset_len);
  if (!shape) {
    throw Error(ErrorCode::NotASyllable,
                "'" + std::string(token) + "' has no valid rime");
  }
  std::vector<Letter> onset(d.letters.begin(), d.letters.begin() + onset_len);
  std::vector<Letter> rime(d.letters.begin() + onset_len, d.letters.end());

  Syllable s;
  s.raw = std::string(token);
  s.onset = to_text(letters_nfd(onset, 0, onset.size()));
  s.rime = to_text(letters_nfd(rime, 0, rime.size()));
  s.tone = d.tone.value_or(Tone::Ngang);
  s.tone_class = tone_class_of(s.tone);
  s.normalized = compose(onset, rime, *shape, s.tone);
  return s;
}

bool is_stripped_punctuation(char32_t c) {
  switch (c) {
    case U'.': case U',': case U'!': case U'?': case U';': case U':':
    case U'\'': case U'"': case U'(': case U')': case U'-':
    case 0x2026:  // …
    case 0x2013:  // –
    case 0x2014:  // —
    case 0x2018: case 0x2019: case 0x201C: case 0x201D:  // curly quotes
    case 0x00AB: case 0x00BB:  // « »
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string_view to_string(Tone tone) {
  switch (tone) {
    case Tone::Ngang: return "ngang";
    case Tone::Huyen: return "huyen";
    case Tone::Sac: return "sac";
    case Tone::Hoi: return "hoi";
    case Tone::Nga: return "nga";
    case Tone::Nang: return "nang";
  }
  return "?";
}

std::string_view to_string(ToneClass tone_class) {
  return tone_class == ToneClass::Level ? "level" : "oblique";
}

Syllable parse_syllable(std::string_view token) { return parse_impl(token); }

std::optional<Syllable> try_parse_syllable(std::string_view token) {
  try {
    return parse_impl(token);
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool is_valid_rime(std::string_view rime) {
  if (rime.empty()) return false;
  try {
    Decomposed d = decompose(rime, rime);
    if (d.tone) return false;
    auto shape = rime_shape(d.letters, 0);
    return shape.has_value();
  } catch (const Error&) {
    return false;
  }
}

std::string compose_syllable(std::string_view onset, std::string_view rime,
                             Tone tone) {
  Decomposed o = decompose(onset, onset);
  Decomposed r = decompose(rime, rime);
  auto shape = rime_shape(r.letters, 0);
  if (!shape || o.tone || r.tone) {
    throw Error(ErrorCode::NotASyllable,
                "cannot compose '" + std::string(onset) + "' + '" +
                    std::string(rime) + "'");
  }
  return compose(o.letters, r.letters, *shape, tone);
}

std::vector<std::string> split_verse(std::string_view line) {
  std::vector<std::string> tokens;
  std::u32string current;
  for (char32_t c : unicode::decode(line)) {
    if (unicode::is_whitespace(c) || is_stripped_punctuation(c)) {
      if (!current.empty()) tokens.push_back(unicode::encode(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) tokens.push_back(unicode::encode(current));
  return tokens;
}

std::string normalize_verse(std::string_view line) {
  std::u32string cps = unicode::decode(unicode::to_lower_nfc(line));
  std::u32string out;
  bool pending_space = false;
  for (char32_t c : cps) {
    if (unicode::is_whitespace(c) || is_stripped_punctuation(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return unicode::encode(out);
}

}  // namespace lucbat

#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lucbat/syllable.hpp"

namespace lucbat {

// 1-based (line, word) coordinates inside a stanza.
struct Position {
  int line = 0;
  int word = 0;

  friend auto operator<=>(const Position&, const Position&) = default;
};

std::string to_string(const Position& p);

// Positions that must share a rhyme. positions.front() is the anchor.
struct RhymeChain {
  std::vector<Position> positions;

  const Position& anchor() const { return positions.front(); }
};

/// Rhyme chains for a stanza of `n_pairs` six-eight pairs:
/// {(1,6),(2,6)} and, for k = 1..n-1, {(2k,8),(2k+1,6),(2k+2,6)}.
/// Throws Error(InvalidPairCount) when n_pairs < 1.
std::vector<RhymeChain> build_rhyme_chains(int n_pairs);

enum class LineKind { Six, Eight };

constexpr int line_length(LineKind kind) noexcept {
  return kind == LineKind::Six ? 6 : 8;
}

/// Tone class required at a word of a six or eight line; nullopt for the
/// unchecked (odd) positions. Throws Error(IndexOutOfRange).
std::optional<ToneClass> expected_tone(LineKind kind, int word_index);

// Near-rhyme registry. Groups partition the rimes they mention, so
// rhymes_with() is an equivalence relation.
class RuleTable {
 public:
  RuleTable() = default;

  /// Validates rimes and the partition property.
  /// Throws Error(InvalidRuleTable) naming the offending rime.
  RuleTable(std::vector<std::vector<std::string>> groups, std::string version);

  /// One group per line, rimes separated by whitespace, '#' starts a
  /// comment. A comment of the form "# version: X" sets the version.
  static RuleTable parse(std::string_view text);
  static RuleTable load(const std::filesystem::path& path);

  /// The table shipped with the library.
  static const RuleTable& default_table();

  const std::vector<std::vector<std::string>>& groups() const { return groups_; }
  const std::string& version() const { return version_; }

  /// Group index of a tone-stripped rime, if the table mentions it.
  std::optional<size_t> group_of(std::string_view rime) const;

  bool same_rhyme(std::string_view rime_a, std::string_view rime_b) const;

 private:
  std::vector<std::vector<std::string>> groups_;
  std::string version_;
  std::unordered_map<std::string, size_t> index_;
};

/// True iff the tone-stripped rimes are equal or share a near-rhyme group.
/// Tone is ignored.
bool rhymes_with(const Syllable& a, const Syllable& b, const RuleTable& table);

}  // namespace lucbat

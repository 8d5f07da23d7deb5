#include "lucbat/rules.hpp"

#include <fstream>
#include <sstream>

#include "lucbat/unicode.hpp"

namespace lucbat {
namespace {

#include "default_rules.inc"

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_string(const Position& p) {
  return "(" + std::to_string(p.line) + "," + std::to_string(p.word) + ")";
}

std::vector<RhymeChain> build_rhyme_chains(int n_pairs) {
  if (n_pairs < 1) {
    throw Error(ErrorCode::InvalidPairCount,
                "n_pairs must be >= 1, got " + std::to_string(n_pairs));
  }
  std::vector<RhymeChain> chains;
  chains.reserve(static_cast<size_t>(n_pairs));
  chains.push_back({{{1, 6}, {2, 6}}});
  for (int k = 1; k < n_pairs; ++k) {
    chains.push_back({{{2 * k, 8}, {2 * k + 1, 6}, {2 * k + 2, 6}}});
  }
  return chains;
}

std::optional<ToneClass> expected_tone(LineKind kind, int word_index) {
  const int len = line_length(kind);
  if (word_index < 1 || word_index > len) {
    throw Error(ErrorCode::IndexOutOfRange,
                "word index " + std::to_string(word_index) + " outside 1.." +
                    std::to_string(len));
  }
  switch (word_index) {
    case 2: return ToneClass::Level;
    case 4: return ToneClass::Oblique;
    case 6: return ToneClass::Level;
    case 8: return ToneClass::Level;
    default: return std::nullopt;
  }
}

RuleTable::RuleTable(std::vector<std::vector<std::string>> groups,
                     std::string version)
    : version_(std::move(version)) {
  for (auto& group : groups) {
    std::vector<std::string> normalized;
    normalized.reserve(group.size());
    for (const auto& rime : group) {
      std::string r = unicode::to_lower_nfc(rime);
      if (!is_valid_rime(r)) {
        throw Error(ErrorCode::InvalidRuleTable, "'" + rime + "' is not a valid rime");
      }
      auto [it, inserted] = index_.emplace(r, groups_.size());
      if (!inserted) {
        throw Error(ErrorCode::InvalidRuleTable,
                    "rime '" + r + "' appears in more than one group");
      }
      normalized.push_back(std::move(r));
    }
    if (!normalized.empty()) groups_.push_back(std::move(normalized));
  }
}

RuleTable RuleTable::parse(std::string_view text) {
  if (!unicode::is_valid_utf8(text)) {
    throw Error(ErrorCode::InvalidEncoding, "rule table is not valid UTF-8");
  }
  std::vector<std::vector<std::string>> groups;
  std::string version;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view body = line;
    if (auto hash = body.find('#'); hash != std::string_view::npos) {
      std::string_view comment = trim(body.substr(hash + 1));
      constexpr std::string_view key = "version:";
      if (comment.substr(0, key.size()) == key) {
        version = std::string(trim(comment.substr(key.size())));
      }
      body = body.substr(0, hash);
    }
    std::istringstream words{std::string(body)};
    std::vector<std::string> group;
    for (std::string w; words >> w;) group.push_back(w);
    if (!group.empty()) groups.push_back(std::move(group));
  }
  return RuleTable(std::move(groups), std::move(version));
}

RuleTable RuleTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open rule table " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const RuleTable& RuleTable::default_table() {
  static const RuleTable table = parse(kDefaultRulesText);
  return table;
}

std::optional<size_t> RuleTable::group_of(std::string_view rime) const {
  auto it = index_.find(std::string(rime));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool RuleTable::same_rhyme(std::string_view rime_a, std::string_view rime_b) const {
  if (rime_a == rime_b) return true;
  auto ga = group_of(rime_a);
  return ga && ga == group_of(rime_b);
}

bool rhymes_with(const Syllable& a, const Syllable& b, const RuleTable& table) {
  return table.same_rhyme(a.rime, b.rime);
}

}  // namespace lucbat

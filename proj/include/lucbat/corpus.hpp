#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "lucbat/rules.hpp"
#include "lucbat/scoring.hpp"

namespace lucbat {

struct Poem {
  std::string id;
  std::string text;  // NFC, one verse per line, lines trimmed

  friend bool operator==(const Poem&, const Poem&) = default;
};

struct Corpus {
  std::vector<Poem> poems;
  std::vector<std::string> provenance;

  size_t size() const { return poems.size(); }
};

struct Exclusion {
  std::string id;
  std::string reason;
};

/// Reads UTF-8 poem files. Plain files hold poems separated by blank lines
/// and get ids "<path>:<ordinal>"; `.jsonl` files hold one {"id","text"}
/// record per line. Directories are walked recursively in sorted order.
/// Repeated ids get a "~k" suffix so every id stays unique.
/// Throws Error(IoError) or Error(InvalidEncoding).
Corpus ingest(std::span<const std::filesystem::path> paths);

/// Parses blank-line separated poems from memory. `source` prefixes ids.
Corpus ingest_text(std::string_view text, const std::string& source);

/// Blank-line separated poems, each followed by one empty line.
std::string format_corpus(const Corpus& corpus);

/// One {"id","text"} record per poem.
std::string format_corpus_jsonl(const Corpus& corpus);

void write_text_file(const std::filesystem::path& path, std::string_view content);

struct SplitResult {
  Corpus quatrains;
  std::vector<Exclusion> excluded;
};

/// Splits every poem into consecutive 4-line quatrains with ids
/// "<poem id>#<k>". Poems whose line count is not a multiple of four are
/// excluded whole.
SplitResult split_quatrains(const Corpus& corpus);

/// Fisher-Yates over std::mt19937_64 seeded with `seed`, drawing each index
/// by rejection sampling on the raw 64-bit output. The permutation depends
/// only on the seed and the corpus size.
void shuffle_poems(Corpus& corpus, std::uint64_t seed);

SplitResult split_and_shuffle(const Corpus& corpus, std::uint64_t seed);

struct FilterStats {
  size_t kept_count = 0;
  size_t dropped_count = 0;
  std::optional<double> mean_score_kept;  // nullopt when nothing is kept
  std::vector<Exclusion> dropped;
};

struct FilterResult {
  Corpus kept;
  FilterStats stats;
};

/// Keeps quatrains whose template score is >= min_score. Entries that are
/// not four scannable lines are dropped with the segmentation error as
/// the reason.
FilterResult filter_by_score(const Corpus& corpus, const RuleTable& table,
                             double min_score, const ScoreWeights& weights = {});

class VerseIndex {
 public:
  void insert(std::string_view verse);
  bool contains(std::string_view verse) const;
  size_t size() const { return verses_.size(); }
  const std::unordered_set<std::string>& verses() const { return verses_; }

 private:
  std::unordered_set<std::string> verses_;
};

/// normalize_verse() of every non-empty line of every poem.
VerseIndex build_verse_index(const Corpus& corpus);

}  // namespace lucbat

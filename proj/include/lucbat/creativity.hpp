#pragma once

#include <string>
#include <vector>

#include "lucbat/corpus.hpp"

namespace lucbat {

struct PoemCreativity {
  std::string poem_id;
  size_t copied_verses = 0;
  size_t total_verses = 0;
  double copied_ratio = 0.0;  // c_i
};

struct CreativityReport {
  std::vector<PoemCreativity> per_poem;
  double creativity = 0.0;  // C, mean of (1 - c_i)
};

/// Scores generated poems against a training verse index. A verse is every
/// non-empty line; repeated verses count once per occurrence. Membership
/// is exact match after normalize_verse().
///
/// Throws Error(EmptyGeneratedSet) for an empty corpus and Error(EmptyPoem)
/// for a poem without verses.
CreativityReport creativity_score(const Corpus& generated, const VerseIndex& index);

}  // namespace lucbat

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lucbat/rules.hpp"
#include "lucbat/syllable.hpp"

namespace lucbat {

// Raised by stanza segmentation. `line` is 1-based and counts non-blank
// lines of the input passed to the failing call; `stanza` is set when the
// error comes out of score_poem().
class SegmentationError : public Error {
 public:
  SegmentationError(ErrorCode code, const std::string& message, int line = 0,
                    int expected = 0, int got = 0, std::string token = {},
                    std::optional<int> stanza = std::nullopt)
      : Error(code, message),
        line(line),
        expected(expected),
        got(got),
        token(std::move(token)),
        stanza(stanza) {}

  int line;
  int expected;
  int got;
  std::string token;
  std::optional<int> stanza;
};

// Alternating 6- and 8-syllable lines.
struct Stanza {
  std::vector<std::vector<Syllable>> lines;
  int n_pairs = 0;

  const Syllable& at(const Position& p) const {
    return lines.at(static_cast<size_t>(p.line - 1)).at(static_cast<size_t>(p.word - 1));
  }
};

struct RhymeCheck {
  Position position;
  Position anchor;
  bool ok = false;
};

struct ToneCheck {
  Position position;
  ToneClass expected = ToneClass::Level;
  ToneClass actual = ToneClass::Level;
  bool ok = false;
};

// Multipliers on the rhyme and tone penalty terms. {1, 1} is the plain
// template score.
struct ScoreWeights {
  double rhyme = 1.0;
  double tone = 1.0;
};

struct ScoreReport {
  int n_pairs = 0;
  int wrong_rhyme = 0;  // R
  int wrong_tone = 0;   // T
  double score = 0.0;
  std::vector<RhymeCheck> rhyme_diagnostics;
  std::vector<ToneCheck> tone_diagnostics;
};

/// 100 * (1 - w_R * R / (3n - 1) - w_T * T / (7n)). Not clamped.
double template_score(int wrong_rhyme, int wrong_tone, int n_pairs,
                      const ScoreWeights& weights = {});

/// Non-blank lines of `text`, trimmed.
std::vector<std::string> split_lines(std::string_view text);

/// Parses every token and checks the 6/8 alternation.
/// Throws SegmentationError (OddLineCount, WrongSyllableCount,
/// UnparseableToken, EmptyInput).
Stanza segment_stanza(std::string_view raw_poem);
Stanza segment_stanza(std::span<const std::string> lines);

/// Counts rhyme faults at non-anchor chain positions (each compared with
/// its chain anchor) and tone faults at the templated even positions.
ScoreReport score_stanza(const Stanza& stanza, const RuleTable& table,
                         const ScoreWeights& weights = {});

struct PoemScore {
  std::vector<ScoreReport> stanzas;
  double mean_score = 0.0;
};

/// Splits into consecutive quatrains and scores each one. A trailing
/// partial quatrain is an error (OddLineCount), never dropped.
PoemScore score_poem(std::string_view raw_poem, const RuleTable& table,
                     const ScoreWeights& weights = {});

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;  // exclusive, except for the last bin
  size_t count = 0;
};

struct Histogram {
  std::vector<HistogramBin> bins;
  size_t below = 0;
  size_t above = 0;
  size_t not_a_number = 0;
};

/// Fixed-width bins over [min, max]. Throws Error(EmptyInput) on an empty
/// list, Error(InvalidArgument) when bin_width <= 0 or max <= min.
Histogram histogram(std::span<const double> scores, double bin_width = 10.0,
                    double min = 0.0, double max = 100.0);

}  // namespace lucbat

#include "lucbat/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lucbat {
namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

SegmentationError with_context(const SegmentationError& e, int line_offset,
                               int stanza) {
  std::string msg = "stanza " + std::to_string(stanza) + ": ";
  std::string what = e.what();
  // Drop the "<Code>: " prefix added by Error; the constructor re-adds it.
  auto colon = what.find(": ");
  msg += colon == std::string::npos ? what : what.substr(colon + 2);
  return SegmentationError(e.code(), msg, e.line + line_offset, e.expected,
                           e.got, e.token, stanza);
}

}  // namespace

double template_score(int wrong_rhyme, int wrong_tone, int n_pairs,
                      const ScoreWeights& weights) {
  if (n_pairs < 1) {
    throw Error(ErrorCode::InvalidPairCount, "n_pairs must be >= 1");
  }
  const double n = n_pairs;
  return 100.0 * (1.0 - weights.rhyme * wrong_rhyme / (3.0 * n - 1.0) -
                  weights.tone * wrong_tone / (7.0 * n));
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    std::string_view t = trim(line);
    if (!t.empty()) lines.emplace_back(t);
  }
  return lines;
}

Stanza segment_stanza(std::string_view raw_poem) {
  auto lines = split_lines(raw_poem);
  return segment_stanza(std::span<const std::string>(lines));
}

Stanza segment_stanza(std::span<const std::string> lines) {
  if (lines.empty()) {
    throw SegmentationError(ErrorCode::EmptyInput, "stanza has no lines");
  }
  if (lines.size() % 2 != 0) {
    throw SegmentationError(ErrorCode::OddLineCount,
                            std::to_string(lines.size()) +
                                " lines cannot form six-eight pairs");
  }
  Stanza stanza;
  stanza.n_pairs = static_cast<int>(lines.size() / 2);
  stanza.lines.reserve(lines.size());
  for (size_t i = 0; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i + 1);
    const int expected = line_length(i % 2 == 0 ? LineKind::Six : LineKind::Eight);
    auto tokens = split_verse(lines[i]);
    const int got = static_cast<int>(tokens.size());
    if (got != expected) {
      throw SegmentationError(ErrorCode::WrongSyllableCount,
                              "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected) + " syllables, got " +
                                  std::to_string(got),
                              line_no, expected, got);
    }
    std::vector<Syllable> parsed;
    parsed.reserve(tokens.size());
    for (const auto& token : tokens) {
      try {
        parsed.push_back(parse_syllable(token));
      } catch (const Error& e) {
        throw SegmentationError(ErrorCode::UnparseableToken,
                                "line " + std::to_string(line_no) + ": " + e.what(),
                                line_no, expected, got, token);
      }
    }
    stanza.lines.push_back(std::move(parsed));
  }
  return stanza;
}

ScoreReport score_stanza(const Stanza& stanza, const RuleTable& table,
                         const ScoreWeights& weights) {
  ScoreReport report;
  report.n_pairs = stanza.n_pairs;

  for (const auto& chain : build_rhyme_chains(stanza.n_pairs)) {
    const Syllable& anchor = stanza.at(chain.anchor());
    for (size_t k = 1; k < chain.positions.size(); ++k) {
      const Position& p = chain.positions[k];
      bool ok = rhymes_with(stanza.at(p), anchor, table);
      report.rhyme_diagnostics.push_back({p, chain.anchor(), ok});
      if (!ok) ++report.wrong_rhyme;
    }
  }

  for (int line = 1; line <= 2 * stanza.n_pairs; ++line) {
    const LineKind kind = line % 2 == 1 ? LineKind::Six : LineKind::Eight;
    for (int word = 2; word <= line_length(kind); word += 2) {
      const ToneClass expected = *expected_tone(kind, word);
      const Position p{line, word};
      const ToneClass actual = stanza.at(p).tone_class;
      report.tone_diagnostics.push_back({p, expected, actual, expected == actual});
      if (expected != actual) ++report.wrong_tone;
    }
  }

  report.score = template_score(report.wrong_rhyme, report.wrong_tone,
                                stanza.n_pairs, weights);
  return report;
}

PoemScore score_poem(std::string_view raw_poem, const RuleTable& table,
                     const ScoreWeights& weights) {
  auto lines = split_lines(raw_poem);
  if (lines.empty()) {
    throw SegmentationError(ErrorCode::EmptyInput, "poem has no lines");
  }
  if (lines.size() % 4 != 0) {
    throw SegmentationError(ErrorCode::OddLineCount,
                            std::to_string(lines.size()) +
                                " lines do not split into quatrains");
  }
  PoemScore result;
  double total = 0.0;
  for (size_t start = 0; start < lines.size(); start += 4) {
    const int stanza_index = static_cast<int>(start / 4 + 1);
    Stanza stanza;
    try {
      stanza = segment_stanza(std::span<const std::string>(lines).subspan(start, 4));
    } catch (const SegmentationError& e) {
      throw with_context(e, static_cast<int>(start), stanza_index);
    }
    result.stanzas.push_back(score_stanza(stanza, table, weights));
    total += result.stanzas.back().score;
  }
  result.mean_score = total / static_cast<double>(result.stanzas.size());
  return result;
}

Histogram histogram(std::span<const double> scores, double bin_width,
                    double min, double max) {
  if (scores.empty()) {
    throw Error(ErrorCode::EmptyInput, "no scores to bin");
  }
  if (!(bin_width > 0.0) || !(max > min)) {
    throw Error(ErrorCode::InvalidArgument,
                "histogram needs bin_width > 0 and max > min");
  }
  const double span = (max - min) / bin_width;
  const size_t n_bins =
      std::max<size_t>(1, static_cast<size_t>(std::ceil(span - 1e-9)));

  Histogram h;
  h.bins.resize(n_bins);
  auto lo = [&](size_t i) { return min + static_cast<double>(i) * bin_width; };
  for (size_t i = 0; i < n_bins; ++i) {
    h.bins[i].lo = lo(i);
    h.bins[i].hi = i + 1 == n_bins ? max : lo(i + 1);
  }

  for (double x : scores) {
    if (std::isnan(x)) {
      ++h.not_a_number;
    } else if (x < min) {
      ++h.below;
    } else if (x > max) {
      ++h.above;
    } else {
      auto idx = static_cast<size_t>(std::floor((x - min) / bin_width));
      idx = std::min(idx, n_bins - 1);
      // Agree with the reported edges when the division rounds.
      while (idx + 1 < n_bins && x >= h.bins[idx + 1].lo) ++idx;
      while (idx > 0 && x < h.bins[idx].lo) --idx;
      ++h.bins[idx].count;
    }
  }
  return h;
}

}  // namespace lucbat

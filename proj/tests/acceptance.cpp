// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "lucbat/cli.hpp"
#include "lucbat/corpus.hpp"
#include "lucbat/creativity.hpp"
#include "lucbat/gradcheck.hpp"
#include "lucbat/scoring.hpp"
#include "lucbat/semloss.hpp"
#include "lucbat/unicode.hpp"
#include "synthetic.hpp"

using namespace lucbat;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const char* const kKieu =
    "Trăm năm trong cõi người ta\n"
    "Chữ tài chữ mệnh khéo là ghét nhau\n"
    "Trải qua một cuộc bể dâu\n"
    "Những điều trông thấy mà đau đớn lòng\n";

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double score_of(const std::vector<std::string>& lines) {
  return score_stanza(segment_stanza(std::span<const std::string>(lines)),
                      RuleTable::default_table())
      .score;
}

// Plants exactly r rhyme faults and t tone faults.
testing::Plant plant(int r, int t) {
  testing::Plant p;
  const auto rhymes = testing::rhyme_positions();
  const auto tones = testing::tone_positions();
  for (int k = 0; k < r; ++k) p.rhyme_breaks.push_back(rhymes[k]);
  for (int k = 0; k < t; ++k) p.tone_flips.push_back(tones[k]);
  return p;
}

bool score_formula(std::string& detail) {
  auto t0 = Clock::now();
  double worst = 0.0;
  for (int r = 0; r <= 2; ++r) {
    for (int t = 0; t <= 14; ++t) {
      auto rep = score_stanza(
          segment_stanza(std::span<const std::string>(testing::make_stanza(plant(r, t)))),
          RuleTable::default_table());
      if (rep.wrong_rhyme != r || rep.wrong_tone != t) {
        detail = "planted (" + std::to_string(r) + "," + std::to_string(t) + ") counted (" +
                 std::to_string(rep.wrong_rhyme) + "," + std::to_string(rep.wrong_tone) + ")";
        return false;
      }
      worst = std::max(worst, std::abs(rep.score - 100.0 * (1.0 - r / 5.0 - t / 14.0)));
    }
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "max |error| " << worst << ", " << elapsed << " s";
  detail = d.str();
  return worst <= 1e-9 && elapsed < 1.0;
}

bool canonical_stanza(std::string& detail) {
  auto lines = split_lines(kKieu);
  const double base = score_of(lines);
  if (base != 100.0) {
    detail = "score " + std::to_string(base);
    return false;
  }
  // Flip the tone class of each templated syllable in place.
  int flips = 0;
  for (const auto& p : testing::tone_positions()) {
    auto words = split_verse(lines[p.line - 1]);
    auto syl = parse_syllable(words[p.word - 1]);
    const Tone flipped = syl.tone_class == ToneClass::Level ? Tone::Sac : Tone::Ngang;
    words[p.word - 1] = compose_syllable(syl.onset, syl.rime, flipped);
    auto changed = lines;
    std::string line;
    for (const auto& w : words) line += (line.empty() ? "" : " ") + w;
    changed[p.line - 1] = line;
    const double drop = base - score_of(changed);
    if (std::abs(drop - 100.0 / 14.0) > 1e-9) {
      detail = "flip at (" + std::to_string(p.line) + "," + std::to_string(p.word) +
               ") dropped " + std::to_string(drop);
      return false;
    }
    ++flips;
  }
  detail = "score 100, " + std::to_string(flips) + " single flips each -100/14";
  return flips == 14;
}

bool count_law(std::string& detail) {
  for (int n = 1; n <= 50; ++n) {
    size_t chain = 0;
    for (const auto& c : build_rhyme_chains(n)) chain += c.positions.size();
    size_t tones = 0;
    for (int line = 1; line <= 2 * n; ++line) {
      const LineKind kind = line % 2 ? LineKind::Six : LineKind::Eight;
      for (int w = 1; w <= line_length(kind); ++w)
        if (expected_tone(kind, w)) ++tones;
    }
    if (chain != static_cast<size_t>(3 * n - 1) || tones != static_cast<size_t>(7 * n)) {
      detail = "n=" + std::to_string(n);
      return false;
    }
  }
  detail = "n = 1..50";
  return true;
}

bool creativity_oracle(std::string& detail) {
  const auto training = ingest_text(kKieu, "train");
  const auto index = build_verse_index(training);
  const auto copied = split_lines(kKieu);
  const double expected[] = {1.0, 0.75, 0.5, 0.25, 0.0};
  std::ostringstream d;
  bool ok = true;
  for (int k = 0; k <= 4; ++k) {
    Corpus gen;
    for (int poem = 0; poem < 12; ++poem) {
      std::string text;
      for (int v = 0; v < 4; ++v) {
        // Rotate which verses are copied so positions vary between poems.
        const bool copy = (v + poem) % 4 < k;
        text += copy ? copied[(v + poem) % 4]
                     : "câu mới " + std::to_string(poem) + " " + std::to_string(v);
        text += '\n';
      }
      gen.poems.push_back({"g" + std::to_string(poem), text});
    }
    const double c = creativity_score(gen, index).creativity;
    d << (k ? " " : "") << c;
    ok = ok && c == expected[k];
  }
  detail = "C = " + d.str();
  return ok;
}

struct Cli {
  int code;
  std::string out;
};

Cli cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool pipeline_determinism(std::string& detail) {
  const fs::path dir = fs::temp_directory_path() / "lucbat_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  std::mt19937_64 rng(99);
  const auto tones = testing::tone_positions();
  const auto rhymes = testing::rhyme_positions();
  std::string text;
  for (int i = 0; i < 40; ++i) {
    testing::Plant p;
    for (const auto& pos : tones)
      if (rng() % 5 == 0) p.tone_flips.push_back(pos);
    for (const auto& pos : rhymes)
      if (rng() % 5 == 0) p.rhyme_breaks.push_back(pos);
    // Two quatrains per poem.
    text += testing::join_lines(testing::make_stanza(p));
    text += testing::join_lines(testing::make_stanza({}));
    text += "\n";
  }
  const std::string poems = (dir / "poems.txt").string();
  std::ofstream(poems) << text;
  std::ofstream(dir / "train.txt") << kKieu;
  std::ofstream(dir / "gen.txt") << kKieu << "\nmột hai\nba bốn\n";

  const auto corpus = ingest_text(text, "mem");
  if (format_corpus_jsonl(split_and_shuffle(corpus, 5).quatrains) !=
      format_corpus_jsonl(split_and_shuffle(corpus, 5).quatrains)) {
    detail = "split_and_shuffle differs";
    return false;
  }

  auto run_all = [&](const std::string& tag) {
    auto o = [&](const std::string& name) { return (dir / (tag + name)).string(); };
    std::string all;
    auto add = [&](const Cli& c) { all += std::to_string(c.code) + "\n" + c.out; };
    add(cli({"quatrains", poems, "--shuffle", "--seed", "17", "--out", o("q.jsonl")}));
    add(cli({"score", o("q.jsonl"), "--format", "jsonl", "--jobs", "3"}));
    add(cli({"score", poems}));
    add(cli({"filter", o("q.jsonl"), "--min-score", "80", "--out", o("f.txt")}));
    add(cli({"creativity", "--generated", (dir / "gen.txt").string(), "--corpus",
             (dir / "train.txt").string(), "--format", "jsonl"}));
    std::ofstream(o("scores.jsonl")) << cli({"score", o("q.jsonl"), "--format", "jsonl"}).out;
    add(cli({"report", o("scores.jsonl"), "--format", "jsonl"}));
    add(cli({"losscheck", "--seed", "4", "--format", "jsonl"}));
    return all + slurp(o("q.jsonl")) + slurp(o("f.txt"));
  };
  const std::string first = run_all("a_");
  const std::string second = run_all("b_");
  // Outputs embed their own paths; compare with the tag removed.
  auto untag = [&](std::string s, const std::string& tag) {
    const std::string needle = (dir / tag).string();
    for (size_t at; (at = s.find(needle)) != std::string::npos;)
      s.replace(at, needle.size(), (dir / "").string());
    return s;
  };
  if (untag(first, "a_") != untag(second, "b_")) {
    detail = "CLI outputs differ between runs";
    return false;
  }

  // Second pass over the filtered corpus.
  const std::vector<fs::path> kept_path{dir / "a_f.txt"};
  const auto kept = ingest(kept_path);
  for (const auto& p : kept.poems) {
    if (score_poem(p.text, RuleTable::default_table()).mean_score < 80.0) {
      detail = "kept entry below threshold: " + p.id;
      return false;
    }
  }
  const auto again = filter_by_score(kept, RuleTable::default_table(), 80.0);
  fs::remove_all(dir);
  detail = "7 commands x 2 runs identical; " + std::to_string(kept.size()) +
           " kept quatrains all >= 80";
  return again.stats.kept_count == kept.size() && kept.size() > 0;
}

bool loss_mechanism(std::string& detail) {
  using namespace semloss;
  auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 4.0);
  double worst_ce = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 11), v = 2 + static_cast<int>(rng() % 15);
    Matrix logits(m, v);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < v; ++j) logits(i, j) = normal(rng);
    std::vector<int> ids(m - 1);
    for (auto& id : ids) id = static_cast<int>(rng() % v);
    double naive = 0.0;
    for (int i = 0; i + 1 < m; ++i) {
      double z = 0.0;
      for (int j = 0; j < v; ++j) z += std::exp(logits(i, j));
      naive -= std::log(std::exp(logits(i, ids[i])) / z);
    }
    naive /= m - 1;
    worst_ce = std::max(worst_ce, std::abs(ce_loss(logits, ids) - naive));
  }

  double worst_grad = 0.0;
  int passed = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GradCheckConfig cfg;
    cfg.seed = seed;
    cfg.d_model = 8;
    cfg.d_hidden = 8;
    cfg.vocab = 16;
    cfg.pair_length = 6;  // two pairs: at most 12 tokens
    cfg.step = 1e-5;
    cfg.tolerance = 1e-4;
    cfg.term = seed % 2 ? SemanticTerm::Sum : SemanticTerm::Mean;
    auto r = gradient_check(cfg);
    worst_grad = std::max(worst_grad, r.max_relative_error);
    if (r.passed) ++passed;
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "ce max |error| " << worst_ce << "; gradients " << passed
    << "/20 seeds, max rel error " << worst_grad << "; " << elapsed << " s";
  detail = d.str();
  return worst_ce <= 1e-10 && passed == 20 && worst_grad <= 1e-4 && elapsed < 30.0;
}

bool invariant_suites(std::string& detail) {
  std::vector<std::string> failures;

  // Parser round trip.
  std::ifstream in(LUCBAT_TEST_DATA "/syllables.txt");
  size_t parsed = 0;
  for (std::string w; in >> w;) {
    if (w[0] == '#') {
      std::getline(in, w);
      continue;
    }
    auto s = parse_syllable(w);
    auto again = parse_syllable(s.normalized);
    if (compose_syllable(s.onset, s.rime, s.tone) != s.normalized ||
        again.normalized != s.normalized || s.normalized != unicode::to_lower_nfc(w))
      failures.push_back("round trip " + w);
    ++parsed;
  }
  if (parsed < 200) failures.push_back("only " + std::to_string(parsed) + " syllables");

  // Rhyme equivalence.
  const auto& table = RuleTable::default_table();
  std::vector<Syllable> sample;
  for (const auto& g : table.groups())
    for (const auto& r : g) sample.push_back(parse_syllable("l" + r));
  for (const auto& a : sample) {
    if (!rhymes_with(a, a, table)) failures.push_back("reflexive " + a.normalized);
    for (const auto& b : sample) {
      if (rhymes_with(a, b, table) != rhymes_with(b, a, table))
        failures.push_back("symmetric " + a.normalized + " " + b.normalized);
      if (!rhymes_with(a, b, table)) continue;
      for (const auto& c : sample)
        if (rhymes_with(b, c, table) && !rhymes_with(a, c, table))
          failures.push_back("transitive " + a.normalized);
    }
  }

  // Score monotonicity.
  for (int r = 0; r <= 3; ++r)
    for (int t = 0; t <= 14; ++t) {
      const double s = score_of(testing::make_stanza(plant(r, t)));
      if (t < 14 && score_of(testing::make_stanza(plant(r, t + 1))) > s)
        failures.push_back("monotone in T");
      if (r < 3 && score_of(testing::make_stanza(plant(r + 1, t))) > s)
        failures.push_back("monotone in R");
    }

  // Attention convexity and LSTM bounds.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 2.0);
  auto random = [&](int rows, int cols) {
    semloss::Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
    return m;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 6, m = 1 + trial % 12;
    semloss::AttentionParams p{random(d, d), random(d, d), random(d, d)};
    const semloss::Matrix x = random(m, d);
    const semloss::Matrix w = semloss::attention_weights(x, p);
    const semloss::Matrix out = semloss::self_attention(x, p);
    const semloss::Matrix v = x * p.value;
    for (int i = 0; i < m; ++i) {
      if (w.row(i).minCoeff() < 0.0 || std::abs(w.row(i).sum() - 1.0) > 1e-12)
        failures.push_back("attention row not stochastic");
      for (int j = 0; j < d; ++j)
        if (out(i, j) < v.col(j).minCoeff() - 1e-12 || out(i, j) > v.col(j).maxCoeff() + 1e-12)
          failures.push_back("attention output outside the hull");
    }
    auto lstm = semloss::LstmParams::zeros(d, 3);
    for (int g = 0; g < 4; ++g) {
      lstm.input[g] = random(3, d);
      lstm.recurrent[g] = random(3, 3);
      lstm.bias[g] = random(3, 1).col(0);
    }
    auto states = semloss::lstm_forward(x, lstm);
    for (size_t t = 0; t < states.hidden.size(); ++t) {
      if (states.hidden[t].cwiseAbs().maxCoeff() >= 1.0) failures.push_back("|h| >= 1");
      if (states.cell[t].cwiseAbs().maxCoeff() > static_cast<double>(t + 1))
        failures.push_back("|c_t| > t");
    }
  }

  if (failures.empty()) {
    detail = std::to_string(parsed) + " syllables, " + std::to_string(sample.size()) +
             " rimes, monotonicity, attention, LSTM";
    return true;
  }
  detail = std::to_string(failures.size()) + " failures, first: " + failures.front();
  return false;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<bool(std::string&)>>> criteria = {
      {"score formula exact over planted (R,T) sweep", score_formula},
      {"canonical quatrain scores 100; each tone flip costs 100/14", canonical_stanza},
      {"chain and tone position counts 3n-1 / 7n for n=1..50", count_law},
      {"creativity oracle on planted overlaps", creativity_oracle},
      {"pipeline determinism and filter re-score", pipeline_determinism},
      {"loss: ce oracle and gradient check", loss_mechanism},
      {"invariant suites", invariant_suites},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = check(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failed;
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "  (" << detail << ")\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed ? 1 : 0;
}

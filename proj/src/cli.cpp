#include "lucbat/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "lucbat/corpus.hpp"
#include "lucbat/creativity.hpp"
#include "lucbat/gradcheck.hpp"
#include "lucbat/scoring.hpp"
#include "lucbat/unicode.hpp"

namespace lucbat::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum class Format { Text, Jsonl };

// Shortest round-trip decimal, always with a fractional part or exponent.
std::string format_real(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, end);
  if (s.find_first_of(".enai") == std::string::npos) s += ".0";
  return s;
}

json position_json(const Position& p) { return json::array({p.line, p.word}); }

json error_json(const Error& e) {
  json j{{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (auto* seg = dynamic_cast<const SegmentationError*>(&e)) {
    if (seg->line > 0) j["line"] = seg->line;
    if (seg->stanza) j["stanza"] = *seg->stanza;
    if (!seg->token.empty()) j["token"] = seg->token;
    if (seg->expected > 0) {
      j["expected"] = seg->expected;
      j["got"] = seg->got;
    }
  }
  return j;
}

json stanza_record(const std::string& poem_id, int stanza_index, const ScoreReport& r) {
  json rhyme = json::array();
  for (const auto& d : r.rhyme_diagnostics) {
    rhyme.push_back({{"position", position_json(d.position)},
                     {"anchor", position_json(d.anchor)},
                     {"ok", d.ok}});
  }
  json tone = json::array();
  for (const auto& d : r.tone_diagnostics) {
    tone.push_back({{"position", position_json(d.position)},
                    {"expected", std::string(to_string(d.expected))},
                    {"actual", std::string(to_string(d.actual))},
                    {"ok", d.ok}});
  }
  return json{{"poem_id", poem_id},
              {"stanza_index", stanza_index},
              {"R", r.wrong_rhyme},
              {"T", r.wrong_tone},
              {"n", r.n_pairs},
              {"score", r.score},
              {"diagnostics", {{"rhyme", rhyme}, {"tone", tone}}}};
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> w;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ',');) {
    try {
      size_t used = 0;
      w.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "--weights: '" + part + "' is not a number");
    }
  }
  if (w.size() != 2 || !(w[0] > 0.0) || !(w[1] > 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                "--weights expects two positive numbers wR,wT, got '" + text + "'");
  }
  return w;
}

std::vector<fs::path> to_paths(const std::vector<std::string>& items) {
  return {items.begin(), items.end()};
}

Corpus ingest_args(const std::vector<std::string>& items) {
  auto paths = to_paths(items);
  return ingest(paths);
}

void write_corpus(const fs::path& path, const Corpus& corpus) {
  write_text_file(path, path.extension() == ".jsonl" ? format_corpus_jsonl(corpus)
                                                     : format_corpus(corpus));
}

// Runs fn(i) for i in [0, n) on `jobs` threads. Results are written by
// index, so output order never depends on scheduling.
template <typename Fn>
void parallel_for(size_t n, int jobs, Fn fn) {
  const size_t workers = std::min<size_t>(std::max(jobs, 1), std::max<size_t>(n, 1));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct PoemOutcome {
  std::optional<PoemScore> score;
  std::optional<json> error;
  std::string error_text;
};

void annotate_stanza(std::ostream& out, const std::vector<std::string>& lines,
                     size_t first_line, const ScoreReport& r) {
  std::map<Position, std::string> marks;
  for (const auto& d : r.rhyme_diagnostics)
    if (!d.ok) marks[d.position] += "R";
  for (const auto& d : r.tone_diagnostics)
    if (!d.ok) marks[d.position] += "T";
  for (int l = 1; l <= 2 * r.n_pairs; ++l) {
    auto tokens = split_verse(lines[first_line + static_cast<size_t>(l - 1)]);
    out << "    ";
    for (size_t w = 0; w < tokens.size(); ++w) {
      if (w > 0) out << ' ';
      auto it = marks.find({l, static_cast<int>(w + 1)});
      if (it == marks.end()) {
        out << tokens[w];
      } else {
        out << '*' << tokens[w] << "*[" << it->second << ']';
      }
    }
    out << '\n';
  }
}

int cmd_score(const std::vector<std::string>& inputs, const std::string& rules_path,
              Format format, const std::string& weights_text, int jobs,
              std::ostream& out, std::ostream& err) {
  const RuleTable table =
      rules_path.empty() ? RuleTable::default_table() : RuleTable::load(rules_path);
  ScoreWeights weights;
  if (!weights_text.empty()) {
    auto w = parse_weights(weights_text);
    weights = {w[0], w[1]};
  }
  const Corpus corpus = ingest_args(inputs);

  std::vector<PoemOutcome> outcomes(corpus.poems.size());
  parallel_for(corpus.poems.size(), jobs, [&](size_t i) {
    try {
      outcomes[i].score = score_poem(corpus.poems[i].text, table, weights);
    } catch (const Error& e) {
      outcomes[i].error = error_json(e);
      outcomes[i].error_text = e.what();
    }
  });

  size_t failures = 0;
  for (size_t i = 0; i < corpus.poems.size(); ++i) {
    const auto& poem = corpus.poems[i];
    const auto& o = outcomes[i];
    if (o.error) {
      ++failures;
      if (format == Format::Jsonl) {
        out << json{{"poem_id", poem.id}, {"error", *o.error}}.dump() << '\n';
      } else {
        out << poem.id << ": error: " << o.error_text << "\n\n";
      }
      continue;
    }
    const auto lines = split_lines(poem.text);
    for (size_t s = 0; s < o.score->stanzas.size(); ++s) {
      const auto& r = o.score->stanzas[s];
      if (format == Format::Jsonl) {
        out << stanza_record(poem.id, static_cast<int>(s + 1), r).dump() << '\n';
      } else {
        out << poem.id << " stanza " << s + 1 << ": R=" << r.wrong_rhyme
            << " T=" << r.wrong_tone << " n=" << r.n_pairs
            << " score=" << format_real(r.score) << '\n';
        annotate_stanza(out, lines, 4 * s, r);
      }
    }
    if (format == Format::Text) {
      out << poem.id << " mean=" << format_real(o.score->mean_score) << "\n\n";
    }
  }
  if (failures > 0) {
    err << failures << " of " << corpus.poems.size() << " poems could not be scored\n";
    return kInputError;
  }
  return kOk;
}

json stats_json(const FilterStats& s) {
  json dropped = json::array();
  for (const auto& d : s.dropped) dropped.push_back({{"id", d.id}, {"reason", d.reason}});
  return json{{"kept_count", s.kept_count},
              {"dropped_count", s.dropped_count},
              {"mean_score_kept",
               s.mean_score_kept ? json(*s.mean_score_kept) : json(nullptr)},
              {"dropped", dropped}};
}

int cmd_filter(const std::vector<std::string>& inputs, double min_score,
               const std::string& out_path, const std::string& stats_path,
               const std::string& rules_path, const std::string& weights_text,
               std::ostream& out) {
  const RuleTable table =
      rules_path.empty() ? RuleTable::default_table() : RuleTable::load(rules_path);
  ScoreWeights weights;
  if (!weights_text.empty()) {
    auto w = parse_weights(weights_text);
    weights = {w[0], w[1]};
  }
  const Corpus corpus = ingest_args(inputs);
  const FilterResult result = filter_by_score(corpus, table, min_score, weights);
  write_corpus(out_path, result.kept);
  const std::string stats = stats_json(result.stats).dump() + "\n";
  if (stats_path.empty()) {
    out << stats;
  } else {
    write_text_file(stats_path, stats);
  }
  return kOk;
}

int cmd_creativity(const std::string& generated_path, const std::string& corpus_path,
                   Format format, std::ostream& out) {
  const std::vector<fs::path> gen{generated_path};
  const std::vector<fs::path> train{corpus_path};
  const Corpus generated = ingest(gen);
  const VerseIndex index = build_verse_index(ingest(train));
  const CreativityReport report = creativity_score(generated, index);
  for (const auto& p : report.per_poem) {
    if (format == Format::Jsonl) {
      out << json{{"poem_id", p.poem_id},
                  {"copied_verses", p.copied_verses},
                  {"total_verses", p.total_verses},
                  {"c_i", p.copied_ratio}}
                 .dump()
          << '\n';
    } else {
      out << p.poem_id << ": " << p.copied_verses << "/" << p.total_verses
          << " verses copied, c_i = " << format_real(p.copied_ratio) << '\n';
    }
  }
  if (format == Format::Jsonl) {
    out << json{{"summary", true},
                {"poems", report.per_poem.size()},
                {"index_size", index.size()},
                {"C", report.creativity}}
               .dump()
        << '\n';
  } else {
    out << "C = " << format_real(report.creativity) << '\n';
  }
  return kOk;
}

std::vector<double> read_scores(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<double> scores;
  size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '{') {
      json record;
      try {
        record = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument,
                    path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
      if (record.contains("score") && record["score"].is_number()) {
        scores.push_back(record["score"].get<double>());
      }
      continue;
    }
    try {
      size_t used = 0;
      std::string t = line.substr(first);
      scores.push_back(std::stod(t, &used));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, path.string() + ":" +
                                                  std::to_string(line_no) +
                                                  ": not a score: " + line);
    }
  }
  return scores;
}

int cmd_report(const std::string& scores_path, double bin_width, Format format,
               std::ostream& out) {
  const std::vector<double> scores = read_scores(scores_path);
  const Histogram h = histogram(scores, bin_width);
  double sum = 0.0;
  size_t counted = 0;
  for (double s : scores) {
    if (!std::isnan(s)) {
      sum += s;
      ++counted;
    }
  }
  const double mean = counted ? sum / static_cast<double>(counted) : 0.0;
  if (format == Format::Jsonl) {
    for (size_t i = 0; i < h.bins.size(); ++i) {
      const auto& b = h.bins[i];
      out << json{{"lo", b.lo}, {"hi", b.hi}, {"closed", i + 1 == h.bins.size()},
                  {"count", b.count}}
                 .dump()
          << '\n';
    }
    out << json{{"summary", true}, {"count", scores.size()}, {"mean", mean},
                {"below", h.below}, {"above", h.above}, {"nan", h.not_a_number}}
               .dump()
        << '\n';
    return kOk;
  }
  size_t widest = 1;
  for (const auto& b : h.bins) widest = std::max(widest, b.count);
  for (size_t i = 0; i < h.bins.size(); ++i) {
    const auto& b = h.bins[i];
    std::ostringstream label;
    label << '[' << format_real(b.lo) << ", " << format_real(b.hi)
          << (i + 1 == h.bins.size() ? ']' : ')');
    const size_t bar = (b.count * 50 + widest - 1) / widest;
    out << std::left << std::setw(16) << label.str() << std::right << std::setw(7)
        << b.count << ' ' << std::string(bar, '#') << '\n';
  }
  out << "count=" << scores.size() << " mean=" << format_real(mean)
      << " below=" << h.below << " above=" << h.above;
  if (h.not_a_number) out << " nan=" << h.not_a_number;
  out << '\n';
  return kOk;
}

int cmd_quatrains(const std::vector<std::string>& inputs, bool shuffle,
                  std::optional<std::uint64_t> seed, const std::string& out_path,
                  Format format, std::ostream& out) {
  if (shuffle && !seed) {
    throw Error(ErrorCode::InvalidArgument, "--shuffle requires --seed");
  }
  const Corpus corpus = ingest_args(inputs);
  const SplitResult result =
      shuffle ? split_and_shuffle(corpus, *seed) : split_quatrains(corpus);
  write_corpus(out_path, result.quatrains);
  if (format == Format::Jsonl) {
    for (const auto& x : result.excluded) {
      out << json{{"excluded", x.id}, {"reason", x.reason}}.dump() << '\n';
    }
    out << json{{"summary", true}, {"quatrains", result.quatrains.size()},
                {"excluded", result.excluded.size()}}
               .dump()
        << '\n';
  } else {
    for (const auto& x : result.excluded) {
      out << "excluded " << x.id << ": " << x.reason << '\n';
    }
    out << result.quatrains.size() << " quatrains written to " << out_path << ", "
        << result.excluded.size() << " poems excluded\n";
  }
  return kOk;
}

int cmd_losscheck(const semloss::GradCheckConfig& config, Format format,
                  std::ostream& out) {
  const auto limit = [](int v, int hi, const char* flag) {
    if (v < 1 || v > hi) {
      throw Error(ErrorCode::InvalidArgument, std::string(flag) + " must be in [1, " +
                                                  std::to_string(hi) + "]");
    }
  };
  limit(config.d_model, 64, "--dmodel");
  limit(config.d_hidden, 64, "--dhidden");
  limit(config.vocab, 4096, "--vocab");
  limit(config.pair_length, 256, "--len");
  limit(config.stanzas, 64, "--stanzas");

  const semloss::GradCheckReport r = semloss::gradient_check(config);
  if (format == Format::Jsonl) {
    out << json{{"seed", config.seed},
                {"d_model", config.d_model},
                {"d_hidden", config.d_hidden},
                {"vocab", config.vocab},
                {"len", config.pair_length},
                {"stanzas", config.stanzas},
                {"step", config.step},
                {"tolerance", config.tolerance},
                {"parameters", r.parameters},
                {"logits_checked", r.logits_checked},
                {"ce", r.ce},
                {"mse", r.mse},
                {"max_relative_error", r.max_relative_error},
                {"worst_index", r.worst_parameter},
                {"passed", r.passed}}
               .dump()
        << '\n';
  } else {
    out << "gradient check: seed=" << config.seed << " d_model=" << config.d_model
        << " d_hidden=" << config.d_hidden << " vocab=" << config.vocab
        << " len<=" << config.pair_length << " stanzas=" << config.stanzas << '\n'
        << "  loss: ce=" << format_real(r.ce) << " mse=" << format_real(r.mse) << '\n'
        << "  checked " << r.parameters << " parameters and " << r.logits_checked
        << " logits, step=" << format_real(config.step) << '\n'
        << "  max relative error " << std::scientific << std::setprecision(3)
        << r.max_relative_error << std::defaultfloat << " (index " << r.worst_parameter
        << ", tolerance " << format_real(config.tolerance) << ")\n"
        << (r.passed ? "PASS" : "FAIL") << '\n';
  }
  return r.passed ? kOk : kInputError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Luc Bat prosody scoring, corpus preparation and loss checking", "lucbat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lucbat 0.1.0");

  const std::map<std::string, Format> formats{{"text", Format::Text},
                                              {"jsonl", Format::Jsonl}};
  Format format = Format::Text;
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format: text or jsonl")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  };

  std::vector<std::string> inputs;
  std::string rules_path;
  std::string weights_text;
  std::string out_path;
  std::string stats_path;

  auto* score = app.add_subcommand("score", "Template score of every quatrain");
  score->add_option("inputs", inputs, "Poem files or directories")->required();
  score->add_option("--rules", rules_path, "Near-rhyme table file");
  add_format(score);
  score->add_option("--weights", weights_text, "Penalty weights wR,wT");
  int jobs = 1;
  score->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* filter = app.add_subcommand("filter", "Keep quatrains scoring at least --min-score");
  filter->add_option("inputs", inputs, "Quatrain files or directories")->required();
  double min_score = 0.0;
  filter->add_option("--min-score", min_score, "Minimum template score")->required();
  filter->add_option("--out", out_path, "Output corpus (.jsonl for records)")->required();
  filter->add_option("--stats", stats_path, "Write statistics here instead of stdout");
  filter->add_option("--rules", rules_path, "Near-rhyme table file");
  filter->add_option("--weights", weights_text, "Penalty weights wR,wT");

  auto* creativity = app.add_subcommand("creativity", "Creativity score C of generated poems");
  std::string generated_path;
  std::string corpus_path;
  creativity->add_option("--generated", generated_path, "Generated poems")->required();
  creativity->add_option("--corpus", corpus_path, "Training corpus")->required();
  add_format(creativity);

  auto* report = app.add_subcommand("report", "Histogram of scores");
  std::string scores_path;
  report->add_option("scores", scores_path, "Score file (jsonl from `score`, or one number per line)")
      ->required();
  double bin_width = 10.0;
  report->add_option("--bins", bin_width, "Bin width")->check(CLI::PositiveNumber);
  add_format(report);

  auto* quatrains = app.add_subcommand("quatrains", "Split poems into quatrains");
  quatrains->add_option("inputs", inputs, "Poem files or directories")->required();
  bool shuffle = false;
  quatrains->add_flag("--shuffle", shuffle, "Shuffle the quatrains");
  std::optional<std::uint64_t> seed;
  quatrains->add_option("--seed", seed, "Shuffle seed");
  quatrains->add_option("--out", out_path, "Output corpus (.jsonl for records)")->required();
  add_format(quatrains);

  auto* losscheck = app.add_subcommand("losscheck", "Finite-difference check of the loss gradients");
  semloss::GradCheckConfig config;
  losscheck->add_option("--seed", config.seed, "Random seed");
  losscheck->add_option("--dmodel", config.d_model, "Embedding width");
  losscheck->add_option("--dhidden", config.d_hidden, "LSTM hidden width");
  losscheck->add_option("--vocab", config.vocab, "Vocabulary size");
  losscheck->add_option("--len", config.pair_length, "Maximum tokens per verse pair");
  losscheck->add_option("--stanzas", config.stanzas, "Stanzas in the block");
  losscheck->add_option("--step", config.step, "Finite-difference step")->check(CLI::PositiveNumber);
  losscheck->add_option("--tolerance", config.tolerance, "Maximum relative error")
      ->check(CLI::PositiveNumber);
  bool mean_term = false;
  losscheck->add_flag("--mean", mean_term, "Average the squared distance over the hidden width");
  add_format(losscheck);

  std::vector<const char*> argv{"lucbat"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  try {
    if (*score) return cmd_score(inputs, rules_path, format, weights_text, jobs, out, err);
    if (*filter) {
      return cmd_filter(inputs, min_score, out_path, stats_path, rules_path,
                        weights_text, out);
    }
    if (*creativity) return cmd_creativity(generated_path, corpus_path, format, out);
    if (*report) return cmd_report(scores_path, bin_width, format, out);
    if (*quatrains) return cmd_quatrains(inputs, shuffle, seed, out_path, format, out);
    if (*losscheck) {
      config.term = mean_term ? semloss::SemanticTerm::Mean : semloss::SemanticTerm::Sum;
      return cmd_losscheck(config, format, out);
    }
  } catch (const Error& e) {
    err << "lucbat: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "lucbat: internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace lucbat::cli

#include "lucbat/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "lucbat/unicode.hpp"

namespace lucbat {
namespace fs = std::filesystem;
namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::string text = buf.str();
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
  if (!unicode::is_valid_utf8(text)) {
    throw Error(ErrorCode::InvalidEncoding, path.string() + " is not valid UTF-8");
  }
  return text;
}

// Trimmed non-blank lines joined by '\n', in NFC.
std::string clean_poem(std::string_view text) {
  std::string out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    std::string_view t = trim(line);
    if (t.empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out.append(t);
  }
  return unicode::to_nfc(out);
}

std::vector<std::string> blocks(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (trim(line).empty()) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
      continue;
    }
    current += line;
    current.push_back('\n');
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

void append_text(Corpus& corpus, std::string_view text, const std::string& source) {
  size_t ordinal = 0;
  for (const auto& block : blocks(text)) {
    corpus.poems.push_back({source + ":" + std::to_string(++ordinal), clean_poem(block)});
  }
}

void append_jsonl(Corpus& corpus, std::string_view text, const std::string& source) {
  std::istringstream in{std::string(text)};
  size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidArgument,
                  source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object() || !record.contains("text") || !record["text"].is_string()) {
      throw Error(ErrorCode::InvalidArgument,
                  source + ":" + std::to_string(line_no) + ": record has no \"text\"");
    }
    std::string id = record.contains("id") && record["id"].is_string()
                         ? record["id"].get<std::string>()
                         : source + ":" + std::to_string(line_no);
    corpus.poems.push_back({std::move(id), clean_poem(record["text"].get<std::string>())});
  }
}

void expand(const fs::path& path, std::vector<fs::path>& files) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> found;
    for (const auto& entry : fs::recursive_directory_iterator(path, ec)) {
      if (entry.is_regular_file()) found.push_back(entry.path());
    }
    if (ec) throw Error(ErrorCode::IoError, "cannot list " + path.string());
    std::sort(found.begin(), found.end());
    files.insert(files.end(), found.begin(), found.end());
  } else {
    files.push_back(path);
  }
}

void make_ids_unique(Corpus& corpus) {
  std::unordered_map<std::string, size_t> seen;
  for (auto& poem : corpus.poems) {
    size_t& count = seen[poem.id];
    if (++count == 1) continue;
    std::string candidate;
    do {
      candidate = poem.id + "~" + std::to_string(count++);
    } while (seen.count(candidate));
    seen[candidate] = 1;
    poem.id = candidate;
  }
}

// Uniform integer in [0, bound] from raw engine output.
std::uint64_t draw_upto(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == std::numeric_limits<std::uint64_t>::max()) return rng();
  const std::uint64_t range = bound + 1;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % range;
}

}  // namespace

Corpus ingest(std::span<const fs::path> paths) {
  std::vector<fs::path> files;
  for (const auto& p : paths) expand(p, files);
  Corpus corpus;
  for (const auto& file : files) {
    std::string text = read_file(file);
    corpus.provenance.push_back(file.string());
    if (file.extension() == ".jsonl") {
      append_jsonl(corpus, text, file.string());
    } else {
      append_text(corpus, text, file.string());
    }
  }
  make_ids_unique(corpus);
  return corpus;
}

Corpus ingest_text(std::string_view text, const std::string& source) {
  if (!unicode::is_valid_utf8(text)) {
    throw Error(ErrorCode::InvalidEncoding, source + " is not valid UTF-8");
  }
  Corpus corpus;
  corpus.provenance.push_back(source);
  append_text(corpus, text, source);
  make_ids_unique(corpus);
  return corpus;
}

std::string format_corpus(const Corpus& corpus) {
  std::string out;
  for (size_t i = 0; i < corpus.poems.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += corpus.poems[i].text;
    out.push_back('\n');
  }
  return out;
}

std::string format_corpus_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& poem : corpus.poems) {
    out += nlohmann::json{{"id", poem.id}, {"text", poem.text}}.dump();
    out.push_back('\n');
  }
  return out;
}

void write_text_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

SplitResult split_quatrains(const Corpus& corpus) {
  SplitResult result;
  result.quatrains.provenance = corpus.provenance;
  for (const auto& poem : corpus.poems) {
    auto lines = split_lines(poem.text);
    if (lines.empty() || lines.size() % 4 != 0) {
      result.excluded.push_back(
          {poem.id, std::to_string(lines.size()) + " lines is not a multiple of 4"});
      continue;
    }
    for (size_t start = 0, k = 1; start < lines.size(); start += 4, ++k) {
      std::string text = lines[start];
      for (size_t j = start + 1; j < start + 4; ++j) text += "\n" + lines[j];
      result.quatrains.poems.push_back({poem.id + "#" + std::to_string(k), std::move(text)});
    }
  }
  return result;
}

void shuffle_poems(Corpus& corpus, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto& v = corpus.poems;
  for (size_t i = v.size(); i > 1; --i) {
    auto j = static_cast<size_t>(draw_upto(rng, i - 1));
    std::swap(v[i - 1], v[j]);
  }
}

SplitResult split_and_shuffle(const Corpus& corpus, std::uint64_t seed) {
  SplitResult result = split_quatrains(corpus);
  shuffle_poems(result.quatrains, seed);
  return result;
}

FilterResult filter_by_score(const Corpus& corpus, const RuleTable& table,
                             double min_score, const ScoreWeights& weights) {
  FilterResult result;
  result.kept.provenance = corpus.provenance;
  double total = 0.0;
  for (const auto& poem : corpus.poems) {
    auto lines = split_lines(poem.text);
    if (lines.size() != 4) {
      result.stats.dropped.push_back(
          {poem.id, "not a quatrain (" + std::to_string(lines.size()) + " lines)"});
      continue;
    }
    double score = 0.0;
    try {
      score = score_stanza(segment_stanza(std::span<const std::string>(lines)),
                           table, weights)
                  .score;
    } catch (const Error& e) {
      result.stats.dropped.push_back({poem.id, e.what()});
      continue;
    }
    if (score >= min_score) {
      result.kept.poems.push_back(poem);
      total += score;
    } else {
      std::ostringstream reason;
      reason << "score " << score << " below " << min_score;
      result.stats.dropped.push_back({poem.id, reason.str()});
    }
  }
  result.stats.kept_count = result.kept.poems.size();
  result.stats.dropped_count = result.stats.dropped.size();
  if (result.stats.kept_count > 0) {
    result.stats.mean_score_kept = total / static_cast<double>(result.stats.kept_count);
  }
  return result;
}

void VerseIndex::insert(std::string_view verse) {
  std::string v = normalize_verse(verse);
  if (!v.empty()) verses_.insert(std::move(v));
}

bool VerseIndex::contains(std::string_view verse) const {
  return verses_.count(normalize_verse(verse)) > 0;
}

VerseIndex build_verse_index(const Corpus& corpus) {
  VerseIndex index;
  for (const auto& poem : corpus.poems) {
    std::istringstream in(poem.text);
    for (std::string line; std::getline(in, line);) index.insert(line);
  }
  return index;
}

}  // namespace lucbat

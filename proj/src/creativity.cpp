#include "lucbat/creativity.hpp"

#include <sstream>

namespace lucbat {

CreativityReport creativity_score(const Corpus& generated, const VerseIndex& index) {
  if (generated.poems.empty()) {
    throw Error(ErrorCode::EmptyGeneratedSet, "no generated poems");
  }
  CreativityReport report;
  report.per_poem.reserve(generated.poems.size());
  double novelty = 0.0;
  for (const auto& poem : generated.poems) {
    PoemCreativity pc;
    pc.poem_id = poem.id;
    std::istringstream in(poem.text);
    for (std::string line; std::getline(in, line);) {
      if (normalize_verse(line).empty()) continue;
      ++pc.total_verses;
      if (index.contains(line)) ++pc.copied_verses;
    }
    if (pc.total_verses == 0) {
      throw Error(ErrorCode::EmptyPoem, poem.id);
    }
    pc.copied_ratio =
        static_cast<double>(pc.copied_verses) / static_cast<double>(pc.total_verses);
    novelty += 1.0 - pc.copied_ratio;
    report.per_poem.push_back(std::move(pc));
  }
  report.creativity = novelty / static_cast<double>(generated.poems.size());
  return report;
}

}  // namespace lucbat

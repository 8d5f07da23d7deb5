#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lucbat/corpus.hpp"
#include "lucbat/creativity.hpp"
#include "lucbat/gradcheck.hpp"
#include "lucbat/rules.hpp"
#include "lucbat/scoring.hpp"
#include "lucbat/syllable.hpp"

namespace py = pybind11;
using namespace lucbat;

namespace {

Corpus corpus_of(const std::vector<std::string>& poems, const std::string& prefix) {
  Corpus c;
  for (size_t i = 0; i < poems.size(); ++i)
    c.poems.push_back({prefix + std::to_string(i + 1), poems[i]});
  return c;
}

const RuleTable& table_or_default(const RuleTable* table) {
  return table ? *table : RuleTable::default_table();
}

}  // namespace

PYBIND11_MODULE(_lucbat, m) {
  m.doc() = "Luc Bat prosody scoring, creativity and loss checking";

  auto error = py::register_exception<Error>(m, "LucbatError", PyExc_ValueError);
  (void)error;

  py::enum_<Tone>(m, "Tone")
      .value("NGANG", Tone::Ngang)
      .value("HUYEN", Tone::Huyen)
      .value("SAC", Tone::Sac)
      .value("HOI", Tone::Hoi)
      .value("NGA", Tone::Nga)
      .value("NANG", Tone::Nang);
  py::enum_<ToneClass>(m, "ToneClass")
      .value("LEVEL", ToneClass::Level)
      .value("OBLIQUE", ToneClass::Oblique);

  py::class_<Syllable>(m, "Syllable")
      .def_readonly("raw", &Syllable::raw)
      .def_readonly("normalized", &Syllable::normalized)
      .def_readonly("onset", &Syllable::onset)
      .def_readonly("rime", &Syllable::rime)
      .def_readonly("tone", &Syllable::tone)
      .def_readonly("tone_class", &Syllable::tone_class)
      .def("__repr__", [](const Syllable& s) {
        return "<Syllable " + s.normalized + " onset='" + s.onset + "' rime='" + s.rime + "'>";
      });

  m.def("parse_syllable", &parse_syllable, py::arg("token"));
  m.def("compose_syllable", &compose_syllable, py::arg("onset"), py::arg("rime"),
        py::arg("tone"));
  m.def("normalize_verse", &normalize_verse, py::arg("line"));
  m.def("split_verse", &split_verse, py::arg("line"));

  py::class_<Position>(m, "Position")
      .def_readonly("line", &Position::line)
      .def_readonly("word", &Position::word)
      .def("__iter__", [](const Position& p) {
        return py::iter(py::make_tuple(p.line, p.word));
      })
      .def("__eq__", [](const Position& a, const Position& b) { return a == b; })
      .def("__repr__", [](const Position& p) { return to_string(p); });

  m.def(
      "build_rhyme_chains",
      [](int n) {
        std::vector<std::vector<std::pair<int, int>>> out;
        for (const auto& c : build_rhyme_chains(n)) {
          auto& chain = out.emplace_back();
          for (const auto& p : c.positions) chain.emplace_back(p.line, p.word);
        }
        return out;
      },
      py::arg("n_pairs"), "Rhyme chains as lists of (line, word), anchor first.");

  py::class_<RuleTable>(m, "RuleTable")
      .def_static("default", &RuleTable::default_table, py::return_value_policy::reference)
      .def_static("parse", &RuleTable::parse, py::arg("text"))
      .def_static("load", [](const std::string& path) { return RuleTable::load(path); })
      .def_property_readonly("version", &RuleTable::version)
      .def_property_readonly("groups", &RuleTable::groups)
      .def("same_rhyme", &RuleTable::same_rhyme);

  m.def(
      "rhymes_with",
      [](const Syllable& a, const Syllable& b, const RuleTable* table) {
        return rhymes_with(a, b, table_or_default(table));
      },
      py::arg("a"), py::arg("b"), py::arg("table") = nullptr);

  py::class_<ScoreReport>(m, "ScoreReport")
      .def_readonly("n_pairs", &ScoreReport::n_pairs)
      .def_readonly("wrong_rhyme", &ScoreReport::wrong_rhyme)
      .def_readonly("wrong_tone", &ScoreReport::wrong_tone)
      .def_readonly("score", &ScoreReport::score)
      .def_property_readonly("rhyme_faults",
                             [](const ScoreReport& r) {
                               std::vector<std::pair<int, int>> out;
                               for (const auto& d : r.rhyme_diagnostics)
                                 if (!d.ok) out.emplace_back(d.position.line, d.position.word);
                               return out;
                             })
      .def_property_readonly("tone_faults", [](const ScoreReport& r) {
        std::vector<std::pair<int, int>> out;
        for (const auto& d : r.tone_diagnostics)
          if (!d.ok) out.emplace_back(d.position.line, d.position.word);
        return out;
      });

  py::class_<ScoreWeights>(m, "ScoreWeights")
      .def(py::init([](double r, double t) { return ScoreWeights{r, t}; }),
           py::arg("rhyme") = 1.0, py::arg("tone") = 1.0)
      .def_readwrite("rhyme", &ScoreWeights::rhyme)
      .def_readwrite("tone", &ScoreWeights::tone);

  m.def("template_score", &template_score, py::arg("wrong_rhyme"), py::arg("wrong_tone"),
        py::arg("n_pairs"), py::arg("weights") = ScoreWeights{});

  m.def(
      "score_stanza",
      [](const std::string& text, const RuleTable* table, const ScoreWeights& weights) {
        return score_stanza(segment_stanza(text), table_or_default(table), weights);
      },
      py::arg("text"), py::arg("table") = nullptr, py::arg("weights") = ScoreWeights{});
  m.def(
      "score_poem",
      [](const std::string& text, const RuleTable* table, const ScoreWeights& weights) {
        auto r = score_poem(text, table_or_default(table), weights);
        return py::make_tuple(r.stanzas, r.mean_score);
      },
      py::arg("text"), py::arg("table") = nullptr, py::arg("weights") = ScoreWeights{},
      "Returns (stanza reports, mean score).");

  m.def(
      "creativity",
      [](const std::vector<std::string>& generated, const std::vector<std::string>& training) {
        const auto index = build_verse_index(corpus_of(training, "train:"));
        return creativity_score(corpus_of(generated, "gen:"), index).creativity;
      },
      py::arg("generated"), py::arg("training"),
      "Mean over generated poems of the share of verses not found in training.");

  m.def(
      "ce_loss",
      [](const semloss::Matrix& logits, const std::vector<int>& ids) {
        return semloss::ce_loss(logits, ids);
      },
      py::arg("logits"), py::arg("next_token_ids"));

  m.def(
      "gradient_check",
      [](std::uint64_t seed, int d_model, int d_hidden, int vocab, int pair_length,
         int stanzas, bool mean) {
        semloss::GradCheckConfig cfg;
        cfg.seed = seed;
        cfg.d_model = d_model;
        cfg.d_hidden = d_hidden;
        cfg.vocab = vocab;
        cfg.pair_length = pair_length;
        cfg.stanzas = stanzas;
        cfg.term = mean ? semloss::SemanticTerm::Mean : semloss::SemanticTerm::Sum;
        auto r = semloss::gradient_check(cfg);
        py::dict out;
        out["parameters"] = r.parameters;
        out["logits_checked"] = r.logits_checked;
        out["max_relative_error"] = r.max_relative_error;
        out["ce"] = r.ce;
        out["mse"] = r.mse;
        out["passed"] = r.passed;
        return out;
      },
      py::arg("seed") = 1, py::arg("d_model") = 4, py::arg("d_hidden") = 3,
      py::arg("vocab") = 7, py::arg("pair_length") = 6, py::arg("stanzas") = 1,
      py::arg("mean") = false);
}

"""Luc Bat prosody scoring, creativity and loss checking."""

from ._lucbat import (
    LucbatError,
    Position,
    RuleTable,
    ScoreReport,
    ScoreWeights,
    Syllable,
    Tone,
    ToneClass,
    build_rhyme_chains,
    ce_loss,
    compose_syllable,
    creativity,
    gradient_check,
    normalize_verse,
    parse_syllable,
    rhymes_with,
    score_poem,
    score_stanza,
    split_verse,
    template_score,
)

__all__ = [
    "LucbatError",
    "Position",
    "RuleTable",
    "ScoreReport",
    "ScoreWeights",
    "Syllable",
    "Tone",
    "ToneClass",
    "build_rhyme_chains",
    "ce_loss",
    "compose_syllable",
    "creativity",
    "gradient_check",
    "normalize_verse",
    "parse_syllable",
    "rhymes_with",
    "score_poem",
    "score_stanza",
    "split_verse",
    "template_score",
]

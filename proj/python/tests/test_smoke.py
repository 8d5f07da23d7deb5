import math

import numpy as np
import pytest

import lucbat

KIEU = (
    "Trăm năm trong cõi người ta\n"
    "Chữ tài chữ mệnh khéo là ghét nhau\n"
    "Trải qua một cuộc bể dâu\n"
    "Những điều trông thấy mà đau đớn lòng\n"
)


def test_parse_syllable():
    s = lucbat.parse_syllable("trường")
    assert (s.onset, s.rime) == ("tr", "ương")
    assert s.tone == lucbat.Tone.HUYEN
    assert s.tone_class == lucbat.ToneClass.LEVEL
    assert lucbat.parse_syllable("mệnh").tone == lucbat.Tone.NANG


def test_bad_syllable_raises():
    with pytest.raises(lucbat.LucbatError, match="NotASyllable"):
        lucbat.parse_syllable("xyz123")


def test_normalize_verse():
    assert lucbat.normalize_verse("Trăm năm,  trong cõi…") == "trăm năm trong cõi"


def test_rhyme_chains():
    assert lucbat.build_rhyme_chains(2) == [[(1, 6), (2, 6)], [(2, 8), (3, 6), (4, 6)]]


def test_score_kieu():
    report = lucbat.score_stanza(KIEU)
    assert report.score == 100.0
    assert report.rhyme_faults == [] and report.tone_faults == []
    stanzas, mean = lucbat.score_poem(KIEU + KIEU)
    assert len(stanzas) == 2 and mean == 100.0


def test_tone_fault():
    report = lucbat.score_stanza(KIEU.replace("thấy", "thay"))
    assert report.tone_faults == [(4, 4)]
    assert report.score == pytest.approx(100 * (1 - 1 / 14))


def test_creativity():
    assert lucbat.creativity(["một hai\nba bốn"], [KIEU]) == 1.0
    assert lucbat.creativity([KIEU], [KIEU]) == 0.0


def test_ce_loss():
    logits = np.zeros((5, 8))
    assert lucbat.ce_loss(logits, [0, 1, 2, 3]) == pytest.approx(math.log(8))


def test_gradient_check():
    report = lucbat.gradient_check(seed=3)
    assert report["passed"]
    assert report["max_relative_error"] < 1e-4

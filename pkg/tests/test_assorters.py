"""Assorter mapping and reported-parameter tests."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from riskaudit.assorters import (
    CardInterpretation,
    ReportedTallies,
    Vote,
    plurality_assort,
    polling_eta0,
    theta_prime,
)
from riskaudit.errors import EmptyContest


class TestPluralityAssort:
    def test_winner(self):
        assert plurality_assort(CardInterpretation(True, Vote.WINNER)) == 1.0

    def test_loser(self):
        assert plurality_assort(CardInterpretation(True, Vote.LOSER)) == 0.0

    def test_invalid_and_other_score_half(self):
        assert plurality_assort(CardInterpretation(True, Vote.INVALID)) == 0.5
        assert plurality_assort(CardInterpretation(True, Vote.OTHER)) == 0.5

    def test_contest_absent_scores_half(self):
        assert plurality_assort(CardInterpretation(False, Vote.WINNER)) == 0.5

    @given(
        w=st.integers(0, 500), l=st.integers(0, 500), o=st.integers(0, 500)
    )
    def test_mean_exceeds_half_iff_winner_ahead(self, w, l, o):
        if w + l + o == 0:
            return
        cards = (
            [CardInterpretation(True, Vote.WINNER)] * w
            + [CardInterpretation(True, Vote.LOSER)] * l
            + [CardInterpretation(True, Vote.OTHER)] * o
        )
        values = [plurality_assort(c) for c in cards]
        assert set(values) <= {0.0, 0.5, 1.0}
        mean = sum(values) / len(values)
        assert mean == pytest.approx((w + o / 2) / (w + l + o))
        assert (mean > 0.5) == (w > l)


class TestPollingEta0:
    def test_reported_shares(self):
        assert polling_eta0(ReportedTallies(600, 300, 100)) == pytest.approx(0.65)

    def test_tied_contest_gives_null_mean(self):
        assert polling_eta0(ReportedTallies(400, 400, 0)) == 0.5

    def test_unanimous(self):
        assert polling_eta0(ReportedTallies(1000, 0, 0)) == 1.0

    def test_empty_contest(self):
        with pytest.raises(EmptyContest):
            polling_eta0(ReportedTallies(0, 0, 0))

    def test_negative_tallies_rejected(self):
        with pytest.raises(ValueError):
            ReportedTallies(-1, 0, 0)


class TestThetaPrime:
    def test_hand_value(self):
        assert theta_prime(0.55, 0.5) == pytest.approx(0.525)

    def test_no_blanks(self):
        assert theta_prime(0.61, 0.0) == 0.61

    def test_all_blank_is_null(self):
        assert theta_prime(0.99, 1.0) == 0.5

    @given(theta=st.floats(0.0, 1.0), b=st.floats(0.0, 0.999))
    def test_fixes_half_and_increases_in_theta(self, theta, b):
        assert theta_prime(0.5, b) == pytest.approx(0.5)
        eps = 1e-6
        if theta <= 1.0 - eps:
            assert theta_prime(theta + eps, b) > theta_prime(theta, b)

    @given(
        t1=st.floats(0.0, 1.0), t2=st.floats(0.0, 1.0),
        w=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0),
    )
    def test_affine_in_theta(self, t1, t2, w, b):
        mixed = theta_prime(w * t1 + (1 - w) * t2, b)
        assert mixed == pytest.approx(
            w * theta_prime(t1, b) + (1 - w) * theta_prime(t2, b), abs=1e-12
        )

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chipgames.game import (
    Action,
    GameState,
    GameVariant,
    TossLaw,
    abandon_transition,
    crush_transition,
    legal_actions,
    terminal_value,
    toss_transitions,
)

JM1, JM2, JM3 = GameVariant.JM1, GameVariant.JM2, GameVariant.JM3
qs = st.floats(min_value=0.0, max_value=0.4999, allow_nan=False)
chips = st.integers(min_value=0, max_value=50)


@pytest.mark.parametrize(
    "variant, state, n, expected",
    [
        (JM1, (1, 2), 5, {Action.TOSS, Action.ABANDON}),
        (JM2, (2, 1), 3, {Action.CRUSH, Action.TOSS}),
        (JM3, (0, 0), 0, set()),
        (JM1, (3, 1), 4, set()),
        (JM3, (1, 1), 2, {Action.ABANDON, Action.TOSS}),
    ],
)
def test_legal_actions(variant, state, n, expected):
    assert legal_actions(variant, GameState(*state), n) == expected


def test_parse_variant():
    assert GameVariant.parse("JM2") is JM2
    assert str(JM3) == "jm3"
    with pytest.raises(ValueError):
        GameVariant.parse("jm4")


def test_toss_jm1_charges_both_branches():
    tails, heads = toss_transitions(JM1, (1, 2), 0.4)
    assert tails.next_state == (2, 2) and tails.probability == 0.4 and tails.reward == -0.4
    assert heads.next_state == (1, 3) and heads.probability == 0.6 and heads.reward == -0.4
    assert not tails.terminal and not heads.terminal


def test_toss_jm2_charges_heads_only():
    tails, heads = toss_transitions(JM2, (0, 0), 0.3)
    assert (tails.next_state, tails.probability, tails.reward) == ((1, 0), 0.3, 0.0)
    assert heads.next_state == (0, 1) and heads.probability == 0.7 and heads.reward == -0.3


def test_toss_degenerate_coin():
    tails, heads = toss_transitions(JM3, (0, 0), 0.0)
    assert tails.probability == 0 and heads.probability == 1 and heads.reward == 0


@pytest.mark.parametrize("q", [-0.1, 0.5, 0.7, math.nan])
def test_toss_rejects_q(q):
    with pytest.raises(ValueError):
        toss_transitions(JM2, (0, 0), q)


@pytest.mark.parametrize(
    "variant, state, q, reward",
    [(JM2, (2, 1), 0.3, 1.7), (JM3, (2, 1), 0.3, 1.4), (JM3, (1, 0), 0.0, 1.0)],
)
def test_crush(variant, state, q, reward):
    t = crush_transition(variant, state, q)
    assert t.next_state == (state[0] - state[1] - 1, 0)
    assert t.reward == pytest.approx(reward, abs=1e-15)
    assert t.probability == 1 and not t.terminal


def test_crush_rejections():
    with pytest.raises(ValueError):
        crush_transition(JM2, (1, 1), 0.3)
    with pytest.raises(ValueError):
        crush_transition(JM1, (3, 1), 0.3)


def test_abandon():
    assert abandon_transition(JM1, (1, 3)).terminal
    assert abandon_transition(JM1, (1, 3)).reward == 0
    t = abandon_transition(JM2, (1, 4))
    assert t.next_state == (0, 0) and t.reward == 0 and not t.terminal
    assert abandon_transition(JM3, (0, 0)).next_state == (0, 0)
    with pytest.raises(ValueError):
        abandon_transition(JM2, (2, 1))


def test_terminal_value():
    assert terminal_value(JM1, (3, 1), 5) == 3
    assert terminal_value(JM2, (3, 1), 0) == 0
    assert terminal_value(JM3, (0, 5), 7) is None
    assert terminal_value(JM1, (1, 1), 7) is None


def test_state_and_law_validation():
    with pytest.raises(ValueError):
        GameState.of(-1, 0)
    assert TossLaw(0.25).p == 0.75
    with pytest.raises(ValueError):
        TossLaw(0.5)


@given(st.sampled_from(list(GameVariant)), chips, chips, qs)
def test_toss_probabilities_sum_to_one(variant, a, h, q):
    tails, heads = toss_transitions(variant, (a, h), q)
    assert tails.probability + heads.probability == 1
    assert sum(tails.next_state) == sum(heads.next_state) == a + h + 1


@given(st.sampled_from([JM2, JM3]), chips, chips, qs)
def test_crush_and_abandon_chip_accounting(variant, a, h, q):
    if a > h:
        t = crush_transition(variant, (a, h), q)
        assert sum(t.next_state) == a - h - 1
    else:
        assert sum(abandon_transition(variant, (a, h)).next_state) == 0


@given(chips, chips, qs)
def test_jm2_jm3_differ_only_in_crush(a, h, q):
    assert toss_transitions(JM2, (a, h), q) == toss_transitions(JM3, (a, h), q)
    if a > h:
        diff = crush_transition(JM2, (a, h), q).reward - crush_transition(JM3, (a, h), q).reward
        assert diff == pytest.approx(q * h, abs=1e-12)
        assert legal_actions(JM2, (a, h), 3) == legal_actions(JM3, (a, h), 3)


@given(chips, chips)
def test_jm2_jm3_identical_at_q0(a, h):
    if a > h:
        assert crush_transition(JM2, (a, h), 0.0) == crush_transition(JM3, (a, h), 0.0)

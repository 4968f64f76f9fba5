"""Tests for pair classification, the tolerant step, and the error discipline."""

import pytest

from semdiff.core import Direction, Modifier, Power, StepWeights
from semdiff.reference import OPPOSITE_PAIR_RULES, _mod
from semdiff.tolerant import (
    IntervalAction,
    TolerantState,
    classify_pair,
    tolerant_step,
    validate_error_pattern,
)

W = StepWeights(0.25, 0.35, 0.45)

ALL_MODIFIERS = [Modifier(p, d) for p in Power for d in Direction]


class TestClassifyPair:
    def test_total_on_all_36_pairs(self):
        for prev in ALL_MODIFIERS:
            for curr in ALL_MODIFIERS:
                assert classify_pair(prev, curr) in IntervalAction

    @pytest.mark.parametrize("first,second,expected", OPPOSITE_PAIR_RULES)
    def test_published_opposite_direction_rules(self, first, second, expected):
        assert classify_pair(_mod(first), _mod(second)) is expected

    def test_same_direction_always_contracts(self):
        for p0 in Power:
            for p1 in Power:
                assert (
                    classify_pair(Modifier(p0, Direction.GREATER), Modifier(p1, Direction.GREATER))
                    is IntervalAction.SET_LOWER_TO_PREV_POSITION
                )
                assert (
                    classify_pair(Modifier(p0, Direction.LESS), Modifier(p1, Direction.LESS))
                    is IntervalAction.SET_UPPER_TO_PREV_POSITION
                )

    def test_classification_ignores_weight_magnitudes(self):
        # powers compare by rank, so the rule table needs no weight values at all
        pair = classify_pair(_mod("moderately greater"), _mod("slightly less"))
        assert pair is IntervalAction.SET_LOWER_TO_PREV_POSITION


class TestTolerantStep:
    def _state(self, lower, upper, position, prev=None, prev_pos=None):
        return TolerantState(
            lower=lower,
            upper=upper,
            position=position,
            step_index=0,
            epsilon=0.025,
            prev_input=prev,
            prev_position=prev_pos,
        )

    def test_first_input_leaves_interval_unchanged(self):
        state = self._state(-1, 1, 0)
        out = tolerant_step(state, _mod("moderately greater"), W)
        assert (out.lower, out.upper) == (-1, 1)
        assert out.position == pytest.approx(0.7)
        assert out.prev_input == _mod("moderately greater")
        assert out.prev_position == 0

    def test_neutral_pair_keeps_interval(self):
        # suspected error: opposite directions with rising power
        state = self._state(0, 1, 0.95, prev=_mod("slightly greater"), prev_pos=0.7)
        out = tolerant_step(state, _mod("moderately less"), W)
        assert (out.lower, out.upper) == (0, 1)
        assert out.position == pytest.approx(0.60)

    def test_same_direction_contracts_at_prev_position(self):
        state = self._state(0, 1, 0.6, prev=_mod("moderately less"), prev_pos=0.95)
        out = tolerant_step(state, _mod("slightly less"), W)
        assert (out.lower, out.upper) == (0, 0.95)
        assert out.position == pytest.approx(0.3625)

    def test_update_then_step_uses_contracted_width(self):
        state = self._state(0, 0.95, 0.3625, prev=_mod("slightly less"), prev_pos=0.6)
        out = tolerant_step(state, _mod("slightly less"), W)
        assert (out.lower, out.upper) == (0, 0.6)
        assert out.position == pytest.approx(0.3625 - 0.25 * 0.6)

    def test_weaker_opposite_contracts_on_prev_side(self):
        state = self._state(-1, 0, -0.55, prev=_mod("moderately greater"), prev_pos=-0.9)
        out = tolerant_step(state, _mod("slightly less"), W)
        assert (out.lower, out.upper) == (-0.9, 0)
        assert out.position == pytest.approx(-0.55 - 0.25 * 0.9)

    def test_strong_opposite_after_strong_is_neutral(self):
        state = self._state(-0.9, 0, -0.775, prev=_mod("slightly less"), prev_pos=-0.55)
        out = tolerant_step(state, _mod("significantly greater"), W)
        assert (out.lower, out.upper) == (-0.9, 0)
        assert out.position == pytest.approx(-0.775 + 0.45 * 0.9)

    def test_width_never_increases(self):
        import random

        rng = random.Random(5)
        state = self._state(-1, 1, 0)
        for _ in range(60):
            if state.width < state.epsilon:
                break
            width_before = state.width
            state = tolerant_step(state, ALL_MODIFIERS[rng.randrange(6)], W)
            assert state.width <= width_before + 1e-15

    def test_contraction_onto_position_terminates(self):
        # the pair update may close the interval exactly at the boundary
        state = self._state(0, 1, 0, prev=_mod("slightly less"), prev_pos=0.0)
        out = tolerant_step(state, _mod("slightly less"), W)
        assert out.width == 0.0


class TestValidateErrorPattern:
    def _h(self, *entries):
        return [(_mod(text), ok) for text, ok in entries]

    def test_stronger_correction_accepted(self):
        assert validate_error_pattern(
            self._h(("moderately greater", False), ("significantly less", True))
        )

    def test_weak_correction_rejected(self):
        assert not validate_error_pattern(
            self._h(("moderately greater", False), ("slightly less", True))
        )

    def test_equal_power_correction_rejected_below_significantly(self):
        assert not validate_error_pattern(
            self._h(("moderately greater", False), ("moderately less", True))
        )

    def test_significantly_corrects_significantly(self):
        assert validate_error_pattern(
            self._h(("significantly greater", False), ("significantly less", True))
        )

    def test_consecutive_errors_rejected(self):
        assert not validate_error_pattern(
            self._h(("slightly greater", False), ("slightly greater", False))
        )

    def test_error_free_history_accepted(self):
        assert validate_error_pattern(
            self._h(("moderately greater", True), ("slightly less", True), ("slightly less", True))
        )

"""Error-tolerant refinement: interval updates driven by pairs of inputs.

The simple loop trusts every direction, so one wrong answer can push the
target outside the working interval for good.  The tolerant variant defers
boundary updates until it has seen a *pair* of consecutive inputs and
classifies the pair:

  same direction twice        -> shrink on the first input's side
  opposite, power increased   -> leave the interval alone (suspected error)
  opposite, power not above   -> shrink on the first input's side,
                                 except significantly vs significantly,
                                 which stays neutral (no stronger corrective
                                 modifier exists)

Boundary updates anchor at the position from which the pair's first input
was issued.  The step itself is computed on the already-updated interval
(update-then-step), then moved, clamped and recorded exactly as in the
simple loop.

Assumed error discipline (enforced by the simulation harness, checked by
`validate_error_pattern`): no two consecutive wrong directions, and every
correction uses the opposite direction with a strictly stronger power, or
significantly after significantly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Tuple

from .core import (
    Direction,
    Modifier,
    Power,
    SearchState,
    StateTerminated,
    StepWeights,
    VariantSpace,
    initial_state,
    is_terminated,
)


class IntervalAction(Enum):
    UNCHANGED = "unchanged"
    SET_LOWER_TO_PREV_POSITION = "set_lower"
    SET_UPPER_TO_PREV_POSITION = "set_upper"


def classify_pair(prev: Modifier, curr: Modifier) -> IntervalAction:
    """Interval action for a consecutive input pair (total on all 36 pairs).

    Power comparison uses the Power total order, never raw weights, so the
    classification is independent of weight magnitudes.
    """
    if prev.direction is curr.direction:
        if prev.direction is Direction.GREATER:
            return IntervalAction.SET_LOWER_TO_PREV_POSITION
        return IntervalAction.SET_UPPER_TO_PREV_POSITION
    if prev.power < curr.power:
        return IntervalAction.UNCHANGED
    if prev.power is Power.SIGNIFICANTLY and curr.power is Power.SIGNIFICANTLY:
        return IntervalAction.UNCHANGED
    if prev.direction is Direction.GREATER:
        return IntervalAction.SET_LOWER_TO_PREV_POSITION
    return IntervalAction.SET_UPPER_TO_PREV_POSITION


@dataclass(frozen=True)
class TolerantState(SearchState):
    """SearchState plus the pair context: the previous input and where it was issued."""

    prev_input: Optional[Modifier] = None
    prev_position: Optional[float] = None


def initial_tolerant_state(space: VariantSpace, epsilon: Optional[float] = None) -> TolerantState:
    base = initial_state(space, epsilon)
    return TolerantState(
        lower=base.lower,
        upper=base.upper,
        position=base.position,
        step_index=base.step_index,
        epsilon=base.epsilon,
    )


def apply_action(
    action: IntervalAction, lower: float, upper: float, anchor: float
) -> Tuple[float, float]:
    """Apply a pair action to [lower, upper]; the anchor never widens the interval."""
    if action is IntervalAction.SET_LOWER_TO_PREV_POSITION:
        return (max(lower, anchor), upper)
    if action is IntervalAction.SET_UPPER_TO_PREV_POSITION:
        return (lower, min(upper, anchor))
    return (lower, upper)


def tolerant_step(state: TolerantState, modifier: Modifier, weights: StepWeights) -> TolerantState:
    """One error-tolerant step: pair update first, then move on the updated interval.

    The first input of a session performs no interval update.  A pair update
    may close the interval onto the current position (width 0); the resulting
    state is then terminated.
    """
    if is_terminated(state):
        raise StateTerminated(f"interval width {state.width} already below {state.epsilon}")
    weights.validate()
    lower, upper = state.lower, state.upper
    if state.prev_input is not None:
        action = classify_pair(state.prev_input, modifier)
        lower, upper = apply_action(action, lower, upper, state.prev_position)
    dx = weights.of(modifier.power) * (upper - lower)
    x_pre = state.position
    start = min(max(x_pre, lower), upper)  # pair update may have moved a boundary past x
    moved = min(max(start + modifier.direction.sign * dx, lower), upper)
    return replace(
        state,
        lower=lower,
        upper=upper,
        position=moved,
        step_index=state.step_index + 1,
        history=state.history + ((modifier, x_pre),),
        prev_input=modifier,
        prev_position=x_pre,
    )


def validate_error_pattern(history: Sequence[Tuple[Modifier, bool]]) -> bool:
    """Check a labelled history against the assumed error discipline.

    history: (modifier, correct) pairs.  Returns False if two consecutive
    inputs are wrong, or a wrong input is followed by a correct
    opposite-direction input whose power is not strictly stronger (the
    significantly-after-significantly correction being the one exception).
    """
    for (prev_mod, prev_ok), (curr_mod, curr_ok) in zip(history, history[1:]):
        if not prev_ok and not curr_ok:
            return False
        if not prev_ok and curr_ok and curr_mod.direction is not prev_mod.direction:
            if curr_mod.power < prev_mod.power:
                return False
            if curr_mod.power == prev_mod.power and prev_mod.power is not Power.SIGNIFICANTLY:
                return False
    return True

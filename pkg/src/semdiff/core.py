"""Core types and operations for fuzzy-modifier interval refinement.

A variant space is a symmetric grid of candidate parameter values around a
base value P0:

    V = { P0 + k*d : k integer, |k*d| <= D }

where D is the diffusion range and d the discretization step.  The user
steers a working interval [a, b] with fuzzy modifiers (power, direction).
Each power maps to a step weight w in (0, 1); one refinement step moves the
position by

    dx = w * (b - a)

in the requested direction, clamps to [a, b], and then shrinks the interval
on the side the user ruled out (a := x for "greater", b := x for "less",
using the pre-move position).  The loop stops when b - a < eps, at which
point the interval pins down a single grid variant.

Positions evolve continuously; grid snapping happens at the reporting
boundary (`variant_of`), so interval arithmetic stays exact across steps.

Step weights may be given directly or derived from triangular membership
functions via centroid defuzzification (`defuzzify_weights`), with a
numerical quadrature oracle (`centroid_weights_numeric`) kept independent
of the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum, IntEnum
from typing import Optional, Tuple


class Power(IntEnum):
    """Intensity of a requested change.  Total order: SLIGHTLY < MODERATELY < SIGNIFICANTLY."""

    SLIGHTLY = 0
    MODERATELY = 1
    SIGNIFICANTLY = 2

    @classmethod
    def from_name(cls, name: str) -> "Power":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise InvalidArgument(f"unknown power {name!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


class Direction(Enum):
    """Direction of a requested change; sign(GREATER) = +1, sign(LESS) = -1."""

    GREATER = 1
    LESS = -1

    @classmethod
    def from_name(cls, name: str) -> "Direction":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise InvalidArgument(f"unknown direction {name!r}") from None

    @property
    def sign(self) -> int:
        return self.value

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Modifier:
    """One user utterance: power x direction (6 combinations)."""

    power: Power
    direction: Direction

    def __str__(self) -> str:
        return f"{self.power.label} {self.direction.label}"


class InvalidArgument(ValueError):
    """Raised when an operation receives arguments violating its contract."""


class SpecInconsistency(ValueError):
    """Raised when derived step weights violate the required ordering."""


class StateTerminated(RuntimeError):
    """Raised when a step is applied to an already-terminated search state."""


# ---------------------------------------------------------------------------
# Variant space
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VariantSpace:
    """Symmetric grid of local variants around a base parameter value.

    count = 2 * floor(range / step) + 1; grid point k (k in [-half, half])
    maps to base + k * step.
    """

    base: float
    range: float
    step: float
    count: int

    @property
    def half_span(self) -> int:
        return (self.count - 1) // 2

    @property
    def lower(self) -> float:
        return self.base - self.half_span * self.step

    @property
    def upper(self) -> float:
        return self.base + self.half_span * self.step

    def value_at(self, k: int) -> float:
        if abs(k) > self.half_span:
            raise InvalidArgument(f"grid index {k} outside +-{self.half_span}")
        return self.base + k * self.step

    def index_of(self, x: float, movement: float = 0.0) -> int:
        """Nearest grid index to x; exact half-step ties break in the movement direction."""
        u = (x - self.base) / self.step
        k = math.floor(u + 0.5) if movement >= 0 else math.ceil(u - 0.5)
        return max(-self.half_span, min(self.half_span, k))

    def variant_of(self, x: float, movement: float = 0.0) -> float:
        """Grid variant displayed for a continuous position x."""
        return self.value_at(self.index_of(x, movement))

    def grid(self) -> Tuple[float, ...]:
        return tuple(self.value_at(k) for k in range(-self.half_span, self.half_span + 1))


def build_variant_space(base: float, range_: float, step: float) -> VariantSpace:
    """Construct the local variant grid {base + k*step : |k*step| <= range_}."""
    if not (range_ > 0):
        raise InvalidArgument(f"range must be positive, got {range_}")
    if not (step > 0):
        raise InvalidArgument(f"step must be positive, got {step}")
    if step > range_:
        raise InvalidArgument(f"step {step} exceeds range {range_}: empty diffusion")
    half = math.floor(range_ / step + 1e-12)
    return VariantSpace(base=base, range=range_, step=step, count=2 * half + 1)


# ---------------------------------------------------------------------------
# Membership functions and defuzzification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MembershipSpec:
    """Threshold divisors for the three intensity levels.

    With L the working-interval length:
      slightly:      plateau 1 on [0, L/k1], linear to 0 at L/k2
      moderately:    triangle (L/k3, L/k4, L/k5)
      significantly: 0 below L/k6, linear to 1 at L/k7, plateau 1 up to L

    Ordering: k1 > k2 >= 2, k3 > k4 > k5 >= 2, k6 > k7 >= 2, so that within
    each level the thresholds increase.
    """

    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float
    k7: float

    def validate(self) -> None:
        if not (self.k1 > self.k2 >= 2):
            raise InvalidArgument(f"need k1 > k2 >= 2, got k1={self.k1}, k2={self.k2}")
        if not (self.k3 > self.k4 > self.k5 >= 2):
            raise InvalidArgument(
                f"need k3 > k4 > k5 >= 2, got k3={self.k3}, k4={self.k4}, k5={self.k5}"
            )
        if not (self.k6 > self.k7 >= 2):
            raise InvalidArgument(f"need k6 > k7 >= 2, got k6={self.k6}, k7={self.k7}")

    def thresholds(self, power: Power, interval_length: float) -> Tuple[float, ...]:
        """(lo, hi) for slightly/significantly, (lo, mid, hi) for moderately."""
        L = interval_length
        if power is Power.SLIGHTLY:
            return (L / self.k1, L / self.k2)
        if power is Power.MODERATELY:
            return (L / self.k3, L / self.k4, L / self.k5)
        return (L / self.k6, L / self.k7)


def membership(power: Power, delta_x: float, spec: MembershipSpec, interval_length: float) -> float:
    """Piecewise-linear degree to which a step magnitude matches an intensity word.

    slightly is monotone non-increasing (plateau then ramp down), moderately a
    triangle, significantly monotone non-decreasing (ramp up then plateau).
    """
    if delta_x < 0:
        raise InvalidArgument(f"delta_x must be >= 0, got {delta_x}")
    if not (interval_length > 0):
        raise InvalidArgument(f"interval_length must be positive, got {interval_length}")
    spec.validate()
    if power is Power.SLIGHTLY:
        lo, hi = spec.thresholds(power, interval_length)
        if delta_x <= lo:
            return 1.0
        if delta_x >= hi:
            return 0.0
        return (hi - delta_x) / (hi - lo)
    if power is Power.MODERATELY:
        lo, mid, hi = spec.thresholds(power, interval_length)
        if delta_x <= lo or delta_x >= hi:
            return 0.0
        if delta_x <= mid:
            return (delta_x - lo) / (mid - lo)
        return (hi - delta_x) / (hi - mid)
    lo, hi = spec.thresholds(power, interval_length)
    if delta_x <= lo:
        return 0.0
    if delta_x >= hi:
        return 1.0
    return (delta_x - lo) / (hi - lo)


@dataclass(frozen=True)
class StepWeights:
    """Dimensionless step weights, one per power, with w_s < w_m < w_sig."""

    slightly: float
    moderately: float
    significantly: float

    def validate(self) -> None:
        if not (0.0 < self.slightly < self.moderately < self.significantly < 1.0):
            raise InvalidArgument(
                "weights must satisfy 0 < slightly < moderately < significantly < 1, "
                f"got {self.as_tuple()}"
            )

    def of(self, power: Power) -> float:
        return (self.slightly, self.moderately, self.significantly)[int(power)]

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.slightly, self.moderately, self.significantly)


def defuzzify_components(spec: MembershipSpec) -> Tuple[float, float, float]:
    """Per-power closed-form weights, without the cross-power ordering gate."""
    spec.validate()
    w_s = (7.0 / (2.0 * spec.k1) + 1.0 / spec.k2) / 3.0
    w_m = (1.0 / spec.k3 + 4.0 / spec.k4 + 1.0 / spec.k5) / 3.0
    w_sig = (1.0 / spec.k6 + 2.0 / spec.k7) / 3.0
    return (w_s, w_m, w_sig)


def defuzzify_weights(spec: MembershipSpec) -> StepWeights:
    """Closed-form step weights from a MembershipSpec.

        w_slightly      = (1/3) * (7/(2 k1) + 1/k2)
        w_moderately    = (1/3) * (1/k3 + 4/k4 + 1/k5)
        w_significantly = (1/3) * (1/k6 + 2/k7)

    These are the published closed forms.  Only the significantly form is the
    plain centroid of its membership segment; the other two sit above the
    segment centroid by a fixed threshold offset (see
    `centroid_weights_numeric` and the convention-resolution test).
    """
    weights = StepWeights(*defuzzify_components(spec))
    try:
        weights.validate()
    except InvalidArgument as exc:
        raise SpecInconsistency(str(exc)) from None
    return weights


def centroid_components_numeric(
    spec: MembershipSpec, convention: str = "limits"
) -> Tuple[float, float, float]:
    """Quadrature centroids of the three membership functions (interval fractions).

    convention:
      "limits"  - integrate x*mu and mu over [lo, hi] only (the sloped segment
                  for slightly/significantly, the whole triangle for moderately)
      "support" - integrate over the full support of mu within [0, L]
                  (includes the plateaus of slightly and significantly)

    Deliberately integrates the actual `membership` function rather than
    reusing any closed form.
    """
    from scipy.integrate import quad

    spec.validate()
    if convention not in ("limits", "support"):
        raise InvalidArgument(f"unknown convention {convention!r}")
    L = 1.0  # weights are interval fractions; integrate with unit length
    values = []
    for power in Power:
        th = spec.thresholds(power, L)
        lo, hi = th[0], th[-1]
        if convention == "support":
            if power is Power.SLIGHTLY:
                lo = 0.0
            elif power is Power.SIGNIFICANTLY:
                hi = L
        kinks = [t for t in th if lo < t < hi]  # piecewise joints inside the range
        mu = lambda x, p=power: membership(p, x, spec, L)
        num, _ = quad(lambda x: x * mu(x), lo, hi, points=kinks or None,
                      limit=200, epsabs=1e-13, epsrel=1e-13)
        den, _ = quad(mu, lo, hi, points=kinks or None,
                      limit=200, epsabs=1e-13, epsrel=1e-13)
        if den <= 0:
            raise SpecInconsistency(f"degenerate membership for {power.label}")
        values.append(num / den)
    return tuple(values)


def centroid_weights_numeric(spec: MembershipSpec, convention: str = "limits") -> StepWeights:
    """Quadrature oracle as ordered StepWeights; see `centroid_components_numeric`."""
    weights = StepWeights(*centroid_components_numeric(spec, convention))
    try:
        weights.validate()
    except InvalidArgument as exc:
        raise SpecInconsistency(str(exc)) from None
    return weights


# ---------------------------------------------------------------------------
# Search state and the simple refinement step
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchState:
    """Working interval [lower, upper], continuous position, and input history.

    Value semantics: steps return new states, so states are freely shared
    between threads.  history holds (modifier, position-at-issue) pairs.
    """

    lower: float
    upper: float
    position: float
    step_index: int
    epsilon: float
    history: Tuple[Tuple[Modifier, float], ...] = ()

    def __post_init__(self) -> None:
        if not (self.epsilon > 0):
            raise InvalidArgument(f"epsilon must be positive, got {self.epsilon}")
        if not (self.lower <= self.position <= self.upper):
            raise InvalidArgument(
                f"position {self.position} outside [{self.lower}, {self.upper}]"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower


def initial_state(space: VariantSpace, epsilon: Optional[float] = None) -> SearchState:
    """Fresh search over the full variant space, starting at the base; eps defaults to step/2."""
    eps = space.step / 2.0 if epsilon is None else epsilon
    if not (eps > 0):
        raise InvalidArgument(f"epsilon must be positive, got {eps}")
    return SearchState(
        lower=space.lower, upper=space.upper, position=space.base, step_index=0, epsilon=eps
    )


def is_terminated(state: SearchState) -> bool:
    """True iff the working interval is narrower than epsilon (strict)."""
    return (state.upper - state.lower) < state.epsilon


def simple_step(state: SearchState, modifier: Modifier, weights: StepWeights) -> SearchState:
    """One refinement step: move by w * width, clamp, then shrink one side.

    Order matters: dx comes from the pre-refinement interval; the boundary
    update uses the pre-move position.  The continuous position is kept;
    `space.variant_of` maps it to the displayed grid variant.
    """
    if is_terminated(state):
        raise StateTerminated(f"interval width {state.width} already below {state.epsilon}")
    weights.validate()
    dx = weights.of(modifier.power) * state.width
    signed = modifier.direction.sign * dx
    x_pre = state.position
    moved = min(max(x_pre + signed, state.lower), state.upper)
    if modifier.direction is Direction.GREATER:
        lower, upper = x_pre, state.upper
    else:
        lower, upper = state.lower, x_pre
    return replace(
        state,
        lower=lower,
        upper=upper,
        position=min(max(moved, lower), upper),
        step_index=state.step_index + 1,
        history=state.history + ((modifier, x_pre),),
    )


# ---------------------------------------------------------------------------
# Iteration bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IterationBounds:
    """Best/worst-case step-count estimates; fractional, callers round."""

    t_best: float
    t_worst: float


def iteration_bounds(L0: float, epsilon: float, weights: StepWeights) -> IterationBounds:
    """Two-step-contraction bounds on the number of refinement steps.

        t_worst = 2 log(L0/eps) / log(1 / max(w_sig, 1 - w_s))
        t_best  = 2 log(L0/eps) / log(1 / min(1 - w_sig, w_s))

    The worst case alternates directions under the strongest modifier (or
    repeats under the weakest); the best case is the opposite pairing.
    """
    weights.validate()
    if not (L0 > epsilon > 0):
        raise InvalidArgument(f"need L0 > epsilon > 0, got L0={L0}, epsilon={epsilon}")
    log_ratio = math.log(L0 / epsilon)
    gamma_worst = max(weights.significantly, 1.0 - weights.slightly)
    gamma_best = min(1.0 - weights.significantly, weights.slightly)
    t_worst = 2.0 * log_ratio / math.log(1.0 / gamma_worst)
    t_best = 2.0 * log_ratio / math.log(1.0 / gamma_best)
    return IterationBounds(t_best=t_best, t_worst=t_worst)

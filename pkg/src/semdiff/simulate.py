"""Simulation harness: synthetic users, binary baselines, comparisons, weight search.

Runs operate on n grid points spread over [-1, 1] (spacing d = 2/(n-1)),
starting at x0 = 0 with termination precision eps = d/2.  The synthetic user
walks toward a chosen target x*:

  direction: toward x* (GREATER on exact equality)
  power:     the one whose step w_p * width is closest to |x* - x|,
             ties to the weaker power ("closest step" rule)

Two stopping conventions exist for a run:

  precision - stop when the working interval is narrower than eps
              (the algorithm's own termination)
  confirm   - additionally stop as soon as the position lands exactly on
              the target (the user recognises the variant and confirms)

The binary baseline is likewise a convention, not a single algorithm; all
supported conventions live in `binary_search_steps` and are surveyed by
`calibrate_binary`.  The default comparison pairs precision-stop runs with
"index_halving" (bisect-style iteration counting); the calibrated pairing
that reproduces the published n=9 headline (4 wins / 1 draw / 4 losses at
weights 0.250/0.361/0.444) is confirm-stop runs against
"protocol_halving_confirm" - the same interactive protocol driven with
half-width steps.

Erroneous users flip the direction with probability p_err per query, under
the structural discipline the tolerant algorithm assumes: never two wrong
answers in a row, every mistake corrected by the opposite direction with a
strictly stronger power (significantly repeats itself), and never more than
two consecutive neutral interval updates.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    Direction,
    InvalidArgument,
    Modifier,
    Power,
    SearchState,
    StepWeights,
    is_terminated,
    simple_step,
)
from .tolerant import (
    IntervalAction,
    TolerantState,
    apply_action,
    classify_pair,
    tolerant_step,
    validate_error_pattern,
)


class PolicyMode(Enum):
    ERROR_FREE = "error_free"
    ERRONEOUS = "erroneous"


class PowerRule(Enum):
    CLOSEST_STEP = "closest_step"


@dataclass(frozen=True)
class UserPolicy:
    """Synthetic user configuration; deterministic given rng_seed."""

    mode: PolicyMode = PolicyMode.ERROR_FREE
    p_err: float = 0.0
    power_rule: PowerRule = PowerRule.CLOSEST_STEP
    rng_seed: int = 0

    def validate(self) -> None:
        if not (0.0 <= self.p_err < 1.0):
            raise InvalidArgument(f"p_err must be in [0, 1), got {self.p_err}")
        if self.mode is PolicyMode.ERROR_FREE and self.p_err != 0.0:
            raise InvalidArgument("error-free policy must have p_err = 0")


ERROR_FREE = UserPolicy()


@dataclass(frozen=True)
class GridProblem:
    """n points on [-1, 1]; target index ti; x0 = 0; eps = spacing / 2."""

    n: int
    target_index: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise InvalidArgument(f"need n >= 2, got {self.n}")
        if not (0 <= self.target_index < self.n):
            raise InvalidArgument(f"target index {self.target_index} outside [0, {self.n})")

    @property
    def spacing(self) -> float:
        return 2.0 / (self.n - 1)

    @property
    def epsilon(self) -> float:
        return self.spacing / 2.0

    @property
    def target(self) -> float:
        return -1.0 + self.target_index * self.spacing

    def nearest_index(self, x: float) -> int:
        k = int(math.floor((x + 1.0) / self.spacing + 0.5))
        return max(0, min(self.n - 1, k))

    def value_at(self, k: int) -> float:
        return -1.0 + k * self.spacing


@dataclass(frozen=True)
class TraceStep:
    lower: float
    upper: float
    position: float
    modifier: Modifier
    dx: float
    correct: bool
    action: Optional[IntervalAction]
    variant: float


@dataclass(frozen=True)
class RunTrace:
    """Full record of one simulated run.

    widths[t] is the interval width before step t (widths[0] = initial);
    gammas[t] = widths[t+1] / widths[t].  contracting/neutral counts
    classify consecutive input pairs via the tolerant pair rule.
    """

    n: int
    target_index: int
    weights: StepWeights
    algorithm: str
    stop: str
    steps: Tuple[TraceStep, ...]
    widths: Tuple[float, ...]
    gammas: Tuple[float, ...]
    contracting_count: int
    neutral_count: int
    terminated: bool
    confirmed: bool
    final_position: float
    final_variant: float
    epsilon: float

    @property
    def step_count(self) -> int:
        return len(self.steps)

    @property
    def target(self) -> float:
        return GridProblem(self.n, self.target_index).target


class SimulationFault(RuntimeError):
    """Internal invariant violated during a simulated run."""


class _User:
    """Direction/power chooser implementing the error model.

    Errors are injected only when the previous input was correct and the last
    two pair updates were not both neutral; each error forces the next input
    to be the stronger opposite-direction correction.  Once two consecutive
    neutral updates have occurred the next input is constrained to a
    contracting pair, which the discipline always permits.
    """

    def __init__(self, problem: GridProblem, weights: StepWeights, policy: UserPolicy):
        self.problem = problem
        self.weights = weights
        self.policy = policy
        self.rng = random.Random(policy.rng_seed)
        self.pending_correction: Optional[Power] = None
        self.last_correct = True
        self.neutral_streak = 0

    def _true_direction(self, x: float) -> Direction:
        if self.problem.target > x:
            return Direction.GREATER
        if self.problem.target < x:
            return Direction.LESS
        return Direction.GREATER  # exact arrival; direction is arbitrary

    def _closest_among(self, width: float, dist: float, allowed: Sequence[Power]) -> Power:
        return min(allowed, key=lambda p: (abs(self.weights.of(p) * width - dist), int(p)))

    def choose(self, x: float, lower: float, upper: float, prev: Optional[Modifier]) -> Tuple[Modifier, bool]:
        width = upper - lower
        dist = abs(self.problem.target - x)
        true_dir = self._true_direction(x)
        if self.pending_correction is not None:
            floor = self.pending_correction
            allowed = [p for p in Power if p > floor] or [Power.SIGNIFICANTLY]
            power = self._closest_among(width, dist, allowed)
            self.pending_correction = None
            return Modifier(power, true_dir), True
        inject = (
            self.policy.mode is PolicyMode.ERRONEOUS
            and self.last_correct
            and self.neutral_streak == 0
            and self.rng.random() < self.policy.p_err
        )
        if self.neutral_streak >= 2:
            # force a contracting pair: same direction allows any power,
            # opposite direction needs power <= prev (and not sig-vs-sig)
            if prev is not None and true_dir is not prev.direction:
                allowed = [p for p in Power if p <= prev.power]
                if prev.power is Power.SIGNIFICANTLY:
                    allowed = [p for p in allowed if p is not Power.SIGNIFICANTLY]
            else:
                allowed = list(Power)
            return Modifier(self._closest_among(width, dist, allowed), true_dir), True
        if inject:
            wrong = Direction.GREATER if true_dir is Direction.LESS else Direction.LESS
            power = self._closest_among(width, dist, list(Power))
            self.pending_correction = power
            return Modifier(power, wrong), False
        return Modifier(self._closest_among(width, dist, list(Power)), true_dir), True

    def observe(self, correct: bool, action: Optional[IntervalAction]) -> None:
        self.last_correct = correct
        if action is None:
            return
        if action is IntervalAction.UNCHANGED:
            self.neutral_streak += 1
        else:
            self.neutral_streak = 0


def simulate_run(
    n: int,
    target_index: int,
    weights: StepWeights,
    policy: UserPolicy = ERROR_FREE,
    algorithm: str = "simple",
    stop: str = "precision",
    max_steps: int = 100_000,
    allow_errors_with_simple: bool = False,
) -> RunTrace:
    """Run one simulated refinement and return its full trace.

    algorithm: "simple" | "tolerant"; stop: "precision" | "confirm".
    Deterministic: identical arguments (including policy.rng_seed) give an
    identical trace.
    """
    policy.validate()
    weights.validate()
    if algorithm not in ("simple", "tolerant"):
        raise InvalidArgument(f"unknown algorithm {algorithm!r}")
    if stop not in ("precision", "confirm"):
        raise InvalidArgument(f"unknown stop convention {stop!r}")
    if policy.mode is PolicyMode.ERRONEOUS and algorithm == "simple" and not allow_errors_with_simple:
        raise InvalidArgument("erroneous policy with the simple algorithm requires opting in")
    problem = GridProblem(n, target_index)
    user = _User(problem, weights, policy)

    if algorithm == "simple":
        state: SearchState = SearchState(
            lower=-1.0, upper=1.0, position=0.0, step_index=0, epsilon=problem.epsilon
        )
    else:
        state = TolerantState(
            lower=-1.0, upper=1.0, position=0.0, step_index=0, epsilon=problem.epsilon
        )

    steps: List[TraceStep] = []
    widths = [state.width]
    labelled: List[Tuple[Modifier, bool]] = []
    confirmed = False
    if stop == "confirm" and state.position == problem.target:
        confirmed = True
    while not confirmed and not is_terminated(state):
        if len(steps) >= max_steps:
            raise SimulationFault(f"no termination after {max_steps} steps (n={n}, ti={target_index})")
        prev_mod = state.prev_input if isinstance(state, TolerantState) else (
            state.history[-1][0] if state.history else None
        )
        modifier, correct = user.choose(state.position, state.lower, state.upper, prev_mod)
        action: Optional[IntervalAction] = None
        if isinstance(state, TolerantState):
            lo, up = state.lower, state.upper
            if state.prev_input is not None:
                action = classify_pair(state.prev_input, modifier)
                lo, up = apply_action(action, lo, up, state.prev_position)
            dx = weights.of(modifier.power) * (up - lo)
            state = tolerant_step(state, modifier, weights)
        else:
            if state.history:
                action = classify_pair(state.history[-1][0], modifier)  # diagnostic only
            dx = weights.of(modifier.power) * state.width
            state = simple_step(state, modifier, weights)
        user.observe(correct, action if algorithm == "tolerant" else None)
        variant = problem.value_at(problem.nearest_index(state.position))
        steps.append(
            TraceStep(
                lower=state.lower,
                upper=state.upper,
                position=state.position,
                modifier=modifier,
                dx=dx,
                correct=correct,
                action=action,
                variant=variant,
            )
        )
        widths.append(state.width)
        labelled.append((modifier, correct))
        if stop == "confirm" and state.position == problem.target:
            confirmed = True
    if policy.mode is PolicyMode.ERRONEOUS and not validate_error_pattern(labelled):
        raise SimulationFault("generator emitted a history violating the error discipline")
    gammas = tuple(widths[i + 1] / widths[i] if widths[i] > 0 else 0.0 for i in range(len(widths) - 1))
    contracting = sum(1 for s in steps if s.action not in (None, IntervalAction.UNCHANGED))
    neutral = sum(1 for s in steps if s.action is IntervalAction.UNCHANGED)
    final_variant = problem.value_at(problem.nearest_index(state.position))
    return RunTrace(
        n=n,
        target_index=target_index,
        weights=weights,
        algorithm=algorithm,
        stop=stop,
        steps=tuple(steps),
        widths=tuple(widths),
        gammas=gammas,
        contracting_count=contracting,
        neutral_count=neutral,
        terminated=is_terminated(state),
        confirmed=confirmed,
        final_position=state.position,
        final_variant=final_variant,
        epsilon=problem.epsilon,
    )


# ---------------------------------------------------------------------------
# Binary baselines
# ---------------------------------------------------------------------------

BINARY_CONVENTIONS = (
    "probe_equality_lower",
    "probe_equality_upper",
    "index_halving",
    "index_halving_left",
    "interval_halving_le",
    "interval_halving_lt",
    "midpoint_probe_le",
    "midpoint_probe_lt",
    "protocol_halving_confirm",
)


def binary_search_steps(n: int, target_index: int, convention: str = "probe_equality_lower") -> int:
    """Step count for one binary-search convention on the same n-point grid.

    probe_equality_*: index bisection counting probes until the probed index
    equals the target (lower or upper middle).  index_halving*: bisect-style
    iteration count of halving [0, n) until the range collapses.
    interval_halving_*: halve [-1, 1] by direction answers until the width
    passes eps.  midpoint_probe_*: probe interval midpoints, stopping on an
    exact hit with a width backstop.  protocol_halving_confirm: the
    interactive protocol itself with half-width steps and confirm-on-arrival.
    """
    problem = GridProblem(n, target_index)
    ti = target_index
    eps = problem.epsilon
    if convention in ("probe_equality_lower", "probe_equality_upper"):
        lo, hi, t = 0, n - 1, 0
        while True:
            mid = (lo + hi) // 2 if convention.endswith("lower") else (lo + hi + 1) // 2
            t += 1
            if mid == ti:
                return t
            if ti > mid:
                lo = mid + 1
            else:
                hi = mid - 1
    if convention in ("index_halving", "index_halving_left"):
        lo, hi, t = 0, n, 0
        while lo < hi:
            mid = (lo + hi) // 2
            t += 1
            go_right = (mid <= ti) if convention == "index_halving" else (mid < ti)
            if go_right:
                lo = mid + 1
            else:
                hi = mid
        return t
    if convention in ("interval_halving_le", "interval_halving_lt"):
        a, b, t = -1.0, 1.0, 0
        x_star = problem.target
        while True:
            m = 0.5 * (a + b)
            t += 1
            if x_star >= m:
                a = m
            else:
                b = m
            w = b - a
            if (convention.endswith("le") and w <= eps) or (convention.endswith("lt") and w < eps):
                return t
    if convention in ("midpoint_probe_le", "midpoint_probe_lt"):
        a, b, t = -1.0, 1.0, 0
        x_star = problem.target
        while True:
            m = 0.5 * (a + b)
            t += 1
            if m == x_star:
                return t
            if x_star > m:
                a = m
            else:
                b = m
            w = b - a
            if (convention.endswith("le") and w <= eps) or (convention.endswith("lt") and w < eps):
                return t
    if convention == "protocol_halving_confirm":
        a, b, x, t = -1.0, 1.0, 0.0, 0
        x_star = problem.target
        if x == x_star:
            return 0
        while True:
            width = b - a
            d = 1.0 if x_star > x else (-1.0 if x_star < x else 1.0)
            x_pre = x
            x = min(max(x + d * 0.5 * width, a), b)
            t += 1
            if d > 0:
                a = x_pre
            else:
                b = x_pre
            if x == x_star or (b - a) < eps:
                return t
            if t > 10_000:
                raise SimulationFault(f"binary runaway at n={n}, ti={ti}")
    raise InvalidArgument(f"unknown binary convention {convention!r}")


# ---------------------------------------------------------------------------
# Comparison and weight optimization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Conventions:
    """Pairing of a fuzzy stop rule with a binary baseline convention."""

    fuzzy_stop: str = "precision"
    binary: str = "index_halving"


DEFAULT_CONVENTIONS = Conventions()
# Reproduces the published n=9 headline split exactly; see calibrate_binary.
CALIBRATED_CONVENTIONS = Conventions(fuzzy_stop="confirm", binary="protocol_halving_confirm")


@dataclass(frozen=True)
class TargetOutcome:
    target_index: int
    t_fuzzy: int
    t_binary: int
    outcome: str  # "win" | "tie" | "loss" from the fuzzy side's viewpoint


@dataclass(frozen=True)
class ComparisonReport:
    n: int
    weights: StepWeights
    conventions: Conventions
    per_target: Tuple[TargetOutcome, ...]
    wins: int
    draws: int
    losses: int

    @property
    def win_rate(self) -> float:
        return self.wins / self.n


def compare_vs_binary(
    n: int,
    weights: StepWeights,
    policy: UserPolicy = ERROR_FREE,
    conventions: Conventions = DEFAULT_CONVENTIONS,
) -> ComparisonReport:
    """Per-target step-count comparison of the fuzzy run against the binary baseline."""
    if policy.mode is not PolicyMode.ERROR_FREE:
        raise InvalidArgument("comparisons require an error-free policy")
    outcomes = []
    wins = draws = losses = 0
    for ti in range(n):
        tf = simulate_run(n, ti, weights, policy, "simple", conventions.fuzzy_stop).step_count
        tb = binary_search_steps(n, ti, conventions.binary)
        if tf < tb:
            outcome = "win"
            wins += 1
        elif tf == tb:
            outcome = "tie"
            draws += 1
        else:
            outcome = "loss"
            losses += 1
        outcomes.append(TargetOutcome(ti, tf, tb, outcome))
    return ComparisonReport(
        n=n,
        weights=weights,
        conventions=conventions,
        per_target=tuple(outcomes),
        wins=wins,
        draws=draws,
        losses=losses,
    )


def fuzzy_counts_vectorized(
    n: int, target_index: int, weight_array: np.ndarray, stop: str = "precision",
    max_steps: int = 4000,
) -> np.ndarray:
    """Step counts of the error-free closest-step run for many weight triples at once.

    weight_array: (m, 3) float array of ordered triples.  Bit-compatible with
    simulate_run (same float operations in the same order per run).
    """
    problem = GridProblem(n, target_index)
    x_star = problem.target
    eps = problem.epsilon
    m = weight_array.shape[0]
    a = np.full(m, -1.0)
    b = np.full(m, 1.0)
    x = np.zeros(m)
    counts = np.zeros(m, dtype=np.int64)
    alive_idx = np.arange(m)
    if stop == "confirm" and x_star == 0.0:
        return counts
    W = weight_array
    for step in range(1, max_steps + 1):
        if alive_idx.size == 0:
            return counts
        steps_all = W[alive_idx] * (b - a)[alive_idx, None]
        dist = np.abs(x_star - x)
        err = np.abs(steps_all - dist[alive_idx, None])
        p = np.argmin(err, axis=1)  # argmin keeps the first (weaker) power on ties
        d = np.where(x[alive_idx] < x_star, 1.0, np.where(x[alive_idx] > x_star, -1.0, 1.0))
        move = steps_all[np.arange(alive_idx.size), p]
        x_pre = x[alive_idx]
        x_new = np.clip(x_pre + d * move, a[alive_idx], b[alive_idx])
        x[alive_idx] = x_new
        greater = d > 0
        a[alive_idx[greater]] = x_pre[greater]
        b[alive_idx[~greater]] = x_pre[~greater]
        counts[alive_idx] = step
        done = (b[alive_idx] - a[alive_idx]) < eps
        if stop == "confirm":
            done |= x[alive_idx] == x_star
        alive_idx = alive_idx[~done]
    raise SimulationFault(f"vectorized run exceeded {max_steps} steps (n={n}, ti={target_index})")


def ordered_weight_grid(resolution: float = 0.01, lo: float = None, hi: float = 0.999) -> np.ndarray:
    """All ordered triples w_s < w_m < w_sig on a uniform grid over (0, 1)."""
    if resolution < 0.001:
        raise InvalidArgument(f"grid resolution must be >= 0.001, got {resolution}")
    start = resolution if lo is None else lo
    vals = np.round(np.arange(start, hi, resolution), 9)
    idx = np.arange(len(vals))
    ii, jj, kk = np.meshgrid(idx, idx, idx, indexing="ij")
    mask = (ii < jj) & (jj < kk)
    return np.column_stack([vals[ii[mask]], vals[jj[mask]], vals[kk[mask]]])


def optimize_weights(
    n: int,
    resolution: float = 0.01,
    conventions: Conventions = DEFAULT_CONVENTIONS,
    grid: Optional[np.ndarray] = None,
) -> Tuple[StepWeights, ComparisonReport]:
    """Exhaustive search for the weights maximizing the win count against the baseline.

    Ties on the win count are broken by the lexicographically largest triple:
    the smallest-triple rule systematically lands on degenerate micro-step
    corners of the optimum set, inverting the published tendency of the
    optima to shrink as the grid densifies (see the decisions ledger).
    """
    W = ordered_weight_grid(resolution) if grid is None else np.asarray(grid, dtype=float)
    if W.size == 0:
        raise InvalidArgument("empty feasible weight grid")
    B = np.array([binary_search_steps(n, ti, conventions.binary) for ti in range(n)])
    wins = np.zeros(len(W), dtype=np.int64)
    for ti in range(n):
        F = fuzzy_counts_vectorized(n, ti, W, stop=conventions.fuzzy_stop)
        wins += F < B[ti]
    best = int(wins.max())
    tied = W[wins == best]
    order = np.lexsort((tied[:, 2], tied[:, 1], tied[:, 0]))
    w = tied[order[-1]]
    weights = StepWeights(float(w[0]), float(w[1]), float(w[2]))
    report = compare_vs_binary(n, weights, ERROR_FREE, conventions)
    if report.wins != best:
        raise SimulationFault(
            f"vectorized optimum ({best} wins) disagrees with scalar replay ({report.wins})"
        )
    return weights, report


# ---------------------------------------------------------------------------
# Contraction probability estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ContractionEstimate:
    """Monte-Carlo estimates of per-pair contraction probabilities.

    p_c_hat:  fraction of pair updates that contracted the interval
    pi_c_hat: same fraction among pairs whose inputs were both correct
    realized_err_rate: measured per-query error fraction (the discipline
        suppresses and corrects errors, so this sits below the nominal p_err)
    discrepancy: |p_c_hat - pi_c_hat * (1 - p_err)| using the nominal p_err
    """

    p_c_hat: float
    pi_c_hat: float
    p_err: float
    trials: int
    pairs: int
    realized_err_rate: float
    discrepancy: float
    standard_error: float


def estimate_contraction_probability(
    n: int,
    weights: StepWeights,
    policy: UserPolicy,
    trials: int = 1000,
) -> ContractionEstimate:
    """Estimate contraction probabilities from repeated tolerant runs."""
    if trials < 1000:
        raise InvalidArgument(f"need at least 1000 trials, got {trials}")
    if policy.mode is not PolicyMode.ERRONEOUS:
        raise InvalidArgument("contraction estimation needs an erroneous policy")
    rng = random.Random(policy.rng_seed)
    pairs = contracting = 0
    both_correct = both_correct_contracting = 0
    queries = query_errors = 0
    for trial in range(trials):
        ti = rng.randrange(n)
        run = simulate_run(
            n,
            ti,
            weights,
            UserPolicy(policy.mode, policy.p_err, policy.power_rule, rng.randrange(2**31)),
            algorithm="tolerant",
        )
        queries += len(run.steps)
        query_errors += sum(1 for s in run.steps if not s.correct)
        for prev, curr in zip(run.steps, run.steps[1:]):
            pairs += 1
            contracted = curr.action is not IntervalAction.UNCHANGED
            contracting += contracted
            if prev.correct and curr.correct:
                both_correct += 1
                both_correct_contracting += contracted
    p_c = contracting / pairs
    pi_c = both_correct_contracting / both_correct if both_correct else float("nan")
    se = math.sqrt(p_c * (1.0 - p_c) / pairs)
    return ContractionEstimate(
        p_c_hat=p_c,
        pi_c_hat=pi_c,
        p_err=policy.p_err,
        trials=trials,
        pairs=pairs,
        realized_err_rate=query_errors / queries if queries else 0.0,
        discrepancy=abs(p_c - pi_c * (1.0 - policy.p_err)),
        standard_error=se,
    )

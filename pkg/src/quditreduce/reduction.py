"""Staged elimination of product-basis terms by recorded plane rotations.

A stage k (k = 0 .. n-2) works against the anchor term |kk...k> and
eliminates every term that has one digit d > k at a single site and
digit k everywhere else. Each elimination applies a zeroing rotation in
span{|k>, |d>} at the target's site, which moves the target's squared
magnitude onto the anchor; iterating drives the maximum target
magnitude below epsilon. Because stage-k rotations act as the identity
on levels below k, later stages cannot revive terms zeroed earlier, and
after all stages at most n**l - n(n-1)l/2 terms survive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InternalConsistencyError, NonConvergenceError
from .state import MultiIndex, PureState, index_encode, rotate_pair_inplace

STRATEGIES = ("greedy", "round-robin")

DEFAULT_EPSILON = 1e-12
DEFAULT_MAX_ITERS = 10000

#: A completed stage must leave earlier-stage targets below this
#: multiple of epsilon, else the run aborts as internally inconsistent.
PRESERVATION_FACTOR = 10.0


@dataclass
class LocalRotation:
    """One recorded elimination step: a 2x2 unitary mixing levels
    (level_a, level_b) = (stage, target digit) at ``site``."""

    stage: int
    site: int
    level_a: int
    level_b: int
    entries: np.ndarray

    def inverse_entries(self) -> np.ndarray:
        return self.entries.conj().T


@dataclass
class StageTarget:
    """A term eliminable in stage ``stage``: digit ``digit`` at ``site``,
    digit ``stage`` at every other site."""

    stage: int
    site: int
    digit: int
    index: MultiIndex


@dataclass
class StageReport:
    """Iteration record of one stage.

    anchor_history[0] is the anchor magnitude before the first step and
    anchor_history[N] the magnitude after step N; pivot_history[N-1] is
    the magnitude of the target eliminated at step N. residual is the
    maximum target magnitude when the loop stopped.
    """

    stage: int
    iterations: int
    residual: float
    anchor_history: list[float]
    pivot_history: list[float]
    converged: bool
    #: Auxiliary only; convergence is judged on the max-magnitude residual.
    residual_sq_sum: float = 0.0


@dataclass
class ReductionReport:
    n: int
    l: int
    strategy: str
    epsilon: float
    max_iters_per_stage: int
    support_threshold: float
    stages: list[StageReport] = field(default_factory=list)
    #: After each completed stage: max magnitude over all earlier-stage targets.
    stage_preservation: list[float] = field(default_factory=list)
    support_before: int = 0
    support_after: int = 0
    bound: int = 0
    norm_drift: float = 0.0
    converged: bool = False


@dataclass
class DecompositionTrace:
    """Recorded rotations plus the state they produced. Applying the
    conjugate transposes to final_state in reverse order reproduces the
    original input."""

    original_norm: float
    rotations: list[LocalRotation]
    final_state: PureState


def zeroing_rotation(anchor_amp, target_amp) -> np.ndarray:
    """2x2 unitary R with R @ (anchor, target)^T = (r, 0)^T, r >= 0 real.

    r is the Euclidean length of the input pair, so the rotation moves
    the target's squared magnitude onto the anchor. Total function:
    when both inputs are (essentially) zero it returns the identity.
    """
    x = complex(anchor_amp)
    y = complex(target_amp)
    r = math.hypot(abs(x), abs(y))
    if r < 1e-300:
        return np.eye(2, dtype=np.complex128)
    return np.array(
        [[x.conjugate() / r, y.conjugate() / r],
         [-y / r, x / r]],
        dtype=np.complex128,
    )


def term_bound(n: int, l: int) -> int:
    """Maximum surviving term count after a converged reduction:
    n**l - n(n-1)l/2."""
    return n**l - n * (n - 1) * l // 2


def support_count(state: PureState, threshold: float) -> int:
    """Number of amplitudes with magnitude strictly above ``threshold``."""
    return int(np.count_nonzero(np.abs(state.amplitudes) > threshold))


def stage_targets(n: int, l: int, k: int) -> list[StageTarget]:
    """All (n-1-k)*l targets of stage k, ordered by site then digit.

    That ordering coincides with ascending flat index, which the greedy
    tie-break relies on.
    """
    if not 0 <= k <= n - 2:
        raise ValueError(f"stage {k} outside [0, {n - 2}] for n={n}")
    targets = []
    for site in range(l):
        for digit in range(k + 1, n):
            index = tuple(digit if i == site else k for i in range(l))
            targets.append(StageTarget(stage=k, site=site, digit=digit,
                                       index=index))
    return targets


def _anchor_flat(n: int, l: int, k: int) -> int:
    return index_encode((k,) * l, n)


def _run_stage(work: np.ndarray, n: int, l: int, k: int, strategy: str,
               epsilon: float, max_iters: int):
    """Elimination loop on a raw amplitude vector, mutating ``work``.

    Returns (rotations, StageReport); raises NonConvergenceError with
    the partial rotation list attached when max_iters is exhausted.
    """
    targets = stage_targets(n, l, k)
    flats = np.array([index_encode(t.index, n) for t in targets])
    anchor = _anchor_flat(n, l, k)

    rotations: list[LocalRotation] = []
    anchor_history = [float(abs(work[anchor]))]
    pivot_history: list[float] = []

    def eliminate(target: StageTarget, flat: int) -> None:
        rot = zeroing_rotation(work[anchor], work[flat])
        pivot_history.append(float(abs(work[flat])))
        rotate_pair_inplace(work, n, l, target.site, k, target.digit, rot)
        anchor_history.append(float(abs(work[anchor])))
        rotations.append(LocalRotation(stage=k, site=target.site, level_a=k,
                                       level_b=target.digit, entries=rot))

    def fail(residual: float):
        report = StageReport(
            stage=k, iterations=len(rotations), residual=residual,
            anchor_history=anchor_history, pivot_history=pivot_history,
            converged=False,
            residual_sq_sum=float(np.sum(np.abs(work[flats]) ** 2)),
        )
        trace = DecompositionTrace(
            original_norm=float(np.linalg.norm(work)),
            rotations=list(rotations),
            final_state=PureState(n, l, work.copy()),
        )
        raise NonConvergenceError(
            f"stage {k} ({strategy}) still at residual {residual:.3e} "
            f"after {max_iters} eliminations (epsilon {epsilon:.1e})",
            residual=residual, trace=trace, report=report,
        )

    while True:
        mags = np.abs(work[flats])
        if strategy == "greedy":
            # argmax returns the first maximum; targets are in ascending
            # flat order, which implements the smallest-flat tie-break.
            j = int(np.argmax(mags))
            residual = float(mags[j])
            if residual < epsilon:
                break
            if len(rotations) >= max_iters:
                fail(residual)
            eliminate(targets[j], int(flats[j]))
        else:
            residual = float(np.max(mags))
            if residual < epsilon:
                break
            # One full pass, skipping targets already below epsilon.
            for target, flat in zip(targets, flats):
                if abs(work[flat]) < epsilon:
                    continue
                if len(rotations) >= max_iters:
                    fail(float(np.max(np.abs(work[flats]))))
                eliminate(target, int(flat))

    report = StageReport(
        stage=k, iterations=len(rotations), residual=residual,
        anchor_history=anchor_history, pivot_history=pivot_history,
        converged=True,
        residual_sq_sum=float(np.sum(np.abs(work[flats]) ** 2)),
    )
    return rotations, report


def eliminate_stage(state: PureState, k: int, strategy: str = "greedy",
                    epsilon: float = DEFAULT_EPSILON,
                    max_iters: int = DEFAULT_MAX_ITERS):
    """Drive every stage-k target below epsilon.

    greedy picks the largest-magnitude target each step (smallest flat
    index on ties); round-robin sweeps the targets in order, skipping
    those already below epsilon. Either way each step zeroes its target
    exactly and never shrinks the anchor, so the eliminated magnitudes
    are square-summable and the loop terminates for any epsilon > 0 in
    exact arithmetic; max_iters is the practical stop.

    Returns (new state, rotations, StageReport).
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}, expected one of {STRATEGIES}")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    work = state.amplitudes.copy()
    rotations, report = _run_stage(work, state.n, state.l, k, strategy,
                                   epsilon, max_iters)
    return PureState(state.n, state.l, work), rotations, report


def reduce(state: PureState, strategy: str = "greedy",
           epsilon: float = DEFAULT_EPSILON,
           max_iters_per_stage: int = DEFAULT_MAX_ITERS,
           support_threshold: float | None = None):
    """Run all stages k = 0 .. n-2 and report the outcome.

    Returns (DecompositionTrace, ReductionReport). After each stage the
    targets of all earlier stages are re-checked; a magnitude above
    10*epsilon there is an InternalConsistencyError. Non-convergence of
    any stage raises NonConvergenceError carrying the partial trace and
    report.
    """
    if support_threshold is None:
        support_threshold = PRESERVATION_FACTOR * epsilon
    n, l = state.n, state.l
    report = ReductionReport(
        n=n, l=l, strategy=strategy, epsilon=epsilon,
        max_iters_per_stage=max_iters_per_stage,
        support_threshold=support_threshold,
        support_before=support_count(state, support_threshold),
        bound=term_bound(n, l),
    )
    original_norm = state.norm
    rotations: list[LocalRotation] = []
    current = state
    earlier_flats: list[int] = []

    for k in range(n - 1):
        try:
            current, stage_rots, stage_report = eliminate_stage(
                current, k, strategy, epsilon, max_iters_per_stage)
        except NonConvergenceError as exc:
            # Fold the failed stage's partial work into a run-level
            # trace/report before re-raising.
            if exc.report is not None:
                report.stages.append(exc.report)
            partial = current
            if exc.trace is not None:
                rotations.extend(exc.trace.rotations)
                partial = exc.trace.final_state
            report.converged = False
            report.support_after = support_count(partial, support_threshold)
            report.norm_drift = float(abs(partial.norm - 1.0))
            exc.report = report
            exc.trace = DecompositionTrace(original_norm, rotations, partial)
            raise
        rotations.extend(stage_rots)
        report.stages.append(stage_report)

        if earlier_flats:
            drift = float(np.max(np.abs(current.amplitudes[earlier_flats])))
        else:
            drift = 0.0
        report.stage_preservation.append(drift)
        if drift > PRESERVATION_FACTOR * epsilon:
            raise InternalConsistencyError(
                f"stage {k} left an earlier-stage target at magnitude "
                f"{drift:.3e} > {PRESERVATION_FACTOR * epsilon:.1e}"
            )
        earlier_flats.extend(index_encode(t.index, n)
                             for t in stage_targets(n, l, k))

    report.converged = all(s.converged for s in report.stages)
    report.support_after = support_count(current, support_threshold)
    report.norm_drift = float(abs(current.norm - 1.0))
    trace = DecompositionTrace(original_norm, rotations, current)
    return trace, report


def invert_rotations(amplitudes: np.ndarray, n: int, l: int,
                     rotations) -> np.ndarray:
    """Apply the conjugate-transpose rotations in reverse order to a raw
    amplitude vector; returns a new vector."""
    work = np.array(amplitudes, dtype=np.complex128)
    for rot in reversed(list(rotations)):
        rotate_pair_inplace(work, n, l, rot.site, rot.level_a, rot.level_b,
                            rot.inverse_entries())
    return work


def invert_trace(trace: DecompositionTrace) -> PureState:
    """Undo a recorded reduction, reproducing its original input state."""
    final = trace.final_state
    work = invert_rotations(final.amplitudes, final.n, final.l,
                            trace.rotations)
    return PureState(final.n, final.l, work)

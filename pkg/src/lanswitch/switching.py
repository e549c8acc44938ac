"""Switching framework: run one Lanczos-type solver, hand its iterate to another.

Strategies: ST1 switches only after a breakdown, ST2 pre-emptively at fixed
cycle boundaries, ST3 when a monitored denominator drops below a threshold.
The incoming algorithm is re-initialized at the outgoing iterate with a
freshly recomputed residual, so every cycle starts with an exact residual
identity; by default the shadow vector is re-seeded with that residual (see
SwitchPlan.shadow_restart). A run only terminates Converged once the
recomputed residual, not just the recurrence one, meets the tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Set, Tuple, Union

import numpy as np

from .linalg import SparseMatrix, norm2
from .solvers import (
    AlgoId,
    OutcomeKind,
    SolverConfig,
    SolverState,
    denominator_report,
    init,
    run,
)

__all__ = [
    "ST1",
    "ST2",
    "ST3",
    "Strategy",
    "CoinToss",
    "RoundRobin",
    "Fixed",
    "SelectionPolicy",
    "SwitchPlan",
    "EventKind",
    "SwitchEvent",
    "SwitchTrace",
    "RunRecord",
    "select_next",
    "handoff",
    "make_rng",
    "run_switching",
]


@dataclass(frozen=True)
class ST1:
    """Switch only when the running algorithm breaks down."""


@dataclass(frozen=True)
class ST2:
    """Pre-emptive switching after every ``cycle_len`` iterations."""

    cycle_len: int = 20

    def __post_init__(self):
        if self.cycle_len < 1:
            raise ValueError("cycle_len must be at least 1")


@dataclass(frozen=True)
class ST3:
    """Switch when any upcoming denominator magnitude drops below the threshold."""

    monitor_threshold: float = 1e-8
    check_every: int = 1

    def __post_init__(self):
        if not (self.monitor_threshold > 0):
            raise ValueError("monitor_threshold must be positive")
        if self.check_every < 1:
            raise ValueError("check_every must be at least 1")


Strategy = Union[ST1, ST2, ST3]


@dataclass(frozen=True)
class CoinToss:
    """Uniform random choice from the pool on a seeded PCG64 stream."""

    seed: int


@dataclass(frozen=True)
class RoundRobin:
    """Next pool member in order, wrapping."""


@dataclass(frozen=True)
class Fixed:
    """Always the same algorithm (pure restarting)."""

    algo: AlgoId


@dataclass(frozen=True)
class SelectionPolicy:
    pool: Tuple[AlgoId, ...]
    mode: Union[CoinToss, RoundRobin, Fixed]

    def __post_init__(self):
        pool = tuple(self.pool)
        object.__setattr__(self, "pool", pool)
        if not pool:
            raise ValueError("pool must be non-empty")
        if len(set(pool)) != len(pool):
            raise ValueError("pool entries must be distinct")
        if isinstance(self.mode, Fixed) and self.mode.algo not in pool:
            raise ValueError("Fixed algorithm must be a pool member")


@dataclass(frozen=True)
class SwitchPlan:
    """A full switching run description.

    ``shadow_restart`` decides the shadow vector of each handoff: "residual"
    re-seeds it with the freshly recomputed residual (each cycle is a fresh
    invocation with the standard y = r0 choice), "initial" reuses the y the
    run started with. The residual policy is the default because a finished
    cycle leaves its residual orthogonal to the old shadow Krylov space, so
    reusing y hands the incoming algorithm a numerically degenerate moment
    sequence.
    """

    strategy: Strategy
    policy: SelectionPolicy
    start: AlgoId
    cfg: SolverConfig
    global_budget: int
    shadow_restart: str = "residual"

    def __post_init__(self):
        if self.start not in self.policy.pool:
            raise ValueError("start algorithm must be a pool member")
        if self.global_budget < 1:
            raise ValueError("global_budget must be at least 1")
        if self.shadow_restart not in ("residual", "initial"):
            raise ValueError("shadow_restart must be 'residual' or 'initial'")


class EventKind(enum.Enum):
    CYCLE_END = "CycleEnd"
    BREAKDOWN_SWITCH = "BreakdownSwitch"
    MONITOR_SWITCH = "MonitorSwitch"
    RESTART = "Restart"
    PROPER_SWITCH = "ProperSwitch"
    CONVERGED = "Converged"
    EXHAUSTED = "Exhausted"


@dataclass(frozen=True)
class SwitchEvent:
    kind: EventKind
    at_iteration: int
    from_algo: AlgoId
    to_algo: AlgoId
    residual_norm: float


@dataclass
class SwitchTrace:
    """Ordered transition/termination events of one switching run."""

    events: List[SwitchEvent] = field(default_factory=list)

    def append(self, event: SwitchEvent) -> None:
        if self.events and event.at_iteration <= self.events[-1].at_iteration:
            raise ValueError("event iterations must strictly increase")
        self.events.append(event)

    @property
    def final(self) -> Optional[SwitchEvent]:
        return self.events[-1] if self.events else None


@dataclass
class RunRecord:
    """One experiment row; ``x`` is kept for verification, not for reports."""

    n: int
    delta: float
    combo: str
    outcome: str
    residual: float
    iterations: int
    switches: int
    restarts: int
    seconds: float
    x: Optional[np.ndarray] = None


def select_next(policy: SelectionPolicy, current: AlgoId,
                rng: Optional[np.random.Generator]) -> Tuple[AlgoId, EventKind]:
    """Pick the algorithm for the next cycle.

    Returns the chosen algorithm and its classification: Restart when it
    equals the current one, ProperSwitch otherwise. CoinToss draws uniformly
    from the pool and advances ``rng``; the other modes are rng-free.
    """
    if current not in policy.pool:
        raise ValueError(f"current algorithm {current} not in pool")
    mode = policy.mode
    if isinstance(mode, Fixed):
        chosen = mode.algo
    elif isinstance(mode, RoundRobin):
        idx = policy.pool.index(current)
        chosen = policy.pool[(idx + 1) % len(policy.pool)]
    elif isinstance(mode, CoinToss):
        if rng is None:
            raise ValueError("CoinToss selection needs an rng")
        chosen = policy.pool[int(rng.integers(0, len(policy.pool)))]
    else:
        raise ValueError(f"unknown selection mode {mode!r}")
    kind = EventKind.RESTART if chosen == current else EventKind.PROPER_SWITCH
    return chosen, kind


def handoff(A: SparseMatrix, b: np.ndarray, prev_x: np.ndarray, y: np.ndarray,
            next_algo: AlgoId, cfg: SolverConfig) -> SolverState:
    """Initialize ``next_algo`` at the outgoing iterate.

    The residual is recomputed as b - A @ prev_x and the shadow sequence
    restarts from the original y. A prologue breakdown is carried on the
    returned state's outcome, never raised.
    """
    return init(next_algo, A, b, prev_x, y, cfg)


def make_rng(seed: int) -> np.random.Generator:
    """The plan-level generator: PCG64 over a SeedSequence of the given seed."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


_PROLOGUE_CHARGE = {AlgoId.A4: 0, AlgoId.A12: 3, AlgoId.A5B10: 1, AlgoId.A8B10: 0}

_RETRY = object()
_CLAIMED = object()


class _Driver:
    """Mutable loop state of one switching run."""

    def __init__(self, A, b, x0, y, plan: SwitchPlan):
        self.A, self.b, self.y = A, b, y
        self.plan = plan
        self.trace = SwitchTrace()
        self.iters = 0
        self.switches = 0
        self.restarts = 0
        self.rng = (make_rng(plan.policy.mode.seed)
                    if isinstance(plan.policy.mode, CoinToss) else None)
        self.current = plan.start
        self.x_last = np.array(x0, dtype=np.float64, copy=True)
        # Pool members that broke down at the current iterate; once every
        # member is in here no further handoff can make progress.
        self.barren: Set[AlgoId] = set()
        self.state: Optional[SolverState] = None

    def residual_here(self) -> float:
        if self.state is not None:
            return self.state.residual_norm()
        return norm2(self.b - self.A.matvec(self.x_last))

    def finish(self, kind: EventKind, residual: float) -> str:
        self.trace.append(SwitchEvent(kind, self.iters, self.current,
                                      self.current, residual))
        return kind.value

    # -- transitions -----------------------------------------------------

    def _start_once(self, first_choice: AlgoId, cause: EventKind, emit_event: bool):
        """One handoff attempt round over the pool.

        Returns None when a live cycle is up, a terminal outcome name, or the
        _RETRY sentinel when the accepted candidate's prologue broke down
        after moving the iterate.
        """
        at = self.iters
        previous = self.current
        r_fresh = self.b - self.A.matvec(self.x_last)
        if norm2(r_fresh) <= self.plan.cfg.tol:
            # The iterate already solves the system; no cycle needed.
            return self.finish(EventKind.CONVERGED, norm2(r_fresh))
        if self.plan.shadow_restart == "residual" and at > 0:
            y_cycle = r_fresh
        else:
            y_cycle = self.y
        candidates = [first_choice] + [a for a in self.plan.policy.pool
                                       if a != first_choice]
        for algo in candidates:
            if algo in self.barren:
                continue
            if at + _PROLOGUE_CHARGE[algo] > self.plan.global_budget:
                continue
            state = handoff(self.A, self.b, self.x_last, y_cycle, algo, self.plan.cfg)
            if state.outcome.kind is OutcomeKind.BREAKDOWN and state.k == 0:
                # Prologue failed without producing an iterate: same point,
                # next pool member.
                self.barren.add(algo)
                continue
            kind = cause
            if cause in (EventKind.RESTART, EventKind.PROPER_SWITCH):
                kind = (EventKind.RESTART if algo == previous
                        else EventKind.PROPER_SWITCH)
            if emit_event:
                # The transition is stamped at the handoff iteration, before
                # the incoming prologue consumes its charge.
                self.trace.append(SwitchEvent(kind, at, previous, algo,
                                              state.residual_norm()))
                if algo == previous:
                    self.restarts += 1
                else:
                    self.switches += 1
            self.state = state
            self.current = algo
            self.iters += state.iters_used
            self.x_last = state.x
            if state.outcome.kind is OutcomeKind.CONVERGED:
                return _CLAIMED
            if state.outcome.kind is OutcomeKind.BREAKDOWN:
                return _RETRY
            return None
        self.current = previous
        return self.finish(EventKind.EXHAUSTED, self.residual_here())

    def _note_breakdown(self) -> Optional[str]:
        """Barren bookkeeping after the running state broke down."""
        if self.state.k > 0:
            # The iterate moved this cycle, so earlier failures are stale.
            self.barren.clear()
        self.barren.add(self.current)
        self.x_last = self.state.x
        if self.barren.issuperset(self.plan.policy.pool):
            return self.finish(EventKind.EXHAUSTED, self.residual_here())
        if self.iters >= self.plan.global_budget:
            return self.finish(EventKind.EXHAUSTED, self.residual_here())
        return None

    def _verify_convergence(self) -> Optional[str]:
        """Accept the solver's convergence claim only if b - A x agrees.

        Recurrence residuals drift from the true residual; a claim whose
        recomputed residual still exceeds the tolerance sends the run into
        another cycle from the current iterate instead of terminating.
        """
        if self.state.true_residual_norm() <= self.plan.cfg.tol:
            return self.finish(EventKind.CONVERGED, self.state.residual_norm())
        self.barren.clear()
        if self.iters >= self.plan.global_budget:
            return self.finish(EventKind.EXHAUSTED, self.state.residual_norm())
        return None

    def transition(self, first_choice: AlgoId, cause: EventKind,
                   emit_event: bool) -> Optional[str]:
        """Hand off until a cycle is live or the run terminates."""
        choice, cause_now, emit = first_choice, cause, emit_event
        while True:
            res = self._start_once(choice, cause_now, emit)
            if res is _RETRY:
                terminal = self._note_breakdown()
                if terminal is not None:
                    return terminal
                choice, _ = select_next(self.plan.policy, self.current, self.rng)
                cause_now, emit = EventKind.BREAKDOWN_SWITCH, True
                continue
            if res is _CLAIMED:
                terminal = self._verify_convergence()
                if terminal is not None:
                    return terminal
                choice, _ = select_next(self.plan.policy, self.current, self.rng)
                cause_now, emit = EventKind.CYCLE_END, True
                continue
            return res

    def after_breakdown(self) -> Optional[str]:
        terminal = self._note_breakdown()
        if terminal is not None:
            return terminal
        chosen, _ = select_next(self.plan.policy, self.current, self.rng)
        return self.transition(chosen, EventKind.BREAKDOWN_SWITCH, emit_event=True)

    def after_converged_claim(self) -> Optional[str]:
        """Terminal path for a solver-reported convergence, verified."""
        terminal = self._verify_convergence()
        if terminal is not None:
            return terminal
        chosen, _ = select_next(self.plan.policy, self.current, self.rng)
        return self.transition(chosen, EventKind.CYCLE_END, emit_event=True)

    def after_run(self, used: int) -> None:
        self.iters += used
        if self.state.k > 0:
            self.barren.clear()
        self.x_last = self.state.x


def run_switching(A: SparseMatrix, b: np.ndarray, x0: np.ndarray, y: np.ndarray,
                  plan: SwitchPlan, combo: Optional[str] = None
                  ) -> Tuple[RunRecord, SwitchTrace]:
    """Drive solver cycles under the plan until convergence or exhaustion.

    Every handoff re-initializes the incoming algorithm at the last iterate
    of the outgoing one. The returned record carries the recurrence residual
    norm at termination and the final iterate; delta and seconds are filled
    in by the harness.
    """
    if norm2(y) == 0.0:
        raise ValueError("shadow vector y must be nonzero")
    if combo is None:
        pool = "+".join(a.value for a in plan.policy.pool)
        combo = f"{pool}/{type(plan.strategy).__name__}"

    drv = _Driver(A, b, x0, y, plan)
    outcome_name = _drive(drv)
    final_x = drv.state.x if drv.state is not None else drv.x_last
    record = RunRecord(
        n=A.nrows,
        delta=math.nan,
        combo=combo,
        outcome=outcome_name,
        residual=drv.residual_here(),
        iterations=drv.iters,
        switches=drv.switches,
        restarts=drv.restarts,
        seconds=math.nan,
        x=np.array(final_x, copy=True),
    )
    return record, drv.trace


def _drive(drv: _Driver) -> str:
    plan = drv.plan
    strategy = plan.strategy

    terminal = drv.transition(plan.start, EventKind.BREAKDOWN_SWITCH, emit_event=False)
    if terminal is not None:
        return terminal

    while True:
        remaining = plan.global_budget - drv.iters
        if remaining <= 0:
            return drv.finish(EventKind.EXHAUSTED, drv.state.residual_norm())

        if isinstance(strategy, ST2):
            cycle_left = max(0, strategy.cycle_len - drv.state.iters_used)
            budget = min(cycle_left, remaining)
            if budget > 0:
                outcome, used = run(drv.state, budget)
                drv.after_run(used)
            else:
                outcome = drv.state.outcome
            if outcome.kind is OutcomeKind.CONVERGED:
                terminal = drv.after_converged_claim()
            elif outcome.kind is OutcomeKind.BREAKDOWN:
                terminal = drv.after_breakdown()
            elif outcome.kind is OutcomeKind.ITER_LIMIT:
                return drv.finish(EventKind.EXHAUSTED, drv.state.residual_norm())
            elif drv.state.iters_used < strategy.cycle_len:
                # Global budget ran out mid-cycle.
                return drv.finish(EventKind.EXHAUSTED, drv.state.residual_norm())
            elif drv.iters >= plan.global_budget:
                return drv.finish(EventKind.EXHAUSTED, drv.state.residual_norm())
            else:
                chosen, kind = select_next(plan.policy, drv.current, drv.rng)
                terminal = drv.transition(chosen, kind, emit_event=True)
            if terminal is not None:
                return terminal

        elif isinstance(strategy, ST1):
            outcome, used = run(drv.state, remaining)
            drv.after_run(used)
            if outcome.kind is OutcomeKind.CONVERGED:
                terminal = drv.after_converged_claim()
                if terminal is not None:
                    return terminal
            elif outcome.kind is OutcomeKind.BREAKDOWN:
                terminal = drv.after_breakdown()
                if terminal is not None:
                    return terminal
            else:
                return drv.finish(EventKind.EXHAUSTED, drv.state.residual_norm())

        elif isinstance(strategy, ST3):
            budget = min(strategy.check_every, remaining)
            outcome, used = run(drv.state, budget)
            drv.after_run(used)
            if outcome.kind is OutcomeKind.CONVERGED:
                terminal = drv.after_converged_claim()
                if terminal is not None:
                    return terminal
            elif outcome.kind is OutcomeKind.BREAKDOWN:
                terminal = drv.after_breakdown()
                if terminal is not None:
                    return terminal
            elif outcome.kind is OutcomeKind.ITER_LIMIT:
                return drv.finish(EventKind.EXHAUSTED, drv.state.residual_norm())
            else:
                report = denominator_report(drv.state)
                if any(abs(v) < strategy.monitor_threshold for _, v in report):
                    if drv.iters >= plan.global_budget:
                        return drv.finish(EventKind.EXHAUSTED,
                                          drv.state.residual_norm())
                    chosen, _ = select_next(plan.policy, drv.current, drv.rng)
                    terminal = drv.transition(chosen, EventKind.MONITOR_SWITCH,
                                              emit_event=True)
                    if terminal is not None:
                        return terminal
        else:
            raise ValueError(f"unknown strategy {strategy!r}")

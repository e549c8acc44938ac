"""Experiment harness: configure runs, time them, and emit table reports.

A cell is one (problem, combo) pair. Solo cells run a single algorithm with
an iteration budget; switching cells run a plan. Coin-toss seeds are derived
per cell from the experiment seed through numpy's SeedSequence spawn keys,
so batches are reproducible and cells are independent.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .problems import BaheuxSpec, ProblemInstance, gen_baheux, read_matrix_market
from .solvers import AlgoId, SolverConfig, init, run
from .switching import (
    ST1,
    ST2,
    ST3,
    CoinToss,
    RunRecord,
    SelectionPolicy,
    Strategy,
    SwitchPlan,
    run_switching,
)

__all__ = [
    "DEFAULT_SEED",
    "DEFAULT_TOL",
    "PAPER_COMBOS",
    "SwitchTemplate",
    "ExperimentConfig",
    "run_experiment",
    "run_cell",
    "emit_table",
    "derive_seed",
    "combo_label",
]

DEFAULT_SEED = 42
DEFAULT_TOL = 1e-13

# The published pairings: combination number -> pool, all ST2 with cycle 20.
PAPER_COMBOS = {
    6: (AlgoId.A4, AlgoId.A12),
    7: (AlgoId.A4, AlgoId.A5B10),
    8: (AlgoId.A4, AlgoId.A8B10),
    9: (AlgoId.A5B10, AlgoId.A8B10),
}


@dataclass(frozen=True)
class SwitchTemplate:
    """A switching combo before seeding: strategy, pool, optional start."""

    strategy: Strategy
    pool: Tuple[AlgoId, ...]
    start: Optional[AlgoId] = None

    def resolve_start(self) -> AlgoId:
        if self.start is not None:
            return self.start
        if isinstance(self.strategy, ST1) and AlgoId.A8B10 in self.pool:
            # Treated as the most stable default for breakdown-driven runs.
            return AlgoId.A8B10
        return self.pool[0]


Combo = Union[AlgoId, SwitchTemplate, SwitchPlan]


@dataclass(frozen=True)
class ExperimentConfig:
    problem: Union[BaheuxSpec, str]
    algorithms: Tuple[Combo, ...]
    tol: float = DEFAULT_TOL
    breakdown_eps: float = 1e-12
    seed: int = DEFAULT_SEED
    budget: Optional[int] = None
    repeats: int = 1

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if not (self.tol > 0):
            raise ValueError("tol must be positive")
        if not self.algorithms:
            raise ValueError("at least one algorithm or plan is required")


def derive_seed(seed: int, cell_index: int) -> int:
    """Per-cell child seed from the experiment seed (splittable stream)."""
    ss = np.random.SeedSequence(seed, spawn_key=(cell_index,))
    return int(ss.generate_state(1, np.uint64)[0])


def combo_label(combo: Combo) -> str:
    if isinstance(combo, AlgoId):
        return f"{combo.value}/solo"
    if isinstance(combo, SwitchTemplate):
        pool = "+".join(a.value for a in combo.pool)
        return f"{pool}/{_strategy_name(combo.strategy)}"
    pool = "+".join(a.value for a in combo.policy.pool)
    return f"{pool}/{_strategy_name(combo.strategy)}"


def _strategy_name(strategy: Strategy) -> str:
    return {ST1: "ST1", ST2: "ST2", ST3: "ST3"}[type(strategy)]


def load_problem(problem: Union[BaheuxSpec, str],
                 rhs_path: Optional[str] = None) -> ProblemInstance:
    if isinstance(problem, BaheuxSpec):
        return gen_baheux(problem)
    return read_matrix_market(problem, rhs_path=rhs_path)


def _solo_record(inst: ProblemInstance, algo: AlgoId, cfg: SolverConfig,
                 budget: int) -> RunRecord:
    state = init(algo, inst.A, inst.b, np.zeros(inst.A.nrows), inst.b, cfg)
    iters = state.iters_used
    outcome = state.outcome
    if not outcome.is_terminal:
        outcome, used = run(state, max(1, budget - iters))
        iters += used
    return RunRecord(
        n=inst.A.nrows,
        delta=math.nan,
        combo=f"{algo.value}/solo",
        outcome=outcome.kind.value,
        residual=state.residual_norm(),
        iterations=iters,
        switches=0,
        restarts=0,
        seconds=math.nan,
        x=np.array(state.x, copy=True),
    )


def run_cell(inst: ProblemInstance, combo: Combo, cfg: ExperimentConfig,
             cell_index: int) -> Tuple[RunRecord, float]:
    """Run one cell once; returns the record and the wall seconds of the solve."""
    n = inst.A.nrows
    solver_budget = cfg.budget
    if isinstance(combo, AlgoId):
        budget = solver_budget if solver_budget is not None else 5 * n
        solver_cfg = SolverConfig(tol=cfg.tol, breakdown_eps=cfg.breakdown_eps,
                                  max_iters=budget)
        t0 = time.perf_counter()
        record = _solo_record(inst, combo, solver_cfg, budget)
        seconds = time.perf_counter() - t0
        return record, seconds

    if isinstance(combo, SwitchTemplate):
        budget = solver_budget if solver_budget is not None else 100 * n
        solver_cfg = SolverConfig(tol=cfg.tol, breakdown_eps=cfg.breakdown_eps,
                                  max_iters=budget)
        policy = SelectionPolicy(pool=combo.pool,
                                 mode=CoinToss(seed=derive_seed(cfg.seed, cell_index)))
        plan = SwitchPlan(strategy=combo.strategy, policy=policy,
                          start=combo.resolve_start(), cfg=solver_cfg,
                          global_budget=budget)
    else:
        plan = combo

    x0 = np.zeros(n)
    t0 = time.perf_counter()
    record, _ = run_switching(inst.A, inst.b, x0, inst.b, plan,
                              combo=combo_label(combo))
    seconds = time.perf_counter() - t0
    return record, seconds


def run_experiment(cfg: ExperimentConfig) -> List[RunRecord]:
    """One record per combo; timing is the median over ``repeats`` solves.

    Problem generation is excluded from timing. Failures of individual runs
    end up in their record's outcome; they never abort the batch.
    """
    inst = load_problem(cfg.problem)
    delta = cfg.problem.delta if isinstance(cfg.problem, BaheuxSpec) else math.nan
    records: List[RunRecord] = []
    for cell_index, combo in enumerate(cfg.algorithms):
        timings = []
        record: Optional[RunRecord] = None
        for _ in range(cfg.repeats):
            record, seconds = run_cell(inst, combo, cfg, cell_index)
            timings.append(seconds)
        assert record is not None
        records.append(replace(record, delta=delta,
                               seconds=statistics.median(timings)))
    return records


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

CSV_COLUMNS = ("n", "delta", "combo", "outcome", "residual",
               "iterations", "switches", "restarts", "seconds")


def _sci(value: float) -> str:
    return f"{value:.4e}"


def emit_table(records: Sequence[RunRecord], format: str = "csv") -> str:
    """Render records as CSV (one row per record) or a paper-shaped markdown table."""
    if not records:
        raise ValueError("no records to emit")
    if format == "csv":
        lines = [",".join(CSV_COLUMNS)]
        for r in records:
            lines.append(",".join([
                str(r.n), _sci(r.delta), r.combo, r.outcome, _sci(r.residual),
                str(r.iterations), str(r.switches), str(r.restarts), _sci(r.seconds),
            ]))
        return "\n".join(lines) + "\n"
    if format == "md":
        return _emit_markdown(records)
    raise ValueError(f"unknown format {format!r} (expected csv or md)")


def _emit_markdown(records: Sequence[RunRecord]) -> str:
    out = []
    deltas = []
    for r in records:
        if r.delta not in deltas:
            deltas.append(r.delta)
    for delta in deltas:
        subset = [r for r in records if r.delta == delta or
                  (math.isnan(delta) and math.isnan(r.delta))]
        combos = []
        for r in subset:
            if r.combo not in combos:
                combos.append(r.combo)
        dims = []
        for r in subset:
            if r.n not in dims:
                dims.append(r.n)
        cell = {(r.n, r.combo): r for r in subset}
        out.append(f"### delta = {delta:g}" if not math.isnan(delta)
                   else "### external problem")
        header = ["n"]
        for combo in combos:
            header += [f"{combo} residual", f"{combo} T(s)"]
        out.append("| " + " | ".join(header) + " |")
        out.append("|" + "---|" * len(header))
        for n in dims:
            row = [str(n)]
            for combo in combos:
                r = cell.get((n, combo))
                if r is None:
                    row += ["-", "-"]
                else:
                    row += [_sci(r.residual), _sci(r.seconds)]
            out.append("| " + " | ".join(row) + " |")
        out.append("")
    return "\n".join(out)

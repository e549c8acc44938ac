"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.
"""

import numpy as np
import pytest

from lanswitch.harness import (
    DEFAULT_SEED,
    PAPER_COMBOS,
    ExperimentConfig,
    SwitchTemplate,
    run_experiment,
)
from lanswitch.linalg import SparseMatrix, matvec, norm2
from lanswitch.problems import BaheuxSpec, direct_solve_oracle, gen_baheux
from lanswitch.solvers import AlgoId, OutcomeKind, SolverConfig, init, run, step
from lanswitch.switching import ST2, CoinToss, SelectionPolicy, SwitchPlan, run_switching

DELTAS = (0.0, 0.2, 5.0, 8.0)
DIMS = (20, 40, 60, 80, 100, 200, 400, 600, 800, 1000)
TOL = 1e-13


def _report(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" — {detail}" if detail else ""
    print(f"[ACCEPTANCE] {name}: {status}{suffix}")


@pytest.fixture(scope="module")
def grid_records():
    """All 160 switching cells: 4 deltas x 10 dims x 4 paper pairings."""
    templates = tuple(SwitchTemplate(ST2(20), PAPER_COMBOS[k])
                      for k in sorted(PAPER_COMBOS))
    out = {}
    for delta in DELTAS:
        for n in DIMS:
            cfg = ExperimentConfig(problem=BaheuxSpec(n=n, delta=delta),
                                   algorithms=templates, tol=TOL,
                                   seed=DEFAULT_SEED)
            for number, rec in zip(sorted(PAPER_COMBOS), run_experiment(cfg)):
                out[(delta, n, number)] = rec
    return out


@pytest.fixture(scope="module")
def problems_cache():
    cache = {}

    def get(n, delta):
        key = (n, delta)
        if key not in cache:
            cache[key] = gen_baheux(BaheuxSpec(n=n, delta=delta))
        return cache[key]

    return get


def test_criterion_1_switching_convergence(grid_records, problems_cache):
    """Every pairing converges on the full grid with true residual <= 1e-12."""
    violations = []
    for (delta, n, number), rec in grid_records.items():
        inst = problems_cache(n, delta)
        true_res = norm2(inst.b - matvec(inst.A, rec.x))
        if rec.outcome != "Converged" or rec.residual > TOL or true_res > 1e-12:
            violations.append((delta, n, number, rec.outcome, true_res))
    _report("criterion 1 (switching convergence)", not violations,
            f"{len(grid_records) - len(violations)}/{len(grid_records)} cells converged "
            f"with recomputed residual <= 1e-12")
    assert not violations, violations[:10]


def test_criterion_2_solo_fragility(problems_cache):
    """Each solo algorithm fails somewhere on the grid at n >= 60, budget 5n."""
    failures = {}
    for algo in AlgoId:
        for delta in DELTAS:
            for n in [d for d in DIMS if d >= 60]:
                inst = problems_cache(n, delta)
                cfg = SolverConfig(tol=TOL, max_iters=5 * n)
                st = init(algo, inst.A, inst.b, np.zeros(n), inst.b, cfg)
                outcome = st.outcome
                if not outcome.is_terminal:
                    outcome, _ = run(st, 5 * n)
                if outcome.kind in (OutcomeKind.BREAKDOWN, OutcomeKind.ITER_LIMIT):
                    failures[algo] = (n, delta, outcome.kind.value)
                    break
            if algo in failures:
                break
    ok = set(failures) == set(AlgoId)
    _report("criterion 2 (solo fragility)", ok,
            "; ".join(f"{a.value} fails at n={v[0]}, delta={v[1]} ({v[2]})"
                      for a, v in sorted(failures.items(), key=lambda t: t[0].value)))
    assert ok, f"missing solo failures for {set(AlgoId) - set(failures)}"


def test_criterion_3_oracle_equivalence(grid_records, problems_cache):
    """Converged runs with n <= 400 match the dense oracle and the ones vector."""
    oracles = {}
    checked = 0
    violations = []
    for (delta, n, number), rec in grid_records.items():
        if n > 400 or rec.outcome != "Converged":
            continue
        key = (n, delta)
        if key not in oracles:
            inst = problems_cache(n, delta)
            oracles[key] = direct_solve_oracle(inst.A, inst.b)
        x_oracle = oracles[key]
        rel = (np.max(np.abs(rec.x - x_oracle))
               / np.max(np.abs(x_oracle)))
        ones_err = np.max(np.abs(rec.x - 1.0))
        checked += 1
        if rel > 1e-8 or ones_err > 1e-8:
            violations.append((delta, n, number, rel, ones_err))
    # Solo runs that converge (small n) are held to the same bound.
    for algo in AlgoId:
        for delta in DELTAS:
            for n in (10, 20, 30, 40):
                inst = problems_cache(n, delta)
                cfg = SolverConfig(tol=TOL, max_iters=5 * n)
                st = init(algo, inst.A, inst.b, np.zeros(n), inst.b, cfg)
                if not st.outcome.is_terminal:
                    run(st, 5 * n)
                if st.outcome.kind is OutcomeKind.CONVERGED:
                    key = (n, delta)
                    if key not in oracles:
                        oracles[key] = direct_solve_oracle(inst.A, inst.b)
                    rel = (np.max(np.abs(st.x - oracles[key]))
                           / np.max(np.abs(oracles[key])))
                    checked += 1
                    if rel > 1e-8 or np.max(np.abs(st.x - 1.0)) > 1e-8:
                        violations.append((delta, n, algo.value, rel))
    _report("criterion 3 (oracle equivalence)", not violations,
            f"{checked} converged runs within 1e-8 of the dense solve and of ones")
    assert not violations, violations[:10]


def _diag_dominant(rng, n, spread=3.0):
    dense = rng.standard_normal((n, n))
    dense += np.diag(np.sign(np.diag(dense)) * (np.abs(dense).sum(axis=1) + spread))
    return SparseMatrix.from_dense(dense)


def test_criterion_4_residual_identity_and_7_normalization():
    """Identity at every step of a 200+-step seeded suite, handoffs included;
    A4's normalization stays at 1 to 1e-14 throughout."""
    algos = list(AlgoId)
    checked = 0
    identity_violations = []
    normalization_violations = []

    def check(state, where):
        nonlocal checked
        gap = norm2(state.r - (state.b - matvec(state.A, state.x)))
        bound = 1e-10 * (norm2(state.b) + state.A.norm_inf() * norm2(state.x))
        checked += 1
        if gap > bound:
            identity_violations.append((where, gap, bound))
        if state.algo is AlgoId.A4 and abs(state.last_normalization - 1.0) > 1e-14:
            normalization_violations.append((where, state.last_normalization))

    for algo_i, algo in enumerate(algos):
        rng = np.random.default_rng(17 + algo_i)
        next_algo = algos[(algo_i + 1) % len(algos)]
        for trial in range(13):
            n = int(rng.choice([10, 20, 30]))
            A = _diag_dominant(rng, n)
            b = rng.standard_normal(n)
            x0 = rng.standard_normal(n)
            y = (b - A.matvec(x0)).copy()
            st = init(algo, A, b, x0, y, SolverConfig(tol=TOL, max_iters=100))
            for _ in range(12):
                if st.outcome.is_terminal:
                    break
                out = step(st)
                if out.kind in (OutcomeKind.CONTINUE, OutcomeKind.CONVERGED):
                    check(st, (algo.value, trial, st.k))
            r_fresh = b - A.matvec(st.x)
            if norm2(r_fresh) <= TOL:
                continue
            st2 = init(next_algo, A, b, st.x, r_fresh, SolverConfig(max_iters=100))
            for _ in range(3):
                if st2.outcome.is_terminal:
                    break
                out = step(st2)
                if out.kind in (OutcomeKind.CONTINUE, OutcomeKind.CONVERGED):
                    check(st2, (next_algo.value, trial, "post-handoff", st2.k))

    _report("criterion 4 (residual identity)", not identity_violations and checked >= 200,
            f"{checked} steps checked, including post-handoff steps")
    _report("criterion 7 (A4 normalization)", not normalization_violations,
            "|A(B+E) - 1| <= 1e-14 at every A4 step")
    assert checked >= 200
    assert not identity_violations, identity_violations[:5]
    assert not normalization_violations, normalization_violations[:5]


def test_criterion_5_breakdown_honesty():
    """Orthogonal and near-degenerate shadow vectors always end in a labeled
    breakdown and never put a non-finite value into x or r."""
    rng = np.random.default_rng(29)
    runs = 0
    bad = []
    for algo in AlgoId:
        for trial in range(8):
            n = int(rng.choice([10, 20, 30]))
            A = _diag_dominant(rng, n)
            b = rng.standard_normal(n)
            r0 = b.copy()
            y = rng.standard_normal(n)
            y -= (np.dot(y, r0) / np.dot(r0, r0)) * r0
            y -= (np.dot(y, r0) / np.dot(r0, r0)) * r0
            if trial % 2:
                # near-degenerate instead of exactly orthogonal
                y += 1e-15 * norm2(y) * r0 / norm2(r0)
            st = init(algo, A, b, np.zeros(n), y,
                      SolverConfig(tol=TOL, max_iters=200))
            outcome = st.outcome
            while not outcome.is_terminal:
                outcome = step(st)
                if not (np.all(np.isfinite(st.x)) and np.all(np.isfinite(st.r))):
                    bad.append((algo.value, trial, "non-finite state"))
                    break
            runs += 1
            if outcome.kind is not OutcomeKind.BREAKDOWN or not outcome.label:
                bad.append((algo.value, trial, outcome.kind.value))
    _report("criterion 5 (breakdown honesty)", not bad,
            f"{runs} degenerate-shadow runs all ended in labeled Breakdown, "
            f"no NaN/Inf in x or r")
    assert not bad, bad[:10]


def test_criterion_6_determinism(problems_cache):
    """Identical config and seed give bitwise-identical traces and iterates."""
    mismatches = []
    for number, pool in sorted(PAPER_COMBOS.items()):
        inst = problems_cache(100, 5.0)
        plan = SwitchPlan(
            strategy=ST2(20),
            policy=SelectionPolicy(pool, CoinToss(DEFAULT_SEED + number)),
            start=pool[0],
            cfg=SolverConfig(tol=TOL, max_iters=10000),
            global_budget=10000,
        )
        rec1, trace1 = run_switching(inst.A, inst.b, np.zeros(100), inst.b, plan)
        rec2, trace2 = run_switching(inst.A, inst.b, np.zeros(100), inst.b, plan)
        if trace1.events != trace2.events:
            mismatches.append((number, "trace"))
        if not np.array_equal(rec1.x, rec2.x):
            mismatches.append((number, "x"))
        if (rec1.outcome, rec1.residual, rec1.iterations) != \
           (rec2.outcome, rec2.residual, rec2.iterations):
            mismatches.append((number, "record"))
    _report("criterion 6 (determinism)", not mismatches,
            "bitwise-identical traces and final iterates across reruns")
    assert not mismatches, mismatches

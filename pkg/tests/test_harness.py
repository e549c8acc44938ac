import csv
import io
import math

import numpy as np
import pytest

from lanswitch.cli import cli_main
from lanswitch.harness import (
    ExperimentConfig,
    PAPER_COMBOS,
    SwitchTemplate,
    combo_label,
    derive_seed,
    emit_table,
    run_experiment,
)
from lanswitch.problems import BaheuxSpec, gen_baheux, write_matrix_market
from lanswitch.solvers import AlgoId
from lanswitch.switching import ST1, ST2, ST3, RunRecord


def make_cfg(**kw):
    defaults = dict(
        problem=BaheuxSpec(n=20, delta=0.0),
        algorithms=(SwitchTemplate(ST2(20), PAPER_COMBOS[6]),),
        seed=42,
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestConfig:
    def test_requires_algorithms(self):
        with pytest.raises(ValueError):
            make_cfg(algorithms=())

    def test_requires_positive_repeats(self):
        with pytest.raises(ValueError):
            make_cfg(repeats=0)

    def test_combo_labels(self):
        assert combo_label(AlgoId.A4) == "A4/solo"
        assert combo_label(SwitchTemplate(ST2(20), (AlgoId.A4, AlgoId.A12))) == "A4+A12/ST2"
        assert combo_label(SwitchTemplate(ST1(), (AlgoId.A5B10,))) == "A5B10/ST1"
        assert combo_label(SwitchTemplate(ST3(), (AlgoId.A4, AlgoId.A8B10))) == "A4+A8B10/ST3"

    def test_st1_default_start_prefers_a8b10(self):
        tpl = SwitchTemplate(ST1(), (AlgoId.A4, AlgoId.A8B10))
        assert tpl.resolve_start() is AlgoId.A8B10
        tpl2 = SwitchTemplate(ST2(20), (AlgoId.A4, AlgoId.A8B10))
        assert tpl2.resolve_start() is AlgoId.A4

    def test_derive_seed_deterministic_and_distinct(self):
        a = derive_seed(42, 0)
        b = derive_seed(42, 1)
        assert a == derive_seed(42, 0)
        assert a != b


class TestRunExperiment:
    def test_paper_anchor_table1_n20(self):
        records = run_experiment(make_cfg())
        (rec,) = records
        assert rec.outcome == "Converged"
        assert rec.residual <= 1e-13
        assert rec.n == 20
        assert rec.delta == 0.0
        assert rec.combo == "A4+A12/ST2"
        assert math.isfinite(rec.seconds)

    def test_solo_a4_baheux100_not_converged(self):
        # Recorded fixture: A4 alone breaks down well before 5n iterations.
        cfg = make_cfg(problem=BaheuxSpec(n=100, delta=0.2),
                       algorithms=(AlgoId.A4,))
        (rec,) = run_experiment(cfg)
        assert rec.outcome == "Breakdown"
        assert rec.combo == "A4/solo"

    def test_all_four_solo_records(self):
        cfg = make_cfg(problem=BaheuxSpec(n=20, delta=0.0),
                       algorithms=tuple(AlgoId))
        records = run_experiment(cfg)
        assert [r.combo for r in records] == [
            "A4/solo", "A12/solo", "A5B10/solo", "A8B10/solo"]
        for r in records:
            assert r.outcome in ("Converged", "Breakdown", "IterLimit")

    def test_batch_determinism(self):
        cfg = make_cfg(problem=BaheuxSpec(n=60, delta=5.0),
                       algorithms=(SwitchTemplate(ST2(20), PAPER_COMBOS[9]),
                                   AlgoId.A8B10),
                       seed=7)
        rec1 = run_experiment(cfg)
        rec2 = run_experiment(cfg)
        for a, b in zip(rec1, rec2):
            assert a.outcome == b.outcome
            assert a.residual == b.residual
            assert a.iterations == b.iterations
            assert a.switches == b.switches
            assert a.restarts == b.restarts
            assert np.array_equal(a.x, b.x)

    def test_repeats_report_median(self):
        cfg = make_cfg(repeats=3)
        (rec,) = run_experiment(cfg)
        assert rec.seconds >= 0.0

    def test_matrix_market_problem(self, tmp_path):
        inst = gen_baheux(BaheuxSpec(n=20, delta=0.0))
        path = tmp_path / "prob.mtx"
        write_matrix_market(str(path), inst.A)
        cfg = make_cfg(problem=str(path))
        (rec,) = run_experiment(cfg)
        assert rec.outcome == "Converged"
        assert math.isnan(rec.delta)

    @pytest.mark.parametrize("number", sorted(PAPER_COMBOS))
    def test_paper_pairings_converge_on_200(self, number):
        cfg = make_cfg(problem=BaheuxSpec(n=200, delta=8.0),
                       algorithms=(SwitchTemplate(ST2(20), PAPER_COMBOS[number]),))
        (rec,) = run_experiment(cfg)
        assert rec.outcome == "Converged"
        assert rec.residual <= 1e-13

    def test_timing_coarse_monotonicity(self):
        # Median over 3 repeats is non-decreasing across a doubling ladder.
        medians = []
        for n in (200, 400, 800, 1600):
            cfg = make_cfg(problem=BaheuxSpec(n=n, delta=0.2), repeats=3)
            (rec,) = run_experiment(cfg)
            assert rec.outcome == "Converged"
            medians.append(rec.seconds)
        assert medians == sorted(medians)

    def test_extended_dimension_4000(self):
        # Largest published row: n=4000 at delta=8 stays below the tolerance.
        cfg = make_cfg(problem=BaheuxSpec(n=4000, delta=8.0))
        (rec,) = run_experiment(cfg)
        assert rec.outcome == "Converged"
        assert rec.residual <= 1e-13


class TestEmitTable:
    def _records(self):
        cfg = make_cfg(problem=BaheuxSpec(n=20, delta=0.2),
                       algorithms=(SwitchTemplate(ST2(20), PAPER_COMBOS[6]),
                                   SwitchTemplate(ST2(20), PAPER_COMBOS[9])))
        recs = run_experiment(cfg)
        cfg2 = make_cfg(problem=BaheuxSpec(n=40, delta=0.2),
                        algorithms=(SwitchTemplate(ST2(20), PAPER_COMBOS[6]),
                                    SwitchTemplate(ST2(20), PAPER_COMBOS[9])))
        recs += run_experiment(cfg2)
        cfg3 = make_cfg(problem=BaheuxSpec(n=60, delta=0.2),
                        algorithms=(SwitchTemplate(ST2(20), PAPER_COMBOS[6]),
                                    SwitchTemplate(ST2(20), PAPER_COMBOS[9])))
        recs += run_experiment(cfg3)
        return recs

    def test_single_record_csv_shape(self):
        (rec,) = run_experiment(make_cfg())
        text = emit_table([rec], format="csv")
        lines = text.strip().split("\n")
        assert len(lines) == 2
        assert lines[0] == "n,delta,combo,outcome,residual,iterations,switches,restarts,seconds"

    def test_csv_round_trip_five_significant_digits(self):
        records = self._records()
        text = emit_table(records, format="csv")
        parsed = list(csv.DictReader(io.StringIO(text)))
        assert len(parsed) == len(records)
        for row, rec in zip(parsed, records):
            assert int(row["n"]) == rec.n
            assert row["combo"] == rec.combo
            assert float(row["residual"]) == float(f"{rec.residual:.4e}")
            assert float(row["seconds"]) == float(f"{rec.seconds:.4e}")
            assert int(row["iterations"]) == rec.iterations

    def test_markdown_shape(self):
        records = self._records()
        text = emit_table(records, format="md")
        lines = [ln for ln in text.split("\n") if ln.startswith("|")]
        # header + separator + 3 dimension rows
        assert len(lines) == 5
        header = lines[0]
        assert header.count("residual") == 2
        assert header.count("T(s)") == 2
        data_rows = lines[2:]
        assert [row.split("|")[1].strip() for row in data_rows] == ["20", "40", "60"]

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError):
            emit_table([], format="csv")

    def test_unknown_format_rejected(self):
        (rec,) = run_experiment(make_cfg())
        with pytest.raises(ValueError):
            emit_table([rec], format="html")

    def test_scientific_rendering(self):
        rec = RunRecord(n=20, delta=0.0, combo="A4+A12/ST2", outcome="Converged",
                        residual=5.5067e-14, iterations=64, switches=2,
                        restarts=1, seconds=0.0012)
        text = emit_table([rec], format="csv")
        assert "5.5067e-14" in text


class TestCli:
    def test_solo_run_exit_codes(self, capsys):
        # A12 alone on n=100 cannot reach 1e-13: exit code 2.
        code = cli_main(["--problem", "baheux", "--n", "100", "--delta", "0.2",
                         "--solo", "a12", "--tol", "1e-13"])
        assert code == 2
        out = capsys.readouterr().out
        assert "A12/solo" in out

    def test_switching_run_exit_zero(self, capsys):
        code = cli_main(["--problem", "baheux", "--n", "100", "--delta", "0.2",
                         "--switch", "st2", "--pool", "a4,a12", "--cycle", "20",
                         "--seed", "42"])
        assert code == 0
        out = capsys.readouterr().out
        assert "Converged" in out

    def test_usage_error_exit_one(self, capsys):
        assert cli_main(["--switch", "st2"]) == 1  # missing --pool
        assert cli_main(["--problem", "nosuch"]) == 1
        assert cli_main(["--unknown-flag"]) == 1
        assert cli_main([]) == 1  # nothing to run

    def test_bad_algorithm_name(self):
        assert cli_main(["--solo", "a99"]) == 1

    def test_matrix_market_routing(self, tmp_path, capsys):
        inst = gen_baheux(BaheuxSpec(n=20, delta=0.0))
        path = tmp_path / "prob.mtx"
        write_matrix_market(str(path), inst.A, symmetric=True)
        code = cli_main(["--problem", f"mm:{path}", "--switch", "st1",
                         "--pool", "a5b10,a8b10"])
        assert code == 0

    def test_missing_file_exit_one(self):
        assert cli_main(["--problem", "mm:/nonexistent/x.mtx", "--solo", "a4"]) == 1

    def test_output_file_and_markdown(self, tmp_path):
        out = tmp_path / "report.md"
        code = cli_main(["--problem", "baheux", "--n", "20", "--delta", "0",
                         "--switch", "st2", "--pool", "a4,a12",
                         "--format", "md", "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert text.startswith("### delta = 0")
        assert "A4+A12/ST2" in text

    def test_st3_flags(self):
        code = cli_main(["--problem", "baheux", "--n", "60", "--delta", "0.2",
                         "--switch", "st3", "--pool", "a8b10,a4",
                         "--monitor-threshold", "1e-8", "--seed", "3"])
        assert code in (0, 2)

    def test_start_flag(self, capsys):
        code = cli_main(["--problem", "baheux", "--n", "60", "--delta", "0",
                         "--switch", "st2", "--pool", "a4,a12", "--start", "a12"])
        assert code == 0

    def test_large_problem_invocation(self, capsys):
        code = cli_main(["--problem", "baheux", "--n", "2000", "--delta", "5",
                         "--switch", "st2", "--pool", "a4,a12", "--cycle", "20",
                         "--seed", "42"])
        assert code == 0
        out = capsys.readouterr().out
        assert "Converged" in out

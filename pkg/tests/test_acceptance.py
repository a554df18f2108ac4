"""End-to-end acceptance checks.

One test per acceptance criterion; each prints a single PASS line when it
holds (pytest -v shows the per-criterion verdict either way). Tolerances
and instance counts are part of the criteria and must not be loosened.
"""

from __future__ import annotations

import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from actnas.activations import CANDIDATE_ORDER, ActivationKind
from actnas.cli import EXIT_OK, main
from actnas.devices import builtin_profile
from actnas.errors import NoFeasibleSolutionError
from actnas.model import enumerate_single_replacements, save_model, stacked_conv_model
from actnas.nwot import CodeMatrix, hamming_kernel, nwot_score
from actnas.report import round_half_away_from_zero
from actnas.search import (
    SearchConstraints,
    exact_search,
    hamming_distance,
    oriented_values,
    random_search,
)
from actnas.tables import (
    CostMatrix,
    Metric,
    build_latency_table,
    build_memory_table,
    improvement_pct,
)


def _passed(criterion: int, detail: str) -> None:
    print(f"criterion {criterion}: PASS ({detail})")


# ---------------------------------------------------------------------------
# criterion 1: improvement percentages
# ---------------------------------------------------------------------------


def test_criterion_1_improvement_arithmetic() -> None:
    cases = [
        (22.35, 17.37, 22.28),
        (18.53, 17.37, 6.26),
        (1230.0, 441.0, 64.15),
        (937.89, 809.96, 13.64),
    ]
    for reference, new, expected in cases:
        got = round_half_away_from_zero(improvement_pct(reference, new))
        assert abs(got - expected) <= 0.01, (reference, new, got, expected)
    _passed(1, f"{len(cases)} improvement percentages within 0.01")


# ---------------------------------------------------------------------------
# criterion 2: 69-slot enumeration and table build under a second
# ---------------------------------------------------------------------------


def test_criterion_2_table_scale_and_speed() -> None:
    model = stacked_conv_model(69)
    profile = builtin_profile("npu")
    started = time.perf_counter()
    candidates = enumerate_single_replacements(model)
    latency = build_latency_table(model, profile)
    memory = build_memory_table(model, profile)
    elapsed = time.perf_counter() - started
    assert len(candidates) == 345
    assert len(latency.entries) == 345
    assert len(memory.entries) == 345
    assert elapsed < 1.0, f"table construction took {elapsed:.3f}s"
    _passed(2, f"345 candidates and rows in {elapsed:.3f}s")


# ---------------------------------------------------------------------------
# criterion 3: exact search equals brute force
# ---------------------------------------------------------------------------


def _vector_brute_force(obj: np.ndarray, bud: np.ndarray,
                        budget: float) -> tuple[list[int], float, float] | None:
    """Enumerate all assignments with the solver's left-to-right sums."""
    n_layers, n_cols = obj.shape
    obj_totals = np.zeros(1)
    bud_totals = np.zeros(1)
    for level in range(n_layers):
        obj_totals = (obj_totals[:, None] + obj[level][None, :]).ravel()
        bud_totals = (bud_totals[:, None] + bud[level][None, :]).ravel()
    feasible = bud_totals <= budget
    if not feasible.any():
        return None
    masked = np.where(feasible, obj_totals, np.inf)
    flat = int(np.argmin(masked))  # first minimum = lexicographically smallest
    cols: list[int] = []
    remaining = flat
    for level in range(n_layers - 1, -1, -1):
        cols.append(remaining % n_cols)
        remaining //= n_cols
    cols.reverse()
    return cols, float(obj_totals[flat]), float(bud_totals[flat])


def test_criterion_3_exact_matches_brute_force() -> None:
    rng = np.random.default_rng(20260822)
    started = time.perf_counter()
    feasible_count = 0
    for trial in range(100):
        n_layers = int(rng.integers(2, 9))
        lat = CostMatrix(metric=Metric.LATENCY, device="d",
                         values=rng.normal(size=(n_layers, 5)))
        acc = CostMatrix(metric=Metric.ACCURACY, device="d",
                         values=rng.normal(size=(n_layers, 5)))
        matrices = {Metric.LATENCY: lat, Metric.ACCURACY: acc}
        if trial % 2 == 0:
            constraints = SearchConstraints(objective_metric=Metric.LATENCY,
                                            budget_metric=Metric.ACCURACY,
                                            budget_value=float(rng.uniform(-1, 3)))
        else:
            constraints = SearchConstraints(objective_metric=Metric.ACCURACY,
                                            budget_metric=Metric.LATENCY,
                                            budget_value=float(rng.uniform(-1, 3)))
        obj = oriented_values(matrices[constraints.objective_metric])
        bud = oriented_values(matrices[constraints.budget_metric])
        expected = _vector_brute_force(obj, bud, constraints.budget_value)
        if expected is None:
            with pytest.raises(NoFeasibleSolutionError):
                exact_search(matrices, constraints, diversity_d=0)
            continue
        feasible_count += 1
        proposal = exact_search(matrices, constraints, diversity_d=0).proposals[0]
        cols = [CANDIDATE_ORDER.index(kind) for kind in proposal.assignment]
        assert cols == expected[0], f"trial {trial}"
        assert proposal.objective_total == expected[1], f"trial {trial}"
        assert proposal.budget_total == expected[2], f"trial {trial}"
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"took {elapsed:.1f}s"
    assert feasible_count >= 50
    _passed(3, f"100 instances ({feasible_count} feasible) in {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# criterion 4: proxy score against a cofactor-expansion determinant
# ---------------------------------------------------------------------------


def _det_cofactor(m: list[list[float]]) -> float:
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0.0
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        total += ((-1.0) ** j) * m[0][j] * _det_cofactor(minor)
    return total


def test_criterion_4_score_against_cofactor_determinant() -> None:
    rng = np.random.default_rng(4)
    started = time.perf_counter()
    finite_checked = 0
    degenerate_checked = 0
    for _ in range(50):
        n = int(rng.integers(1, 6))
        units = int(rng.integers(max(2, n), 30))
        bits = (rng.random((n, units)) > 0.5).astype(np.uint8)
        codes = CodeMatrix(bits=bits)
        det = _det_cofactor([[float(v) for v in row]
                             for row in hamming_kernel(codes)])
        score = nwot_score(codes)
        if det <= 0:
            assert score.degenerate
            degenerate_checked += 1
            continue
        assert score.value == pytest.approx(math.log(det), rel=1e-9)
        finite_checked += 1

    # single sample: the kernel is the 1x1 matrix [n_units]
    for units in (1, 7, 64):
        single = nwot_score(CodeMatrix(bits=np.ones((1, units), dtype=np.uint8)))
        assert single.value == math.log(units)
        assert not single.degenerate

    # duplicate rows collapse the kernel
    dup = nwot_score(CodeMatrix(bits=np.array([[1, 0, 1], [1, 0, 1]],
                                              dtype=np.uint8)))
    assert dup.degenerate
    assert finite_checked + degenerate_checked == 50
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"took {elapsed:.3f}s"
    _passed(4, f"{finite_checked} finite within 1e-9 relative, "
               f"{degenerate_checked} degenerate flagged, {elapsed:.3f}s")


# ---------------------------------------------------------------------------
# criterion 5: budgets, diversity, and random-vs-exact dominance
# ---------------------------------------------------------------------------


def test_criterion_5_budget_diversity_dominance() -> None:
    rng = np.random.default_rng(5)
    for trial in range(100):
        n_layers = int(rng.integers(4, 9))
        lat = CostMatrix(metric=Metric.LATENCY, device="d",
                         values=rng.normal(size=(n_layers, 5)))
        acc = CostMatrix(metric=Metric.ACCURACY, device="d",
                         values=rng.normal(size=(n_layers, 5)))
        matrices = {Metric.LATENCY: lat, Metric.ACCURACY: acc}
        # budget at the median of sampled draws keeps about half the space
        bud_rows = oriented_values(acc)
        samples = [float(sum(bud_rows[i, int(c)] for i, c in enumerate(
            rng.integers(0, 5, size=n_layers)))) for _ in range(51)]
        budget = float(np.median(samples))
        constraints = SearchConstraints(objective_metric=Metric.LATENCY,
                                        budget_metric=Metric.ACCURACY,
                                        budget_value=budget)

        result = exact_search(matrices, constraints, top_k=3, diversity_d=3)
        assert result.proposals, f"trial {trial}: no proposals"
        totals = [p.objective_total for p in result.proposals]
        assert totals == sorted(totals), f"trial {trial}: ranks out of order"
        for proposal in result.proposals:
            assert proposal.budget_total <= budget, f"trial {trial}"
        for a, b in itertools.combinations(result.proposals, 2):
            assert hamming_distance(a.assignment, b.assignment) >= 3, \
                f"trial {trial}"

        sampled = random_search(matrices, constraints, iterations=300,
                                seed=trial)
        assert sampled.budget_total <= budget, f"trial {trial}"
        assert sampled.objective_total >= result.proposals[0].objective_total, \
            f"trial {trial}: random beat exact"
    _passed(5, "100 instances: budgets held, pairwise distance >= 3, "
               "random search feasible and never better")


# ---------------------------------------------------------------------------
# criterion 6: byte-identical reruns
# ---------------------------------------------------------------------------


def test_criterion_6_byte_identical_reruns(tmp_path: Path) -> None:
    model_path = tmp_path / "model.json"
    save_model(stacked_conv_model(5), model_path)

    outputs: list[dict[str, bytes]] = []
    for run in ("one", "two"):
        run_dir = tmp_path / run
        tables_dir = run_dir / "tables"
        assert main(["bench-tables", "--model", str(model_path),
                     "--out", str(tables_dir), "--profile", "npu",
                     "--seed", "9", "--batch-size", "8", "--runs", "5"]) == EXIT_OK
        grabbed: dict[str, bytes] = {}
        for csv_path in sorted(tables_dir.glob("*.csv")):
            grabbed[csv_path.name] = csv_path.read_bytes()
        for method, extra in (("exact", []),
                              ("random", ["--iterations", "500"])):
            out_path = run_dir / f"{method}.json"
            assert main(["search", "--model", str(model_path),
                         "--tables-dir", str(tables_dir), "--method", method,
                         "--objective", "latency", "--seed", "9",
                         "--out", str(out_path), *extra]) == EXIT_OK
            grabbed[out_path.name] = out_path.read_bytes()
        outputs.append(grabbed)

    assert outputs[0].keys() == outputs[1].keys()
    for name in outputs[0]:
        assert outputs[0][name] == outputs[1][name], f"{name} differs between runs"
    _passed(6, f"{len(outputs[0])} artifacts byte-identical across reruns")


# ---------------------------------------------------------------------------
# criterion 7: the report carries only values this artifact computes
# ---------------------------------------------------------------------------


def test_criterion_7_report_excludes_external_measurements(
        tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    model_path = tmp_path / "model.json"
    save_model(stacked_conv_model(4), model_path)
    tables_dir = tmp_path / "tables"
    assert main(["bench-tables", "--model", str(model_path),
                 "--out", str(tables_dir), "--profile", "npu",
                 "--batch-size", "4", "--runs", "3"]) == EXIT_OK
    proposals = tmp_path / "p.json"
    assert main(["search", "--model", str(model_path),
                 "--tables-dir", str(tables_dir), "--method", "exact",
                 "--out", str(proposals)]) == EXIT_OK
    capsys.readouterr()
    out_dir = tmp_path / "report"
    assert main(["report", "--tables-dir", str(tables_dir),
                 "--proposals", str(proposals), "--out", str(out_dir)]) == EXIT_OK
    text = capsys.readouterr().out
    csv_text = (out_dir / "report.csv").read_text()

    header = csv_text.splitlines()[0].split(",")
    assert header == ["model", "npu_latency", "npu_improvement_vs_hardswish",
                      "npu_improvement_vs_silu"]
    for surface in (text, csv_text):
        assert "mAP" not in surface
    _passed(7, "report columns limited to simulated totals and improvement "
               "percentages; no trained-accuracy or hardware-measured columns")

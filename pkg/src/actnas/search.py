"""Assignment search strategies over per-layer delta matrices.

All strategies pick one activation per layer. They consume the dense delta
matrices from the benchmark tables and share one "cost" orientation:
latency and memory deltas are used as-is (positive is worse) while
accuracy deltas are negated, so every objective is minimized and a budget
always caps an oriented delta total. Proposal totals are reported in that
same orientation: objective_total and budget_total are total deltas versus
the reference model, smaller is better, and budget_total never exceeds the
budget value.

Strategies:

* lzcm_search: keep a layer's alternative activation only where its score
  delta strictly beats the base activation's.
* naive_assignment: a fixed prefix of one activation, the rest another.
* random_search: seeded uniform sampling with rejection of over-budget
  draws, tracking the best feasible assignment.
* exact_search: depth-first branch and bound over layers, provably optimal,
  with no-good cuts that force the next proposal to differ from all earlier
  ones in at least diversity_d slots.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .activations import CANDIDATE_ORDER, COLUMN_INDEX, ActivationKind, parse_activation
from .errors import NoFeasibleSolutionError
from .model import ModelSpec
from .tables import CostMatrix, Metric

#: Resample attempts per random-search iteration before the iteration fails.
REJECTION_CAP = 100

DEFAULT_RANDOM_ITERATIONS = 10_000

# Slack for branch-and-bound pruning: bounds are compared with this much
# headroom so float association error can never prune a true optimum, while
# leaf acceptance stays exact.
_PRUNE_RTOL = 1e-9


@dataclass(frozen=True)
class SearchConstraints:
    """Objective metric to minimize plus a budget cap on a second metric.

    budget_value caps the oriented budget delta total: added milliseconds
    or kilobytes for latency/memory budgets, score loss for an accuracy
    budget. math.inf disables the cap.
    """

    objective_metric: Metric
    budget_metric: Metric
    budget_value: float = math.inf

    def __post_init__(self) -> None:
        if self.objective_metric is self.budget_metric:
            raise ValueError("objective and budget must use different metrics")
        if math.isnan(self.budget_value):
            raise ValueError("budget_value must not be NaN")


@dataclass(frozen=True)
class Proposal:
    """One assignment with its oriented delta totals (smaller is better)."""

    assignment: tuple[ActivationKind, ...]
    objective_total: float | None = None
    budget_total: float | None = None
    rank: int = 1


@dataclass(frozen=True)
class SearchResult:
    proposals: tuple[Proposal, ...]
    truncated: bool = False


def oriented_values(matrix: CostMatrix) -> np.ndarray:
    """Delta matrix with positive-is-worse orientation for every metric."""
    if matrix.metric is Metric.ACCURACY:
        return -matrix.values
    return matrix.values


def _columns(assignment: tuple[ActivationKind, ...]) -> list[int]:
    return [COLUMN_INDEX[kind] for kind in assignment]


def _path_cost(rows: list[list[float]], columns: list[int]) -> float:
    # Left-to-right accumulation; every consumer sums in this same order so
    # equal assignments always produce bit-identical totals.
    total = 0.0
    for i, col in enumerate(columns):
        total += rows[i][col]
    return total


def _oriented_rows(matrix: CostMatrix) -> list[list[float]]:
    return [[float(v) for v in row] for row in oriented_values(matrix)]


def _pick(matrices: Mapping[Metric, CostMatrix], metric: Metric) -> CostMatrix:
    try:
        return matrices[metric]
    except KeyError:
        raise ValueError(f"no matrix supplied for metric {metric.value!r}") from None


def evaluate_assignment(assignment: tuple[ActivationKind, ...],
                        matrices: Mapping[Metric, CostMatrix],
                        constraints: SearchConstraints,
                        rank: int = 1) -> Proposal:
    """Price an externally chosen assignment in the common orientation."""
    obj = _oriented_rows(_pick(matrices, constraints.objective_metric))
    bud = _oriented_rows(_pick(matrices, constraints.budget_metric))
    if len(obj) != len(assignment) or len(bud) != len(assignment):
        raise ValueError("matrix layer counts do not match the assignment")
    cols = _columns(assignment)
    return Proposal(assignment=tuple(assignment),
                    objective_total=_path_cost(obj, cols),
                    budget_total=_path_cost(bud, cols),
                    rank=rank)


def lzcm_search(accuracy_matrix: CostMatrix,
                base: ActivationKind = ActivationKind.SILU,
                alt: ActivationKind = ActivationKind.RELU) -> Proposal:
    """Per-layer greedy score check between a base and an alternative.

    Each layer keeps the alternative activation only when its accuracy
    delta is strictly greater than the base activation's delta (which is 0
    wherever the base is the reference). The result mixes at most the two
    given activations.
    """
    if accuracy_matrix.metric is not Metric.ACCURACY:
        raise ValueError("lzcm_search needs an accuracy matrix")
    base_col = COLUMN_INDEX[base]
    alt_col = COLUMN_INDEX[alt]
    values = accuracy_matrix.values
    assignment = tuple(
        alt if values[i, alt_col] > values[i, base_col] else base
        for i in range(accuracy_matrix.n_layers)
    )
    rows = _oriented_rows(accuracy_matrix)
    return Proposal(assignment=assignment,
                    objective_total=_path_cost(rows, _columns(assignment)),
                    budget_total=None)


def naive_assignment(model: ModelSpec, k: int = 3,
                     early: ActivationKind = ActivationKind.RELU,
                     rest: ActivationKind = ActivationKind.SILU) -> Proposal:
    """First min(k, L) slots get the early activation, the rest the other."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if not model.layers:
        raise ValueError("model has no layers")
    prefix = min(k, model.n_layers)
    assignment = (early,) * prefix + (rest,) * (model.n_layers - prefix)
    return Proposal(assignment=assignment)


def random_search(matrices: Mapping[Metric, CostMatrix],
                  constraints: SearchConstraints,
                  iterations: int = DEFAULT_RANDOM_ITERATIONS,
                  seed: int = 0) -> Proposal:
    """Uniform per-layer sampling; the best feasible draw wins.

    Each iteration resamples up to REJECTION_CAP times to find a draw
    within budget before the iteration counts as failed. Deterministic for
    a given seed, and iteration counts nest: the first draws of a longer
    run replay a shorter run exactly.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    obj = _oriented_rows(_pick(matrices, constraints.objective_metric))
    bud = _oriented_rows(_pick(matrices, constraints.budget_metric))
    n_layers = len(obj)
    if len(bud) != n_layers:
        raise ValueError("objective and budget matrices disagree on layer count")
    n_cols = len(CANDIDATE_ORDER)
    budget_value = constraints.budget_value
    rng = np.random.default_rng(seed)
    best_cols: list[int] | None = None
    best_obj = math.inf
    best_bud = 0.0
    for _ in range(iterations):
        for _attempt in range(REJECTION_CAP):
            cols = [int(c) for c in rng.integers(0, n_cols, size=n_layers)]
            bud_total = _path_cost(bud, cols)
            if bud_total <= budget_value:
                break
        else:
            continue  # iteration failed: every resample blew the budget
        obj_total = _path_cost(obj, cols)
        if best_cols is None or obj_total < best_obj:
            best_cols, best_obj, best_bud = cols, obj_total, bud_total
    if best_cols is None:
        raise NoFeasibleSolutionError(
            f"random search found no assignment within budget "
            f"{budget_value!r} after {iterations} iterations")
    assignment = tuple(CANDIDATE_ORDER[c] for c in best_cols)
    return Proposal(assignment=assignment, objective_total=best_obj,
                    budget_total=best_bud)


def _solve_bnb(obj: list[list[float]], bud: list[list[float]], budget_value: float,
               cuts: list[tuple[list[int], int]]) -> tuple[list[int], float, float] | None:
    """One branch-and-bound solve; None when the cut/budget space is empty.

    The bound at a node is the partial objective plus the sum of per-layer
    objective minima over the remaining layers; nodes are also discarded
    when even the per-layer budget minima cannot get back under budget, or
    when a no-good cut already has too many matching slots. Children are
    visited in the fixed column order, so the first optimum found is the
    lexicographically smallest one.
    """
    n_layers = len(obj)
    n_cols = len(obj[0])
    if math.isinf(budget_value) and budget_value < 0:
        return None

    obj_tail = [0.0] * (n_layers + 1)
    bud_tail = [0.0] * (n_layers + 1)
    for i in range(n_layers - 1, -1, -1):
        obj_tail[i] = obj_tail[i + 1] + min(obj[i])
        bud_tail[i] = bud_tail[i + 1] + min(bud[i])

    budget_slack = budget_value + _PRUNE_RTOL * max(1.0, abs(budget_value)) \
        if math.isfinite(budget_value) else budget_value
    best_val: float | None = None
    best_cols: list[int] | None = None
    prefix = [0] * n_layers

    def dfs(level: int, obj_acc: float, bud_acc: float, matches: list[int]) -> None:
        nonlocal best_val, best_cols
        if best_val is not None:
            slack = best_val + _PRUNE_RTOL * max(1.0, abs(best_val))
            if obj_acc + obj_tail[level] > slack:
                return
        if bud_acc + bud_tail[level] > budget_slack:
            return
        for cut_idx, (_, cap) in enumerate(cuts):
            if matches[cut_idx] > cap:
                return
        if level == n_layers:
            if bud_acc <= budget_value and (best_val is None or obj_acc < best_val):
                best_val = obj_acc
                best_cols = prefix.copy()
            return
        row_obj = obj[level]
        row_bud = bud[level]
        for col in range(n_cols):
            prefix[level] = col
            if cuts:
                child_matches = [m + (1 if cut_cols[level] == col else 0)
                                 for m, (cut_cols, _) in zip(matches, cuts)]
            else:
                child_matches = matches
            dfs(level + 1, obj_acc + row_obj[col], bud_acc + row_bud[col],
                child_matches)

    dfs(0, 0.0, 0.0, [0] * len(cuts))
    if best_cols is None:
        return None
    return best_cols, best_val, _path_cost(bud, best_cols)


def exact_search(matrices: Mapping[Metric, CostMatrix],
                 constraints: SearchConstraints,
                 top_k: int = 1,
                 diversity_d: int = 3) -> SearchResult:
    """Optimal assignments by branch and bound, diversified by no-good cuts.

    Solves repeatedly: after each optimum, a cut excludes every assignment
    sharing more than L - diversity_d slots with any returned proposal, so
    proposals differ pairwise in at least diversity_d slots. Stops at top_k
    proposals, or earlier with truncated=True once the cuts exhaust the
    feasible space. Objectives are non-decreasing down the ranked list and
    ties resolve to the lexicographically smallest assignment.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    obj_matrix = _pick(matrices, constraints.objective_metric)
    bud_matrix = _pick(matrices, constraints.budget_metric)
    obj = _oriented_rows(obj_matrix)
    bud = _oriented_rows(bud_matrix)
    n_layers = len(obj)
    if len(bud) != n_layers:
        raise ValueError("objective and budget matrices disagree on layer count")
    if not 0 <= diversity_d <= n_layers:
        raise ValueError(f"diversity_d must lie in [0, {n_layers}]")

    cuts: list[tuple[list[int], int]] = []
    proposals: list[Proposal] = []
    truncated = False
    while len(proposals) < top_k:
        solved = _solve_bnb(obj, bud, constraints.budget_value, cuts)
        if solved is None:
            if not proposals:
                raise NoFeasibleSolutionError(
                    f"no assignment satisfies budget {constraints.budget_value!r} "
                    f"on metric {constraints.budget_metric.value}")
            truncated = True
            break
        cols, obj_total, bud_total = solved
        proposals.append(Proposal(
            assignment=tuple(CANDIDATE_ORDER[c] for c in cols),
            objective_total=obj_total,
            budget_total=bud_total,
            rank=len(proposals) + 1,
        ))
        cuts.append((cols, n_layers - diversity_d))
    return SearchResult(proposals=tuple(proposals), truncated=truncated)


def hamming_distance(a: tuple[ActivationKind, ...], b: tuple[ActivationKind, ...]) -> int:
    if len(a) != len(b):
        raise ValueError("assignments differ in length")
    return sum(1 for x, y in zip(a, b) if x is not y)


def _total_to_json(total: float | None) -> float | None:
    if total is None or math.isinf(total):
        return None
    return total


def proposals_to_json(method: str, constraints: SearchConstraints | None,
                      result: SearchResult) -> str:
    payload = {
        "method": method,
        "constraints": None if constraints is None else {
            "objective_metric": constraints.objective_metric.value,
            "budget_metric": constraints.budget_metric.value,
            "budget_value": (None if math.isinf(constraints.budget_value)
                             else constraints.budget_value),
        },
        "proposals": [
            {
                "rank": p.rank,
                "assignment": [kind.value for kind in p.assignment],
                "objective_total": _total_to_json(p.objective_total),
                "budget_total": _total_to_json(p.budget_total),
            }
            for p in result.proposals
        ],
        "truncated": result.truncated,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class ProposalSet:
    method: str
    constraints: SearchConstraints | None
    result: SearchResult


def parse_proposals(text: str) -> ProposalSet:
    data = json.loads(text)
    raw_constraints = data.get("constraints")
    constraints = None
    if raw_constraints is not None:
        budget = raw_constraints.get("budget_value")
        constraints = SearchConstraints(
            objective_metric=Metric(raw_constraints["objective_metric"]),
            budget_metric=Metric(raw_constraints["budget_metric"]),
            budget_value=math.inf if budget is None else float(budget),
        )
    proposals = tuple(
        Proposal(
            assignment=tuple(parse_activation(a) for a in item["assignment"]),
            objective_total=item.get("objective_total"),
            budget_total=item.get("budget_total"),
            rank=int(item["rank"]),
        )
        for item in data["proposals"]
    )
    return ProposalSet(method=str(data["method"]), constraints=constraints,
                       result=SearchResult(proposals=proposals,
                                           truncated=bool(data.get("truncated", False))))


def write_proposals(path: str | Path, method: str,
                    constraints: SearchConstraints | None,
                    result: SearchResult) -> None:
    Path(path).write_text(proposals_to_json(method, constraints, result))


def read_proposals(path: str | Path) -> ProposalSet:
    return parse_proposals(Path(path).read_text())

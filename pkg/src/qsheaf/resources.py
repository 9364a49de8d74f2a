"""Quantum resource accounting for alignment.

Covers per-edge entanglement (Schmidt rank and the ebit budget it buys
against the obstruction dimension), empirical measurement models, the
noncontextual polytope, and the contextual fraction as a total-variation
distance minimized by a linear program.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import lp, qcore
from .errors import (
    ScaleError,
    UndefinedBoundError,
    ValidationError,
)

TABLE_SUM_ATOL = 1e-9
NO_SIGNALLING_ATOL = 1e-8
ENUMERATION_BOUND = 10**6
CF_ZERO_ATOL = 1e-9


@dataclass(eq=False)
class EntangledEdgeResource:
    """Shared bipartite pure state on an edge's ancilla spaces."""

    edge_id: str
    state: qcore.PureState
    schmidt_coefficients: np.ndarray
    schmidt_rank: int

    @classmethod
    def from_state(
        cls, edge_id: str, state: qcore.PureState, tol: float = qcore.RANK_RTOL
    ) -> "EntangledEdgeResource":
        decomposition = qcore.schmidt_decompose(state, tol=tol)
        return cls(
            edge_id=str(edge_id),
            state=state,
            schmidt_coefficients=decomposition.coefficients,
            schmidt_rank=decomposition.rank,
        )


def edge_schmidt_rank(resource: EntangledEdgeResource, tol: float = qcore.RANK_RTOL) -> int:
    """Recompute the Schmidt rank of the resource state at the given threshold."""
    return qcore.schmidt_decompose(resource.state, tol=tol).rank


@dataclass(eq=False)
class EAReport:
    """Entanglement-assisted obstruction accounting.

    ``dim_H1_ea`` is ``max(0, dim_H1 - sum_e log2 rank_e)`` evaluated as a
    real number; the ebit sum need not be an integer, and no rounding is
    applied.
    """

    dim_H1_unassisted: int
    ebit_budget: float
    dim_H1_ea: float


def ea_h1_dimension(dim_h1: int, resources) -> EAReport:
    """Effective obstruction dimension once shared entanglement is spent.

    Separable resources (rank 1) contribute nothing, so the classical case
    leaves the obstruction dimension unchanged.
    """
    if dim_h1 < 0:
        raise ValidationError(f"dim H1 must be nonnegative, got {dim_h1}")
    budget = float(sum(np.log2(r.schmidt_rank) for r in resources))
    return EAReport(
        dim_H1_unassisted=int(dim_h1),
        ebit_budget=budget,
        dim_H1_ea=max(0.0, float(dim_h1) - budget),
    )


@dataclass(eq=False)
class MeasurementScenario:
    """Declared measurements (with outcome counts) and compatible contexts."""

    measurements: tuple
    contexts: tuple

    def __post_init__(self) -> None:
        self.measurements = tuple((str(m), int(k)) for m, k in self.measurements)
        names = [m for m, _ in self.measurements]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate measurement ids")
        for m, k in self.measurements:
            if k < 2:
                raise ValidationError(f"measurement {m!r} needs >= 2 outcomes, got {k}")
        self._outcomes = dict(self.measurements)
        contexts = tuple(tuple(str(m) for m in ctx) for ctx in self.contexts)
        for ctx in contexts:
            if not ctx:
                raise ValidationError("empty context")
            if len(set(ctx)) != len(ctx):
                raise ValidationError(f"context {ctx} repeats a measurement")
            for m in ctx:
                if m not in self._outcomes:
                    raise ValidationError(f"context references unknown measurement {m!r}")
        self.contexts = contexts

    def outcomes(self, measurement_id: str) -> int:
        return self._outcomes[measurement_id]

    def context_shape(self, context) -> tuple:
        return tuple(self._outcomes[m] for m in context)


def _marginal(table: np.ndarray, context, subset) -> np.ndarray:
    """Marginal over ``subset`` (sorted order), summing out the other axes."""
    subset = sorted(subset)
    axes_to_keep = [context.index(m) for m in subset]
    axes_to_sum = tuple(i for i in range(len(context)) if i not in axes_to_keep)
    reduced = table.sum(axis=axes_to_sum) if axes_to_sum else table
    order = np.argsort(axes_to_keep)
    kept_sorted = [axes_to_keep[i] for i in order]
    if kept_sorted != axes_to_keep:
        reduced = np.transpose(reduced, axes=np.argsort(np.argsort(axes_to_keep)))
    return reduced


@dataclass(eq=False)
class EmpiricalModel:
    """Per-context joint outcome tables, validated for no-signalling."""

    scenario: MeasurementScenario
    tables: dict

    def __post_init__(self) -> None:
        tables = {}
        for ctx in self.scenario.contexts:
            raw = self.tables.get(ctx)
            if raw is None:
                raise ValidationError(f"no table for context {ctx}")
            table = np.asarray(raw, dtype=float)
            shape = self.scenario.context_shape(ctx)
            if table.shape != shape:
                raise ValidationError(
                    f"context {ctx}: table shape {table.shape} != {shape}"
                )
            if table.min(initial=0.0) < -1e-12:
                raise ValidationError(f"context {ctx}: negative probability")
            total = float(table.sum())
            if abs(total - 1.0) > TABLE_SUM_ATOL:
                raise ValidationError(
                    f"context {ctx}: probabilities sum to {total:.12g}, not 1"
                )
            tables[ctx] = table
        extra = set(self.tables) - set(self.scenario.contexts)
        if extra:
            raise ValidationError(f"tables for undeclared contexts: {sorted(extra)}")
        self.tables = tables
        self._check_no_signalling()

    def _check_no_signalling(self) -> None:
        contexts = self.scenario.contexts
        for i in range(len(contexts)):
            for j in range(i + 1, len(contexts)):
                shared = set(contexts[i]) & set(contexts[j])
                if not shared:
                    continue
                mi = _marginal(self.tables[contexts[i]], contexts[i], shared)
                mj = _marginal(self.tables[contexts[j]], contexts[j], shared)
                gap = float(np.max(np.abs(mi - mj)))
                if gap > NO_SIGNALLING_ATOL:
                    raise ValidationError(
                        f"no-signalling violated between {contexts[i]} and "
                        f"{contexts[j]}: marginal gap {gap:.3e}"
                    )


def nc_vertices(scenario: MeasurementScenario) -> list:
    """Vertices of the noncontextual polytope: all deterministic assignments.

    Enumerates one outcome per declared measurement and induces the
    deterministic table on every context.
    """
    total = 1
    for _, k in scenario.measurements:
        total *= k
        if total > ENUMERATION_BOUND:
            raise ScaleError(
                f"deterministic assignment count exceeds {ENUMERATION_BOUND}"
            )
    names = [m for m, _ in scenario.measurements]
    ranges = [range(k) for _, k in scenario.measurements]
    models = []
    for assignment in itertools.product(*ranges):
        value = dict(zip(names, assignment))
        tables = {}
        for ctx in scenario.contexts:
            table = np.zeros(scenario.context_shape(ctx))
            table[tuple(value[m] for m in ctx)] = 1.0
            tables[ctx] = table
        models.append(EmpiricalModel(scenario, tables))
    return models


def _flatten(model: EmpiricalModel) -> np.ndarray:
    return np.concatenate(
        [model.tables[ctx].reshape(-1) for ctx in model.scenario.contexts]
    )


def per_context_tv(model: EmpiricalModel, other: EmpiricalModel) -> dict:
    """Total variation distance per context (half the L1 table difference)."""
    out = {}
    for ctx in model.scenario.contexts:
        out[ctx] = 0.5 * float(np.abs(model.tables[ctx] - other.tables[ctx]).sum())
    return out


def model_distance(model: EmpiricalModel, other: EmpiricalModel) -> float:
    """Sum over contexts of the per-context total variation distance."""
    return float(sum(per_context_tv(model, other).values()))


@dataclass(eq=False)
class ContextualFractionResult:
    cf: float
    nearest_nc: EmpiricalModel
    weights: np.ndarray
    per_context: dict
    lp_iterations: int


def contextual_fraction(model: EmpiricalModel) -> ContextualFractionResult:
    """Distance from the model to the noncontextual polytope, via an LP.

    Minimizes the summed per-context total variation distance to a convex
    combination of deterministic vertices.  Exact linearization: with
    entrywise gaps ``t >= |e - V mu|``, minimize ``sum(t) / 2`` subject to
    the simplex constraint on ``mu``.
    """
    vertices = nc_vertices(model.scenario)
    v = np.column_stack([_flatten(m) for m in vertices])
    e = _flatten(model)
    n_entries, n_vertices = v.shape

    # variables: mu (n_vertices), t (n_entries), slack+ (n_entries), slack- (n_entries)
    n_vars = n_vertices + 3 * n_entries
    rows = 2 * n_entries + 1
    a = np.zeros((rows, n_vars))
    b = np.zeros(rows)
    t0 = n_vertices
    s_plus = n_vertices + n_entries
    s_minus = n_vertices + 2 * n_entries
    for i in range(n_entries):
        # V mu - t + s+ = e   (upper half of |.|)
        a[i, :n_vertices] = v[i]
        a[i, t0 + i] = -1.0
        a[i, s_plus + i] = 1.0
        b[i] = e[i]
        # V mu + t - s- = e   (lower half of |.|)
        r = n_entries + i
        a[r, :n_vertices] = v[i]
        a[r, t0 + i] = 1.0
        a[r, s_minus + i] = -1.0
        b[r] = e[i]
    a[-1, :n_vertices] = 1.0
    b[-1] = 1.0
    cost = np.zeros(n_vars)
    cost[t0 : t0 + n_entries] = 0.5

    solution = lp.solve_lp(cost, a, b)
    weights = solution.x[:n_vertices]
    nearest_tables = {}
    offset = 0
    for ctx in model.scenario.contexts:
        shape = model.scenario.context_shape(ctx)
        size = int(np.prod(shape))
        nearest_tables[ctx] = (v[offset : offset + size] @ weights).reshape(shape)
        offset += size
    nearest = EmpiricalModel(model.scenario, nearest_tables)
    return ContextualFractionResult(
        cf=float(solution.value),
        nearest_nc=nearest,
        weights=weights,
        per_context=per_context_tv(model, nearest),
        lp_iterations=solution.iterations,
    )


def audit_contextual_reduction(
    dim_h1_classical: int, dim_h1_quantum: int, cf: float
) -> bool:
    """Audit that a nonzero contextual fraction comes with a strictly
    smaller quantum obstruction dimension."""
    if cf <= CF_ZERO_ATOL:
        return True
    return dim_h1_quantum < dim_h1_classical


def rate_reduction_bound(cf: float, dim_h1_classical: int) -> float:
    """Lower bound on the classical-minus-quantum rate gap: cf * log2(dim)."""
    if dim_h1_classical < 1:
        raise UndefinedBoundError(
            f"bound undefined for classical obstruction dimension {dim_h1_classical}"
        )
    return float(cf * np.log2(dim_h1_classical))

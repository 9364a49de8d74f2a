"""Bipartite correlation measures: mutual information, the classical
correlation extractable by measuring one side, discord, and integrated
information.

The measurement optimization ranges over rank-1 projective measurements
on B.  For a qubit B the search is a Bloch-sphere grid followed by
coordinate-descent refinement; larger B falls back to a coarse random
basis search behind an explicit override and is flagged as a lower bound
on the classical correlation (hence an upper bound on discord).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import (
    DimensionError,
    NoPartitionError,
    UnsupportedDimensionError,
    ValidationError,
)

_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=np.complex128),
    np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    np.array([[1, 0], [0, -1]], dtype=np.complex128),
)

PROBABILITY_FLOOR = 1e-12


@dataclass(eq=False)
class BipartiteState:
    """Joint state of two agents with declared factor dimensions."""

    dim_a: int
    dim_b: int
    rho: qcore.DensityOperator

    def __post_init__(self) -> None:
        if self.rho.dim != self.dim_a * self.dim_b:
            raise DimensionError(
                f"state dim {self.rho.dim} != {self.dim_a} * {self.dim_b}"
            )

    def marginal_a(self) -> qcore.DensityOperator:
        return qcore.partial_trace(self.rho, self.dim_a, self.dim_b, keep="A")

    def marginal_b(self) -> qcore.DensityOperator:
        return qcore.partial_trace(self.rho, self.dim_a, self.dim_b, keep="B")


@dataclass(eq=False)
class MeasurementSearchConfig:
    """Grid resolution, refinement budget and coarse-search policy."""

    n_theta: int = 64
    n_phi: int = 128
    refine_iterations: int = 50
    coarse_samples: int = 1024
    allow_coarse: bool = False
    coarse_seed: int = 0


@dataclass(eq=False)
class OptimalMeasurement:
    """Argmax measurement of the classical-correlation search."""

    kind: str  # "bloch" for qubit B, "basis" for the coarse search
    theta: float | None
    phi: float | None
    projectors: tuple
    lower_bound: bool = False


@dataclass(eq=False)
class CorrelationReport:
    mutual_info: float
    classical_J: float
    discord: float
    integrated_phi: float
    optimizer_measurement: OptimalMeasurement


def mutual_information(state: BipartiteState) -> float:
    """S(A) + S(B) - S(AB) in bits."""
    return (
        qcore.von_neumann_entropy(state.marginal_a())
        + qcore.von_neumann_entropy(state.marginal_b())
        - qcore.von_neumann_entropy(state.rho)
    )


def _entropy_of_eigenvalues(lam: np.ndarray) -> float:
    lam = lam[lam > qcore.ENTROPY_EIGENVALUE_FLOOR]
    return float(-(lam * np.log2(lam)).sum()) if lam.size else 0.0


def _bloch_projectors(theta: float, phi: float) -> tuple:
    n = np.array(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )
    pauli_dot = sum(n[i] * _PAULI[i] for i in range(3))
    eye = np.eye(2, dtype=np.complex128)
    return ((eye + pauli_dot) / 2, (eye - pauli_dot) / 2)


def conditional_entropy(state: BipartiteState, projectors) -> float:
    """sum_b p_b S(rho_A | outcome b) for a projective measurement on B."""
    rho_t = state.rho.matrix.reshape(
        state.dim_a, state.dim_b, state.dim_a, state.dim_b
    )
    total = 0.0
    for proj in projectors:
        conditional = np.einsum("abAc,cb->aA", rho_t, proj)
        conditional = (conditional + qcore.dagger(conditional)) / 2
        p = float(np.trace(conditional).real)
        if p < PROBABILITY_FLOOR:
            continue
        lam = np.linalg.eigvalsh(conditional / p)
        total += p * _entropy_of_eigenvalues(np.clip(lam, 0.0, None))
    return total


def _conditional_entropy_grid(state: BipartiteState, thetas, phis) -> np.ndarray:
    """Vectorized conditional entropy over a (theta, phi) direction grid."""
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    nx = np.sin(tt) * np.cos(pp)
    ny = np.sin(tt) * np.sin(pp)
    nz = np.cos(tt)
    directions = np.stack([nx, ny, nz], axis=-1).reshape(-1, 3)
    eye = np.eye(2, dtype=np.complex128)
    pauli_dot = np.einsum("nk,kij->nij", directions, np.stack(_PAULI))
    rho_t = state.rho.matrix.reshape(
        state.dim_a, state.dim_b, state.dim_a, state.dim_b
    )
    result = np.zeros(directions.shape[0])
    for sign in (1.0, -1.0):
        projectors = (eye[None, :, :] + sign * pauli_dot) / 2
        conditional = np.einsum("abAc,ncb->naA", rho_t, projectors)
        conditional = (conditional + qcore.dagger(conditional)) / 2
        p = np.einsum("naa->n", conditional).real
        lam = np.linalg.eigvalsh(conditional)
        with np.errstate(divide="ignore", invalid="ignore"):
            safe = np.where(p[:, None] > PROBABILITY_FLOOR, lam / p[:, None], 0.0)
            safe = np.clip(safe.real, 0.0, None)
            logs = np.where(safe > qcore.ENTROPY_EIGENVALUE_FLOOR, np.log2(
                np.where(safe > qcore.ENTROPY_EIGENVALUE_FLOOR, safe, 1.0)
            ), 0.0)
        entropy = -(safe * logs).sum(axis=1)
        result += np.where(p > PROBABILITY_FLOOR, p * entropy, 0.0)
    return result.reshape(len(thetas), len(phis))


def classical_correlation(
    state: BipartiteState, search: MeasurementSearchConfig | None = None
) -> tuple:
    """Maximum of S(A) - S(A | measure B) over rank-1 projective measurements.

    Returns ``(J, measurement)``.  Qubit B gets the full Bloch grid plus
    refinement; larger B requires ``allow_coarse`` and yields a flagged
    lower bound.
    """
    search = search or MeasurementSearchConfig()
    entropy_a = qcore.von_neumann_entropy(state.marginal_a())

    if state.dim_b == 2:
        thetas = np.linspace(0.0, np.pi, search.n_theta)
        phis = np.linspace(0.0, 2 * np.pi, search.n_phi, endpoint=False)
        grid = _conditional_entropy_grid(state, thetas, phis)
        flat_best = int(np.argmin(grid))
        ti, pi = divmod(flat_best, len(phis))
        theta, phi = float(thetas[ti]), float(phis[pi])
        best = float(grid[ti, pi])

        step_t = float(np.pi / max(search.n_theta - 1, 1))
        step_p = float(2 * np.pi / max(search.n_phi, 1))
        steps = [step_t, step_p]
        point = [theta, phi]
        for _ in range(search.refine_iterations):
            improved = False
            for axis in (0, 1):
                for delta in (steps[axis], -steps[axis]):
                    trial = point.copy()
                    trial[axis] += delta
                    value = conditional_entropy(
                        state, _bloch_projectors(trial[0], trial[1])
                    )
                    if value < best - 1e-15:
                        best, point = value, trial
                        improved = True
            if not improved:
                steps = [s / 2 for s in steps]
        measurement = OptimalMeasurement(
            kind="bloch",
            theta=point[0],
            phi=point[1],
            projectors=_bloch_projectors(point[0], point[1]),
        )
        return max(entropy_a - best, 0.0), measurement

    if not search.allow_coarse:
        raise UnsupportedDimensionError(
            f"full measurement search needs dim B = 2 (got {state.dim_b}); "
            "set allow_coarse=True for a flagged lower bound"
        )
    rng = np.random.default_rng(search.coarse_seed)
    best, best_projectors = np.inf, None
    for _ in range(search.coarse_samples):
        g = rng.standard_normal((state.dim_b, state.dim_b)) + 1j * rng.standard_normal(
            (state.dim_b, state.dim_b)
        )
        q, r = np.linalg.qr(g)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        projectors = tuple(
            np.outer(q[:, j], q[:, j].conj()) for j in range(state.dim_b)
        )
        value = conditional_entropy(state, projectors)
        if value < best:
            best, best_projectors = value, projectors
    measurement = OptimalMeasurement(
        kind="basis", theta=None, phi=None, projectors=best_projectors, lower_bound=True
    )
    return max(entropy_a - best, 0.0), measurement


def discord(
    state: BipartiteState, search: MeasurementSearchConfig | None = None
) -> CorrelationReport:
    """Mutual information minus the best classically extractable correlation.

    The integrated-information field carries the proof-identification
    value, which is the same difference by construction.
    """
    info = mutual_information(state)
    j, measurement = classical_correlation(state, search)
    delta = info - j
    return CorrelationReport(
        mutual_info=info,
        classical_J=j,
        discord=delta,
        integrated_phi=info - j,
        optimizer_measurement=measurement,
    )


def _pairing_information(state: BipartiteState, factors_a, factors_b, pairing) -> float:
    dims = list(factors_a) + list(factors_b)
    n_a = len(factors_a)
    total = 0.0
    for i, j in enumerate(pairing):
        keep = [i, n_a + j]
        marginal = qcore.partial_trace_multi(state.rho.matrix, dims, keep)
        marginal = (marginal + qcore.dagger(marginal)) / 2
        pair_state = BipartiteState(
            factors_a[i], factors_b[j], qcore.DensityOperator(marginal, trace_atol=1e-8)
        )
        total += mutual_information(pair_state)
    return total


def integrated_information(
    state: BipartiteState,
    search: MeasurementSearchConfig | None = None,
    mode: str = "proof-identification",
    factors_a=None,
    factors_b=None,
) -> float:
    """Joint information not reducible to independent subsystem pairs.

    ``proof-identification`` identifies the best partition sum with the
    classical correlation and returns I - J.  ``partition-search``
    enumerates pairings of declared tensor factors of A and B and returns
    I minus the best pairing sum; factorizations are never invented, so
    undeclared (e.g. prime-dimension) systems raise ``NoPartitionError``.
    """
    if mode == "proof-identification":
        j, _ = classical_correlation(state, search)
        return mutual_information(state) - j
    if mode != "partition-search":
        raise ValidationError(f"unknown mode {mode!r}")
    if not factors_a or not factors_b:
        raise NoPartitionError(
            "partition-search requires declared tensor factors for both sides"
        )
    factors_a = [int(d) for d in factors_a]
    factors_b = [int(d) for d in factors_b]
    if int(np.prod(factors_a)) != state.dim_a or int(np.prod(factors_b)) != state.dim_b:
        raise NoPartitionError(
            f"declared factors {factors_a} x {factors_b} do not multiply to "
            f"{state.dim_a} x {state.dim_b}"
        )
    if len(factors_a) != len(factors_b):
        raise NoPartitionError("need equally many factors on both sides to pair them")
    info = mutual_information(state)
    best = -np.inf
    for pairing in itertools.permutations(range(len(factors_b))):
        best = max(best, _pairing_information(state, factors_a, factors_b, pairing))
    return info - best

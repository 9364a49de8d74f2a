"""Minimum-rate semantic alignment: encoding, decoding, converse, diffusion.

The protocol resolves a locally consistent disagreement cochain with
exactly as many transmitted symbols as the obstruction dimension: the
coefficients of the cochain's class in an orthonormal obstruction basis
are sent, the receiver reconstructs the representative and solves the
coboundary equation for the remaining (exact) part by least squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qcore
from .errors import (
    AlignmentFailureError,
    DivergenceError,
    NoWitnessError,
    UndefinedCapacityError,
    ValidationError,
)
from .sheaf import (
    Cochain0,
    Cochain1,
    CohomologyReport,
    QuantumSemanticSheaf,
    build_coboundary,
    cohomology,
    sheaf_laplacian,
)

BASIS_ORTHONORMAL_ATOL = 1e-9
DECODE_SUCCESS_ATOL = 1e-7
DECODE_FAILURE_ATOL = 1e-6
LSTSQ_RCOND = 1e-9


@dataclass(eq=False)
class AlignmentTranscript:
    """Record of one protocol run; symbols_sent equals the obstruction dimension."""

    coefficients: np.ndarray
    reconstructed_cocycle: Cochain1
    section: Cochain0
    residual: float
    symbols_sent: int
    rate_bits: float
    success: bool


@dataclass(eq=False)
class ConverseWitness:
    """Two cocycles in distinct obstruction classes with identical codewords."""

    cocycle_a: Cochain1
    cocycle_b: Cochain1
    encoder_rank: int
    codeword_gap: float
    class_distance: float


def cocycle_basis(report: CohomologyReport) -> list:
    """Orthonormal obstruction-class representatives from a cohomology report."""
    return list(report.cocycle_basis)


def _stack_basis(sheaf: QuantumSemanticSheaf, basis) -> np.ndarray:
    if not basis:
        return np.zeros((sheaf.dim_c1, 0), dtype=np.complex128)
    return np.column_stack([sheaf.vec1(b) for b in basis])


def _check_orthonormal(b: np.ndarray, atol: float = BASIS_ORTHONORMAL_ATOL) -> None:
    k = b.shape[1]
    if k == 0:
        return
    gram = qcore.dagger(b) @ b
    deviation = float(np.max(np.abs(gram - np.eye(k))))
    if deviation > atol:
        raise ValidationError(f"basis is not orthonormal (Gram deviation {deviation:.3e})")


def encode(
    omega: Cochain1,
    basis,
    sheaf: QuantumSemanticSheaf,
    d0: np.ndarray | None = None,
) -> np.ndarray:
    """Class coefficients of ``omega`` in the orthonormal obstruction basis.

    Coboundary components project to zero, so encoding is constant on
    obstruction classes.  When ``d0`` is supplied, the basis is also
    checked to be orthogonal to its column space.
    """
    b = _stack_basis(sheaf, basis)
    _check_orthonormal(b)
    if d0 is not None and b.shape[1]:
        overlap = float(np.max(np.abs(qcore.dagger(d0) @ b)))
        scale = max(1.0, float(np.max(np.abs(d0))))
        if overlap > 1e-8 * scale:
            raise ValidationError(
                f"basis is not orthogonal to the coboundary image (overlap {overlap:.3e})"
            )
    return qcore.dagger(b) @ sheaf.vec1(omega)


def decode(
    coefficients,
    basis,
    omega: Cochain1,
    sheaf: QuantumSemanticSheaf,
    d0: np.ndarray | None = None,
) -> tuple:
    """Reconstruct the class representative and solve for an aligning section.

    Solves ``delta0 sigma = omega - omega_tilde`` by least squares and
    returns ``(section, residual)``.  A residual above 1e-6 signals wrong
    or truncated coefficients and raises ``AlignmentFailureError``.
    """
    coefficients = np.asarray(coefficients, dtype=np.complex128).reshape(-1)
    if coefficients.size > len(basis):
        raise ValidationError(
            f"{coefficients.size} coefficients for a basis of size {len(basis)}"
        )
    b = _stack_basis(sheaf, basis)
    _check_orthonormal(b)
    if d0 is None:
        d0 = build_coboundary(sheaf)
    reconstructed = (
        b[:, : coefficients.size] @ coefficients
        if coefficients.size
        else np.zeros(sheaf.dim_c1, dtype=np.complex128)
    )
    target = sheaf.vec1(omega) - reconstructed
    solution, _, _, _ = np.linalg.lstsq(d0, target, rcond=LSTSQ_RCOND)
    residual = float(np.linalg.norm(d0 @ solution - target))
    if residual > DECODE_FAILURE_ATOL:
        raise AlignmentFailureError(
            f"alignment residual {residual:.3e} exceeds {DECODE_FAILURE_ATOL:g}; "
            "coefficients are wrong or truncated"
        )
    return sheaf.unvec0(solution), residual


def align_protocol(
    sheaf: QuantumSemanticSheaf,
    omega: Cochain1,
    rank_rtol: float = qcore.RANK_RTOL,
) -> AlignmentTranscript:
    """Full protocol run: obstruction basis, encode, transmit, decode.

    Transmits exactly dim H1 complex symbols; the bit counter reports
    log2 of that count (0 when nothing needs to be sent).
    """
    report = cohomology(sheaf, rank_rtol=rank_rtol)
    basis = cocycle_basis(report)
    d0 = build_coboundary(sheaf)
    coefficients = encode(omega, basis, sheaf, d0)
    section, residual = decode(coefficients, basis, omega, sheaf, d0)
    reconstructed = sheaf.unvec1(
        _stack_basis(sheaf, basis) @ coefficients
        if basis
        else np.zeros(sheaf.dim_c1, dtype=np.complex128)
    )
    symbols = report.dim_H1
    return AlignmentTranscript(
        coefficients=coefficients,
        reconstructed_cocycle=reconstructed,
        section=section,
        residual=residual,
        symbols_sent=symbols,
        rate_bits=float(np.log2(max(symbols, 1))),
        success=residual <= DECODE_SUCCESS_ATOL,
    )


def converse_witness(
    sheaf: QuantumSemanticSheaf,
    encoder,
    rank_rtol: float = qcore.RANK_RTOL,
) -> ConverseWitness:
    """Exhibit two cocycles one class apart that the encoder cannot separate.

    The witness is built from a unit kernel vector of the encoder's
    induced action on obstruction classes; it exists whenever that action
    is not injective, in particular whenever the codeword dimension is
    below dim H1.
    """
    encoder = np.asarray(encoder, dtype=np.complex128)
    report = cohomology(sheaf, rank_rtol=rank_rtol)
    k = report.dim_H1
    if encoder.ndim != 2 or encoder.shape[1] != sheaf.dim_c1:
        raise ValidationError(
            f"encoder must map vectorized C1 (dim {sheaf.dim_c1}); got shape {encoder.shape}"
        )
    if k == 0:
        raise NoWitnessError("obstruction space is trivial; every encoder aligns")
    b = _stack_basis(sheaf, report.cocycle_basis)
    induced = encoder @ b
    null = qcore.kernel_basis(induced, rtol=rank_rtol)
    if null.shape[1] == 0:
        raise NoWitnessError(
            "encoder is injective on obstruction classes; no witness exists"
        )
    c = null[:, 0]
    c = c / np.linalg.norm(c)
    vec_a = b @ c
    cocycle_a = sheaf.unvec1(vec_a)
    cocycle_b = sheaf.unvec1(np.zeros(sheaf.dim_c1, dtype=np.complex128))
    gap = float(np.linalg.norm(encoder @ vec_a))
    class_distance = float(np.linalg.norm(qcore.dagger(b) @ vec_a))
    return ConverseWitness(
        cocycle_a=cocycle_a,
        cocycle_b=cocycle_b,
        encoder_rank=qcore.matrix_rank(encoder, rtol=rank_rtol),
        codeword_gap=gap,
        class_distance=class_distance,
    )


def semantic_rate(report: CohomologyReport) -> tuple:
    """(symbols, bits) needed for alignment: dim H1 symbols, log2 of that in bits.

    The two counters use different units (transmitted complex symbols vs
    the bit logarithm of the class count), so both are reported and no
    reconciliation is attempted.
    """
    symbols = report.dim_H1
    return symbols, float(np.log2(max(symbols, 1)))


def semantic_capacity(channel_capacity_bits: float, report: CohomologyReport) -> float:
    """Semantic messages per channel use: capacity divided by log2 dim H1."""
    if channel_capacity_bits < 0:
        raise ValidationError("channel capacity must be nonnegative")
    if report.dim_H1 <= 1:
        raise UndefinedCapacityError(
            f"semantic capacity undefined for dim H1 = {report.dim_H1}"
        )
    return float(channel_capacity_bits / np.log2(report.dim_H1))


def diffuse(
    sheaf: QuantumSemanticSheaf,
    initial: Cochain0,
    step_size: float,
    steps: int,
) -> list:
    """Explicit-Euler Laplacian flow; returns (step, disagreement norm) pairs.

    The disagreement norm is the Hilbert-Schmidt norm of the coboundary of
    the configuration.  A norm blowing up 1000x past the starting value
    raises ``DivergenceError`` (step size outside the stability range).
    """
    if step_size <= 0:
        raise ValidationError(f"step size must be positive, got {step_size}")
    if steps < 0:
        raise ValidationError(f"steps must be nonnegative, got {steps}")
    d0 = build_coboundary(sheaf)
    lap = sheaf_laplacian(d0)
    x = sheaf.vec0(initial)
    r0 = float(np.linalg.norm(d0 @ x))
    blowup = 1e3 * max(r0, 1e-12 * (1.0 + float(np.linalg.norm(x))))
    trajectory = [(0, r0)]
    for t in range(1, steps + 1):
        x = x - step_size * (lap @ x)
        r = float(np.linalg.norm(d0 @ x))
        if not np.isfinite(r) or r > blowup:
            raise DivergenceError(
                f"disagreement norm {r:.3e} at step {t} exceeds 1000x the start; "
                f"step size {step_size} is outside the stability range"
            )
        trajectory.append((t, r))
    return trajectory

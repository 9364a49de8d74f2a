"""Dense complex linear algebra and quantum-information primitives.

Conventions used throughout the package:

* Operators are numpy ``complex128`` matrices.  An operator on a
  d-dimensional space vectorizes to a length d*d vector in row-major
  order, so the Hilbert-Schmidt inner product ``Tr(A^dag B)`` equals the
  ordinary conjugating dot product of the vectorized operators.
* Under row-major vectorization, ``vec(A X B) = (A kron B^T) vec(X)``;
  a Kraus map ``X -> sum_k K X K^dag`` therefore has the superoperator
  ``sum_k K kron conj(K)``.
* Entropies and ebit counts are base-2 logarithms.
* Eigenvalues below ``ENTROPY_EIGENVALUE_FLOOR`` are treated as exact
  zeros inside entropy sums (the 0 log 0 = 0 convention).
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .errors import DimensionError, ValidationError

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-10
PSD_EIGENVALUE_FLOOR = -1e-10
UNIT_NORM_ATOL = 1e-10
TRACE_PRESERVATION_ATOL = 1e-9
CHOI_EIGENVALUE_FLOOR = -1e-9
RANK_RTOL = 1e-9
ENTROPY_EIGENVALUE_FLOOR = 1e-12


def as_complex_matrix(entries, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite complex128 2-d array, copying the input."""
    arr = np.array(entries, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr.view(np.float64))):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def vec(m: np.ndarray) -> np.ndarray:
    """Row-major vectorization of an operator."""
    return np.asarray(m).reshape(-1)


def unvec(v: np.ndarray, rows: int, cols: int | None = None) -> np.ndarray:
    """Inverse of :func:`vec`."""
    cols = rows if cols is None else cols
    v = np.asarray(v)
    if v.size != rows * cols:
        raise DimensionError(f"cannot reshape length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dag b), conjugate-linear in a."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(eq=False)
class DensityOperator:
    """Agent semantic state: Hermitian, positive semi-definite, unit trace.

    Instances are immutable after construction; the matrix is stored
    read-only and safe to share across threads.
    """

    matrix: np.ndarray
    trace_atol: InitVar[float] = TRACE_ATOL

    def __post_init__(self, trace_atol: float) -> None:
        m = as_complex_matrix(self.matrix, "density matrix")
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        herm = float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0
        if herm > HERMITIAN_ATOL:
            raise ValidationError(f"not Hermitian: max |M - M^dag| = {herm:.3e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > trace_atol:
            raise ValidationError(f"trace {tr:.12g} is not 1 within {trace_atol:g}")
        lowest = float(np.min(np.linalg.eigvalsh((m + dagger(m)) / 2)))
        if lowest < PSD_EIGENVALUE_FLOOR:
            raise ValidationError(f"negative eigenvalue {lowest:.3e} below floor")
        self.matrix = _readonly(m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, amplitudes) -> "DensityOperator":
        v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > UNIT_NORM_ATOL:
            raise ValidationError(f"pure-state vector norm {norm:.12g} is not 1")
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim, dtype=np.complex128) / dim)


@dataclass(eq=False)
class PureState:
    """Bipartite pure state given by a unit-norm amplitude vector."""

    dim_a: int
    dim_b: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if self.dim_a < 1 or self.dim_b < 1:
            raise DimensionError("subsystem dimensions must be >= 1")
        v = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if v.size != self.dim_a * self.dim_b:
            raise DimensionError(
                f"amplitude length {v.size} != {self.dim_a} * {self.dim_b}"
            )
        if not np.all(np.isfinite(v.view(np.float64))):
            raise ValidationError("amplitudes contain non-finite entries")
        norm = np.linalg.norm(v)
        if abs(norm - 1.0) > UNIT_NORM_ATOL:
            raise ValidationError(f"amplitude norm {norm:.12g} is not 1")
        self.amplitudes = _readonly(v)

    def amplitude_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to dim_a x dim_b (row index on A)."""
        return self.amplitudes.reshape(self.dim_a, self.dim_b)


@dataclass(eq=False)
class SchmidtDecomposition:
    coefficients: np.ndarray
    rank: int


def schmidt_decompose(psi: PureState, tol: float = RANK_RTOL) -> SchmidtDecomposition:
    """Schmidt coefficients (descending singular values) and rank of a pure state.

    Rank counts coefficients above ``tol`` times the largest one.
    """
    a = psi.amplitude_matrix()
    if hs_norm(a) == 0.0:
        raise ValidationError("cannot decompose the zero vector")
    s = np.linalg.svd(a, compute_uv=False)
    rank = int(np.count_nonzero(s > tol * s[0]))
    return SchmidtDecomposition(coefficients=_readonly(s.copy()), rank=rank)


@dataclass(eq=False)
class QuantumChannel:
    """A map in Kraus form: X -> sum_k K_k X K_k^dag.

    Construction checks shapes only; trace preservation and complete
    positivity are certified by :func:`validate_channel` (sheaf assembly
    rejects channels that fail it).
    """

    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ops = tuple(as_complex_matrix(k, "Kraus operator") for k in self.kraus_ops)
        if not ops:
            raise ValidationError("channel needs at least one Kraus operator")
        shape = ops[0].shape
        for k in ops[1:]:
            if k.shape != shape:
                raise DimensionError(f"Kraus shapes differ: {k.shape} vs {shape}")
        self.kraus_ops = tuple(_readonly(k) for k in ops)

    @property
    def dim_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus_ops[0].shape[0]

    @classmethod
    def identity(cls, dim: int) -> "QuantumChannel":
        return cls((np.eye(dim, dtype=np.complex128),))

    @classmethod
    def from_unitary(cls, u) -> "QuantumChannel":
        u = as_complex_matrix(u, "unitary")
        if u.shape[0] != u.shape[1]:
            raise DimensionError("unitary must be square")
        residual = float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))))
        if residual > TRACE_PRESERVATION_ATOL:
            raise ValidationError(f"matrix is not unitary: |U^dag U - I| = {residual:.3e}")
        return cls((u,))

    @classmethod
    def depolarizing(cls, dim: int, p: float) -> "QuantumChannel":
        """X -> (1-p) X + p Tr(X) I/dim, via the Weyl (shift/clock) Kraus set.

        The qubit case uses the exact Pauli set so the superoperator
        entries stay free of root-of-unity rounding dust.
        """
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"depolarizing strength must be in [0, 1], got {p}")
        if dim == 2:
            paulis = (
                np.array([[0, 1], [1, 0]], dtype=np.complex128),
                np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
                np.array([[1, 0], [0, -1]], dtype=np.complex128),
            )
            ops = [np.sqrt(1.0 - 3.0 * p / 4.0) * np.eye(2, dtype=np.complex128)]
            ops += [(np.sqrt(p) / 2.0) * sigma for sigma in paulis]
            return cls(tuple(ops))
        ops = []
        for a in range(dim):
            for b in range(dim):
                w = weyl_matrix(dim, a, b)
                if a == 0 and b == 0:
                    coeff = np.sqrt(1.0 - p + p / dim**2)
                else:
                    coeff = np.sqrt(p) / dim
                ops.append(coeff * w)
        return cls(tuple(ops))


def shift_matrix(dim: int) -> np.ndarray:
    m = np.zeros((dim, dim), dtype=np.complex128)
    for j in range(dim):
        m[(j + 1) % dim, j] = 1.0
    return m


def clock_matrix(dim: int) -> np.ndarray:
    omega = np.exp(2j * np.pi / dim)
    return np.diag(omega ** np.arange(dim)).astype(np.complex128)


def weyl_matrix(dim: int, a: int, b: int) -> np.ndarray:
    return np.linalg.matrix_power(shift_matrix(dim), a) @ np.linalg.matrix_power(
        clock_matrix(dim), b
    )


def channel_superoperator(ch: QuantumChannel) -> np.ndarray:
    """Matrix acting on row-major vectorized operators: sum_k K kron conj(K)."""
    return sum(np.kron(k, k.conj()) for k in ch.kraus_ops)


def choi_matrix(ch: QuantumChannel) -> np.ndarray:
    """Choi matrix sum_ij E_ij kron Ch(E_ij); PSD certifies complete positivity."""
    d_in, d_out = ch.dim_in, ch.dim_out
    c = np.zeros((d_in * d_out, d_in * d_out), dtype=np.complex128)
    for k in ch.kraus_ops:
        w = k.flatten(order="F")
        c += np.outer(w, w.conj())
    return c


@dataclass(eq=False)
class ChannelValidationReport:
    tp_residual: float
    min_choi_eigenvalue: float
    accepted: bool


def validate_channel(
    ch: QuantumChannel,
    tp_atol: float = TRACE_PRESERVATION_ATOL,
    choi_floor: float = CHOI_EIGENVALUE_FLOOR,
) -> ChannelValidationReport:
    """Report trace-preservation residual and minimum Choi eigenvalue.

    The channel is accepted iff ``max|sum K^dag K - I| <= tp_atol`` and the
    smallest Choi eigenvalue is >= ``choi_floor``.
    """
    completeness = sum(dagger(k) @ k for k in ch.kraus_ops)
    tp_residual = float(np.max(np.abs(completeness - np.eye(ch.dim_in))))
    choi = choi_matrix(ch)
    min_eig = float(np.min(np.linalg.eigvalsh((choi + dagger(choi)) / 2)))
    accepted = tp_residual <= tp_atol and min_eig >= choi_floor
    return ChannelValidationReport(tp_residual, min_eig, accepted)


def apply_channel_matrix(ch: QuantumChannel, m) -> np.ndarray:
    """Apply the Kraus map to an arbitrary operator (no density validation)."""
    m = as_complex_matrix(m, "operator")
    if m.shape != (ch.dim_in, ch.dim_in):
        raise DimensionError(
            f"operator shape {m.shape} does not match channel input dim {ch.dim_in}"
        )
    out = np.zeros((ch.dim_out, ch.dim_out), dtype=np.complex128)
    for k in ch.kraus_ops:
        out += k @ m @ dagger(k)
    return out


def apply_channel(ch: QuantumChannel, rho: DensityOperator) -> DensityOperator:
    """Send a density operator through the channel.

    Output trace is preserved within the channel acceptance tolerance, so
    the result is validated with the looser 1e-9 trace tolerance.
    """
    if rho.dim != ch.dim_in:
        raise DimensionError(f"state dim {rho.dim} != channel input dim {ch.dim_in}")
    out = apply_channel_matrix(ch, rho.matrix)
    return DensityOperator((out + dagger(out)) / 2, trace_atol=TRACE_PRESERVATION_ATOL)


def partial_trace(
    rho: DensityOperator, dim_a: int, dim_b: int, keep: str
) -> DensityOperator:
    """Trace out one factor of a bipartite state; ``keep`` is ``"A"`` or ``"B"``."""
    if rho.dim != dim_a * dim_b:
        raise DimensionError(f"dim {rho.dim} does not factor as {dim_a} * {dim_b}")
    t = rho.matrix.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "A":
        reduced = np.einsum("ibjb->ij", t)
    elif keep == "B":
        reduced = np.einsum("aiaj->ij", t)
    else:
        raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")
    return DensityOperator(reduced)


def partial_trace_multi(matrix, dims, keep) -> np.ndarray:
    """Partial trace over a multi-factor space, keeping factors in the given order.

    ``dims`` lists all tensor factor dimensions; ``keep`` lists the factor
    positions to retain.  Returns a raw matrix (callers wrap as needed).
    """
    m = as_complex_matrix(matrix, "operator")
    dims = list(dims)
    n = len(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionError(f"shape {m.shape} does not match factor dims {dims}")
    keep = list(keep)
    if len(set(keep)) != len(keep) or any(not 0 <= k < n for k in keep):
        raise ValidationError(f"invalid keep positions {keep} for {n} factors")
    t = m.reshape(dims + dims)
    row_subs = list(range(n))
    col_subs = [i if i not in keep else n + i for i in range(n)]
    out_subs = keep + [n + i for i in keep]
    reduced = np.einsum(t, row_subs + col_subs, out_subs)
    kept_dim = int(np.prod([dims[i] for i in keep])) if keep else 1
    return reduced.reshape(kept_dim, kept_dim)


def von_neumann_entropy(rho) -> float:
    """Base-2 von Neumann entropy; eigenvalues below the floor count as zero."""
    m = rho.matrix if isinstance(rho, DensityOperator) else as_complex_matrix(rho)
    evals = np.linalg.eigvalsh((m + dagger(m)) / 2)
    if evals.size and float(evals[0]) < PSD_EIGENVALUE_FLOOR:
        raise ValidationError(f"state has eigenvalue {evals[0]:.3e} below PSD floor")
    lam = evals[evals > ENTROPY_EIGENVALUE_FLOOR]
    s = float(-(lam * np.log2(lam)).sum()) if lam.size else 0.0
    return max(s, 0.0)


def matrix_rank(m, rtol: float = RANK_RTOL) -> int:
    """Numerical rank: singular values above ``rtol`` times the largest."""
    m = np.asarray(m, dtype=np.complex128)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def kernel_basis(m, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal columns spanning the right null space of ``m``."""
    m = np.asarray(m, dtype=np.complex128)
    n = m.shape[1]
    if m.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=np.complex128)
    _, s, vh = np.linalg.svd(m, full_matrices=True)
    rank = 0 if (s.size == 0 or s[0] == 0.0) else int(np.count_nonzero(s > rtol * s[0]))
    return dagger(vh[rank:, :]) if rank < n else np.zeros((n, 0), dtype=np.complex128)


def image_basis(m, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal columns spanning the column space of ``m``."""
    m = np.asarray(m, dtype=np.complex128)
    if m.shape[0] == 0 or m.shape[1] == 0:
        return np.zeros((m.shape[0], 0), dtype=np.complex128)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    rank = 0 if (s.size == 0 or s[0] == 0.0) else int(np.count_nonzero(s > rtol * s[0]))
    return u[:, :rank]

"""Quantum semantic sheaves over graphs and their cohomology.

A sheaf attaches an operator space L(H_v) to each vertex and a CPTP
channel to each directed edge e = (u, v).  The degree-0 coboundary sends
a vertex assignment ``sigma`` to the per-edge disagreements
``F_e(sigma_u) - sigma_v``; its kernel is the space of globally aligned
configurations, and the quotient of edge cocycles by coboundaries counts
the irreducible obstructions to alignment.

Everything here works on the row-major vectorized operator spaces from
:mod:`qsheaf.qcore`: C0 stacks the d_v^2 vertex blocks in vertex order,
C1 stacks the d_target^2 edge blocks in edge order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import qcore
from .errors import (
    DimensionError,
    MalformedCellError,
    MissingStateError,
    UnsupportedCellError,
    ValidationError,
)

RANK_RTOL = qcore.RANK_RTOL
LOCAL_SECTION_ATOL = 1e-8
UNITARY_ATOL = 1e-9

# density-feasible kernel search defaults
FEASIBLE_RESTARTS = 64
FEASIBLE_ITERATIONS = 200


@dataclass(eq=False)
class SemanticGraph:
    """Directed multigraph of agents: vertices carry stalk dimensions.

    ``vertices`` is a sequence of (vertex id, stalk dimension) pairs and
    ``edges`` a sequence of (edge id, source id, target id) triples.
    Order fixes the block layout of all vectorized cochains.
    """

    vertices: tuple
    edges: tuple

    def __post_init__(self) -> None:
        self.vertices = tuple((str(v), int(d)) for v, d in self.vertices)
        self.edges = tuple((str(e), str(u), str(v)) for e, u, v in self.edges)
        seen = set()
        for v, d in self.vertices:
            if v in seen:
                raise ValidationError(f"duplicate vertex id {v!r}")
            seen.add(v)
            if d < 1:
                raise ValidationError(f"vertex {v!r} has stalk dimension {d} < 1")
        self._stalk = dict(self.vertices)
        eseen = set()
        for e, u, v in self.edges:
            if e in eseen:
                raise ValidationError(f"duplicate edge id {e!r}")
            eseen.add(e)
            for endpoint in (u, v):
                if endpoint not in self._stalk:
                    raise ValidationError(f"edge {e!r} references unknown vertex {endpoint!r}")
        self._endpoints = {e: (u, v) for e, u, v in self.edges}

    @property
    def vertex_ids(self) -> tuple:
        return tuple(v for v, _ in self.vertices)

    @property
    def edge_ids(self) -> tuple:
        return tuple(e for e, _, _ in self.edges)

    def stalk_dim(self, vertex_id: str) -> int:
        return self._stalk[vertex_id]

    def endpoints(self, edge_id: str) -> tuple:
        return self._endpoints[edge_id]

    def connected_components(self) -> list:
        """Components of the underlying undirected graph, as vertex-id lists."""
        adjacency: dict = {v: set() for v in self.vertex_ids}
        for _, u, v in self.edges:
            adjacency[u].add(v)
            adjacency[v].add(u)
        components, assigned = [], set()
        for root in self.vertex_ids:
            if root in assigned:
                continue
            stack, comp = [root], []
            assigned.add(root)
            while stack:
                node = stack.pop()
                comp.append(node)
                for nxt in sorted(adjacency[node]):
                    if nxt not in assigned:
                        assigned.add(nxt)
                        stack.append(nxt)
            components.append(comp)
        return components


@dataclass(eq=False)
class Cochain0:
    """Vertex assignment: one square operator per vertex (d_v x d_v)."""

    blocks: dict

    def __post_init__(self) -> None:
        self.blocks = {
            str(v): qcore.as_complex_matrix(m, f"vertex block {v!r}")
            for v, m in self.blocks.items()
        }


@dataclass(eq=False)
class Cochain1:
    """Edge assignment: one square operator per edge (d_target x d_target)."""

    blocks: dict

    def __post_init__(self) -> None:
        self.blocks = {
            str(e): qcore.as_complex_matrix(m, f"edge block {e!r}")
            for e, m in self.blocks.items()
        }


@dataclass(eq=False)
class QuantumSemanticSheaf:
    """Graph plus per-edge channels and optional per-vertex states.

    Every channel must map the source stalk to the target stalk and pass
    :func:`qsheaf.qcore.validate_channel`.  Instances are immutable after
    construction and safe for concurrent reads.
    """

    graph: SemanticGraph
    channels: Mapping
    states: Mapping | None = None

    def __post_init__(self) -> None:
        channels = dict(self.channels)
        for e, u, v in self.graph.edges:
            ch = channels.get(e)
            if ch is None:
                raise ValidationError(f"edge {e!r} has no channel")
            du, dv = self.graph.stalk_dim(u), self.graph.stalk_dim(v)
            if ch.dim_in != du or ch.dim_out != dv:
                raise DimensionError(
                    f"edge {e!r}: channel is {ch.dim_in}->{ch.dim_out}, "
                    f"stalks are {du}->{dv}"
                )
            report = qcore.validate_channel(ch)
            if not report.accepted:
                raise ValidationError(
                    f"edge {e!r}: channel rejected "
                    f"(tp residual {report.tp_residual:.3e}, "
                    f"min Choi eigenvalue {report.min_choi_eigenvalue:.3e})"
                )
        extra = set(channels) - set(self.graph.edge_ids)
        if extra:
            raise ValidationError(f"channels for unknown edges: {sorted(extra)}")
        self.channels = channels
        if self.states is not None:
            states = dict(self.states)
            for v, rho in states.items():
                if v not in self.graph.vertex_ids:
                    raise ValidationError(f"state for unknown vertex {v!r}")
                if rho.dim != self.graph.stalk_dim(v):
                    raise DimensionError(
                        f"vertex {v!r}: state dim {rho.dim} != stalk {self.graph.stalk_dim(v)}"
                    )
            self.states = states
        self._vertex_offsets = {}
        pos = 0
        for v, d in self.graph.vertices:
            self._vertex_offsets[v] = pos
            pos += d * d
        self._dim_c0 = pos
        self._edge_offsets = {}
        pos = 0
        for e, _, v in self.graph.edges:
            self._edge_offsets[e] = pos
            pos += self.graph.stalk_dim(v) ** 2
        self._dim_c1 = pos

    @property
    def dim_c0(self) -> int:
        return self._dim_c0

    @property
    def dim_c1(self) -> int:
        return self._dim_c1

    def vertex_offset(self, vertex_id: str) -> int:
        return self._vertex_offsets[vertex_id]

    def edge_offset(self, edge_id: str) -> int:
        return self._edge_offsets[edge_id]

    def vec0(self, cochain: Cochain0) -> np.ndarray:
        out = np.zeros(self._dim_c0, dtype=np.complex128)
        for v, d in self.graph.vertices:
            block = cochain.blocks.get(v)
            if block is None:
                raise MissingStateError(f"cochain has no block for vertex {v!r}")
            if block.shape != (d, d):
                raise DimensionError(f"vertex {v!r}: block {block.shape}, stalk dim {d}")
            off = self._vertex_offsets[v]
            out[off : off + d * d] = qcore.vec(block)
        return out

    def unvec0(self, vector: np.ndarray) -> Cochain0:
        vector = np.asarray(vector, dtype=np.complex128).reshape(-1)
        if vector.size != self._dim_c0:
            raise DimensionError(f"vector length {vector.size} != dim C0 {self._dim_c0}")
        blocks = {}
        for v, d in self.graph.vertices:
            off = self._vertex_offsets[v]
            blocks[v] = qcore.unvec(vector[off : off + d * d], d)
        return Cochain0(blocks)

    def vec1(self, cochain: Cochain1) -> np.ndarray:
        out = np.zeros(self._dim_c1, dtype=np.complex128)
        for e, _, v in self.graph.edges:
            block = cochain.blocks.get(e)
            if block is None:
                raise MissingStateError(f"cochain has no block for edge {e!r}")
            d = self.graph.stalk_dim(v)
            if block.shape != (d, d):
                raise DimensionError(f"edge {e!r}: block {block.shape}, target dim {d}")
            off = self._edge_offsets[e]
            out[off : off + d * d] = qcore.vec(block)
        return out

    def unvec1(self, vector: np.ndarray) -> Cochain1:
        vector = np.asarray(vector, dtype=np.complex128).reshape(-1)
        if vector.size != self._dim_c1:
            raise DimensionError(f"vector length {vector.size} != dim C1 {self._dim_c1}")
        blocks = {}
        for e, _, v in self.graph.edges:
            d = self.graph.stalk_dim(v)
            off = self._edge_offsets[e]
            blocks[e] = qcore.unvec(vector[off : off + d * d], d)
        return Cochain1(blocks)


@dataclass(eq=False)
class TwoCell:
    """Closed walk of edges with traversal signs; +1 follows the edge direction.

    The walk starts and ends at ``base``; every edge on it must carry a
    unitary channel so disagreements can be transported around the loop.
    """

    base: str
    steps: tuple

    def __post_init__(self) -> None:
        self.base = str(self.base)
        steps = tuple((str(e), int(s)) for e, s in self.steps)
        if not steps:
            raise MalformedCellError("a 2-cell needs at least one edge")
        for e, s in steps:
            if s not in (1, -1):
                raise MalformedCellError(f"edge {e!r}: orientation sign must be +1 or -1")
        self.steps = steps


@dataclass(eq=False)
class TwoCellComplex:
    cells: tuple

    def __post_init__(self) -> None:
        self.cells = tuple(self.cells)


@dataclass(eq=False)
class CohomologyReport:
    """Dimensions, obstruction basis and spectral gap of one sheaf."""

    dim_C0: int
    dim_C1: int
    rank_delta0: int
    dim_H0: int
    dim_H1: int
    cocycle_basis: tuple
    spectral_gap: float
    mode: str  # "graph" (no 2-cells) or "cells"


def build_coboundary(sheaf: QuantumSemanticSheaf) -> np.ndarray:
    """Degree-0 coboundary as a dense matrix over vectorized operator spaces.

    Block row per edge e = (u, v): the channel superoperator at the source
    column block and minus the identity at the target column block, so that
    devectorizing ``D0 @ vec(sigma)`` gives ``F_e(sigma_u) - sigma_v``.
    """
    d0 = np.zeros((sheaf.dim_c1, sheaf.dim_c0), dtype=np.complex128)
    for e, u, v in sheaf.graph.edges:
        dv = sheaf.graph.stalk_dim(v)
        du = sheaf.graph.stalk_dim(u)
        row = sheaf.edge_offset(e)
        super_op = qcore.channel_superoperator(sheaf.channels[e])
        d0[row : row + dv * dv, sheaf.vertex_offset(u) : sheaf.vertex_offset(u) + du * du] += super_op
        col = sheaf.vertex_offset(v)
        d0[row : row + dv * dv, col : col + dv * dv] -= np.eye(dv * dv)
    return d0


def sheaf_laplacian(d0: np.ndarray) -> np.ndarray:
    """Gram matrix D0^dag D0; Hermitian PSD with kernel equal to ker D0."""
    d0 = np.asarray(d0, dtype=np.complex128)
    return qcore.dagger(d0) @ d0


def spectral_gap(laplacian: np.ndarray, rtol: float = RANK_RTOL) -> float:
    """Smallest eigenvalue strictly above ``rtol`` times the largest; 0 if none."""
    lap = np.asarray(laplacian, dtype=np.complex128)
    if lap.size == 0:
        return 0.0
    herm = float(np.max(np.abs(lap - qcore.dagger(lap))))
    if herm > 1e-8 * max(1.0, float(np.max(np.abs(lap)))):
        raise ValidationError(f"matrix is not Hermitian: residual {herm:.3e}")
    evals = np.linalg.eigvalsh((lap + qcore.dagger(lap)) / 2)
    top = float(evals[-1])
    if top <= 0.0:
        return 0.0
    above = evals[evals > rtol * top]
    return float(above[0]) if above.size else 0.0


def _unitary_superoperator(sheaf: QuantumSemanticSheaf, edge_id: str) -> np.ndarray:
    """Superoperator of a single-Kraus unitary edge channel, or raise."""
    ch = sheaf.channels[edge_id]
    if len(ch.kraus_ops) != 1:
        raise UnsupportedCellError(f"edge {edge_id!r} is not unitary (multiple Kraus terms)")
    k = ch.kraus_ops[0]
    if k.shape[0] != k.shape[1]:
        raise UnsupportedCellError(f"edge {edge_id!r} is not unitary (non-square)")
    residual = float(np.max(np.abs(qcore.dagger(k) @ k - np.eye(k.shape[0]))))
    if residual > UNITARY_ATOL:
        raise UnsupportedCellError(
            f"edge {edge_id!r} is not unitary (|K^dag K - I| = {residual:.3e})"
        )
    return np.kron(k, k.conj())


def build_delta1(sheaf: QuantumSemanticSheaf, cells: TwoCellComplex) -> np.ndarray:
    """Degree-1 coboundary for declared 2-cells.

    Each cell row transports every edge disagreement back to the cell's
    base vertex along the walk (inverting unitary superoperators as
    needed), sums them with the traversal signs, and projects onto the
    fixed subspace of the loop holonomy.  The projection is what makes
    the composite with the degree-0 coboundary vanish when the holonomy
    is nontrivial.
    """
    rows = []
    for cell in cells.cells:
        if cell.base not in sheaf.graph.vertex_ids:
            raise MalformedCellError(f"cell base {cell.base!r} is not a vertex")
        d_base = sheaf.graph.stalk_dim(cell.base)
        block_dim = d_base * d_base
        row = np.zeros((block_dim, sheaf.dim_c1), dtype=np.complex128)
        current = cell.base
        # transport from the base to the current vertex, composed step by step
        walk = np.eye(block_dim, dtype=np.complex128)
        for edge_id, sign in cell.steps:
            if edge_id not in sheaf.graph.edge_ids:
                raise MalformedCellError(f"cell references unknown edge {edge_id!r}")
            u, v = sheaf.graph.endpoints(edge_id)
            super_op = _unitary_superoperator(sheaf, edge_id)
            if sign == 1:
                if u != current:
                    raise MalformedCellError(
                        f"cell walk broken at edge {edge_id!r}: at {current!r}, edge starts at {u!r}"
                    )
                walk = super_op @ walk
                current = v
                transport = qcore.dagger(walk)  # disagreement lives at the new vertex
                coeff = 1.0
            else:
                if v != current:
                    raise MalformedCellError(
                        f"cell walk broken at edge {edge_id!r}: at {current!r}, edge ends at {v!r}"
                    )
                transport = qcore.dagger(walk)  # disagreement lives at the vertex we leave
                walk = qcore.dagger(super_op) @ walk
                current = u
                coeff = -1.0
            off = sheaf.edge_offset(edge_id)
            width = sheaf.graph.stalk_dim(v) ** 2
            if transport.shape != (block_dim, width):
                raise MalformedCellError(
                    f"cell transport shape mismatch on edge {edge_id!r}"
                )
            row[:, off : off + width] += coeff * transport
        if current != cell.base:
            raise MalformedCellError(
                f"cell walk ends at {current!r}, not at base {cell.base!r}"
            )
        holonomy = walk
        fixed = qcore.kernel_basis(holonomy - np.eye(block_dim), rtol=RANK_RTOL)
        projector = fixed @ qcore.dagger(fixed)
        rows.append(projector @ row)
    if not rows:
        return np.zeros((0, sheaf.dim_c1), dtype=np.complex128)
    return np.vstack(rows)


def cohomology(
    sheaf: QuantumSemanticSheaf,
    cells: TwoCellComplex | None = None,
    rank_rtol: float = RANK_RTOL,
) -> CohomologyReport:
    """Cohomology dimensions, an orthonormal obstruction basis, and the gap.

    Without 2-cells the graph is a 1-dimensional complex: every edge
    assignment is a cocycle and ``dim H1 = dim C1 - rank D0``.  With
    cells, cocycles are the kernel of the degree-1 coboundary.  The
    returned basis spans the orthogonal complement of the coboundary
    image inside the cocycle space (unit Hilbert-Schmidt norm each).
    """
    d0 = build_coboundary(sheaf)
    if d0.shape[0]:
        u, s, _ = np.linalg.svd(d0, full_matrices=False)
        rank0 = 0 if (s.size == 0 or s[0] == 0.0) else int(np.count_nonzero(s > rank_rtol * s[0]))
        im_basis = u[:, :rank0]
    else:
        rank0 = 0
        im_basis = np.zeros((0, 0), dtype=np.complex128)
    dim_h0 = sheaf.dim_c0 - rank0

    n1 = sheaf.dim_c1
    if cells is None:
        mode = "graph"
        ker_dim = n1
        p_ker = np.eye(n1, dtype=np.complex128)
    else:
        mode = "cells"
        d1 = build_delta1(sheaf, cells)
        ker = qcore.kernel_basis(d1, rtol=rank_rtol)
        ker_dim = ker.shape[1]
        p_ker = ker @ qcore.dagger(ker)
    dim_h1 = ker_dim - rank0

    if n1:
        p_im = im_basis @ qcore.dagger(im_basis)
        quotient_projector = p_ker - p_im
        _, qs, qvh = np.linalg.svd(quotient_projector)
        keep = qs > 0.5
        basis_vectors = qcore.dagger(qvh[keep, :])
    else:
        basis_vectors = np.zeros((0, 0), dtype=np.complex128)
    basis = tuple(sheaf.unvec1(basis_vectors[:, j]) for j in range(basis_vectors.shape[1]))
    if len(basis) != dim_h1:
        raise ValidationError(
            f"obstruction basis size {len(basis)} disagrees with dim H1 {dim_h1}; "
            "rank tolerance may be ill-suited to this sheaf"
        )
    gap = spectral_gap(sheaf_laplacian(d0), rtol=rank_rtol)
    return CohomologyReport(
        dim_C0=sheaf.dim_c0,
        dim_C1=sheaf.dim_c1,
        rank_delta0=rank0,
        dim_H0=dim_h0,
        dim_H1=dim_h1,
        cocycle_basis=basis,
        spectral_gap=gap,
        mode=mode,
    )


def _hermitian_kernel_directions(sheaf, kernel: np.ndarray) -> np.ndarray:
    """Real-orthonormal Hermitian kernel elements, as complex columns.

    The coboundary kernel is closed under blockwise adjoint, so the
    Hermitian projections of a kernel basis stay in the kernel; they are
    orthonormalized as a real vector space.
    """
    if kernel.shape[1] == 0:
        return kernel
    candidates = []
    for j in range(kernel.shape[1]):
        c0 = sheaf.unvec0(kernel[:, j])
        herm = {v: (b + qcore.dagger(b)) / 2 for v, b in c0.blocks.items()}
        anti = {v: 1j * (b - qcore.dagger(b)) / 2 for v, b in c0.blocks.items()}
        candidates.append(sheaf.vec0(Cochain0(herm)))
        candidates.append(sheaf.vec0(Cochain0(anti)))
    stacked = np.column_stack(candidates)
    real_stack = np.vstack([stacked.real, stacked.imag])
    u, s, _ = np.linalg.svd(real_stack, full_matrices=False)
    rank = 0 if (s.size == 0 or s[0] == 0.0) else int(np.count_nonzero(s > RANK_RTOL * s[0]))
    n = sheaf.dim_c0
    return u[:n, :rank] + 1j * u[n:, :rank]


def _min_eigenvalue_after_normalization(sheaf, components, vector) -> tuple:
    """Trace-normalize per component; return (min eigenvalue, blocks) or (-inf, None)."""
    c0 = sheaf.unvec0(vector)
    blocks = {v: (b + qcore.dagger(b)) / 2 for v, b in c0.blocks.items()}
    normalized = {}
    worst = np.inf
    for comp in components:
        traces = [float(np.trace(blocks[v]).real) for v in comp]
        t = float(np.mean(traces))
        if abs(t) < 1e-9:
            return -np.inf, None
        for v in comp:
            block = blocks[v] / t
            normalized[v] = block
            worst = min(worst, float(np.min(np.linalg.eigvalsh(block))))
    return worst, normalized


def global_sections(
    sheaf: QuantumSemanticSheaf,
    seed: int = 0,
    restarts: int = FEASIBLE_RESTARTS,
    iterations: int = FEASIBLE_ITERATIONS,
    rank_rtol: float = RANK_RTOL,
) -> tuple:
    """Kernel basis of the coboundary plus, if found, a density-valued section.

    The basis spans all globally aligned operator configurations.  The
    second element is a kernel element whose every vertex block is a valid
    density operator, located by maximizing the minimum block eigenvalue
    over the real span of Hermitian kernel directions (trace-normalized
    per connected component) with random restarts; ``None`` when the
    search finds nothing PSD.
    """
    d0 = build_coboundary(sheaf)
    kernel = qcore.kernel_basis(d0, rtol=rank_rtol)
    basis = [sheaf.unvec0(kernel[:, j]) for j in range(kernel.shape[1])]
    if kernel.shape[1] == 0:
        return basis, None

    directions = _hermitian_kernel_directions(sheaf, kernel)
    m = directions.shape[1]
    if m == 0:
        return basis, None
    components = sheaf.graph.connected_components()
    rng = np.random.default_rng(seed)

    def evaluate(coeffs):
        return _min_eigenvalue_after_normalization(sheaf, components, directions @ coeffs)

    # restart 0 starts from the projection of the maximally mixed configuration
    mixed = sheaf.vec0(
        Cochain0({v: np.eye(d) / d for v, d in sheaf.graph.vertices})
    )
    starts = [qcore.dagger(directions) @ mixed]
    for _ in range(max(restarts - 1, 0)):
        starts.append(rng.standard_normal(m) + 0j)

    best_value, best_blocks = -np.inf, None
    for start in starts:
        coeffs = np.asarray(start, dtype=np.complex128).real.astype(np.complex128)
        if np.linalg.norm(coeffs) < 1e-12:
            coeffs = np.ones(m, dtype=np.complex128)
        value, blocks = evaluate(coeffs)
        step = 0.5
        for _ in range(iterations):
            improved = False
            for j in range(m):
                for delta in (step, -step):
                    trial = coeffs.copy()
                    trial[j] += delta
                    tv, tb = evaluate(trial)
                    if tv > value:
                        coeffs, value, blocks = trial, tv, tb
                        improved = True
            if not improved:
                step *= 0.5
                if step < 1e-6:
                    break
        if value > best_value:
            best_value, best_blocks = value, blocks
        if best_value >= 1e-6:
            break

    if best_blocks is None or best_value < qcore.PSD_EIGENVALUE_FLOOR:
        return basis, None
    feasible = Cochain0(best_blocks)
    # confirm the normalized candidate really is a section of density operators
    for v, block in feasible.blocks.items():
        try:
            qcore.DensityOperator(block, trace_atol=1e-8)
        except ValidationError:
            return basis, None
    ok, _ = is_local_section(sheaf, feasible, set(sheaf.graph.vertex_ids))
    if not ok:
        return basis, None
    return basis, feasible


def is_local_section(
    sheaf: QuantumSemanticSheaf,
    config,
    subset,
    tol: float = LOCAL_SECTION_ATOL,
) -> tuple:
    """Check edgewise consistency of a configuration on a vertex subset.

    Returns ``(ok, residuals)`` where residuals maps each induced edge to
    the Hilbert-Schmidt norm of ``F_e(sigma_u) - sigma_v``.
    """
    blocks = config.blocks if isinstance(config, Cochain0) else dict(config)
    subset = {str(v) for v in subset}
    for v in subset:
        if v not in blocks:
            raise MissingStateError(f"no configured operator for vertex {v!r}")
    residuals = {}
    for e, u, v in sheaf.graph.edges:
        if u in subset and v in subset:
            pushed = qcore.apply_channel_matrix(sheaf.channels[e], blocks[u])
            residuals[e] = qcore.hs_norm(pushed - blocks[v])
    ok = all(r <= tol for r in residuals.values())
    return ok, residuals

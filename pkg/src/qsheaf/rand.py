"""Seeded random generators for states, channels, sheaves and cochains.

Every function takes an explicit ``numpy.random.Generator`` so runs are
reproducible end to end; nothing here touches global RNG state.
"""

from __future__ import annotations

import numpy as np

from . import qcore
from .sheaf import Cochain0, Cochain1, QuantumSemanticSheaf, SemanticGraph


def generator(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish unitary via QR of a Ginibre matrix with phase-fixed diagonal."""
    q, r = np.linalg.qr(_ginibre(rng, dim, dim))
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_density(dim: int, rng: np.random.Generator) -> qcore.DensityOperator:
    g = _ginibre(rng, dim, dim)
    m = g @ qcore.dagger(g)
    return qcore.DensityOperator(m / np.trace(m).real)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = _ginibre(rng, dim, dim)
    return (g + qcore.dagger(g)) / 2


def random_pure_state(dim_a: int, dim_b: int, rng: np.random.Generator) -> qcore.PureState:
    v = _ginibre(rng, dim_a * dim_b, 1).reshape(-1)
    return qcore.PureState(dim_a, dim_b, v / np.linalg.norm(v))


def random_channel(
    dim_in: int, dim_out: int, n_kraus: int, rng: np.random.Generator
) -> qcore.QuantumChannel:
    """Random CPTP map from a random isometry split into Kraus blocks."""
    if n_kraus * dim_out < dim_in:
        raise ValueError("need n_kraus * dim_out >= dim_in for an isometry")
    g = _ginibre(rng, n_kraus * dim_out, dim_in)
    q, _ = np.linalg.qr(g)
    kraus = tuple(q[k * dim_out : (k + 1) * dim_out, :] for k in range(n_kraus))
    return qcore.QuantumChannel(kraus)


def random_cochain0(
    sheaf: QuantumSemanticSheaf, rng: np.random.Generator, hermitian: bool = False
) -> Cochain0:
    blocks = {}
    for v, d in sheaf.graph.vertices:
        blocks[v] = random_hermitian(d, rng) if hermitian else _ginibre(rng, d, d)
    return Cochain0(blocks)


def random_cochain1(
    sheaf: QuantumSemanticSheaf, rng: np.random.Generator, hermitian: bool = False
) -> Cochain1:
    blocks = {}
    for e, _, v in sheaf.graph.edges:
        d = sheaf.graph.stalk_dim(v)
        blocks[e] = random_hermitian(d, rng) if hermitian else _ginibre(rng, d, d)
    return Cochain1(blocks)


def _random_channel_for_edge(
    dim: int, rng: np.random.Generator, kinds: tuple
) -> qcore.QuantumChannel:
    kind = kinds[rng.integers(len(kinds))]
    if kind == "identity":
        return qcore.QuantumChannel.identity(dim)
    if kind == "unitary":
        return qcore.QuantumChannel.from_unitary(random_unitary(dim, rng))
    if kind == "depolarizing":
        return qcore.QuantumChannel.depolarizing(dim, float(rng.uniform(0.0, 1.0)))
    if kind == "kraus":
        return random_channel(dim, dim, int(rng.integers(1, 4)), rng)
    raise ValueError(f"unknown channel kind {kind!r}")


def random_sheaf(
    rng: np.random.Generator,
    max_vertices: int = 5,
    max_stalk_dim: int = 2,
    extra_edges: int = 2,
    kinds: tuple = ("identity", "unitary", "depolarizing"),
    with_states: bool = False,
) -> QuantumSemanticSheaf:
    """Connected random sheaf: a spanning tree plus extra (cycle-making) edges.

    One stalk dimension is drawn per sheaf so identity and unitary channel
    kinds always apply.
    """
    n = int(rng.integers(2, max_vertices + 1))
    dim = int(rng.integers(1, max_stalk_dim + 1))
    vertices = [(f"v{i}", dim) for i in range(n)]
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        src, tgt = (f"v{j}", f"v{i}") if rng.random() < 0.5 else (f"v{i}", f"v{j}")
        edges.append((f"e{len(edges)}", src, tgt))
    for _ in range(int(rng.integers(0, extra_edges + 1))):
        a, b = rng.integers(0, n, size=2)
        edges.append((f"e{len(edges)}", f"v{int(a)}", f"v{int(b)}"))
    graph = SemanticGraph(tuple(vertices), tuple(edges))
    channels = {e: _random_channel_for_edge(dim, rng, kinds) for e, _, _ in graph.edges}
    states = (
        {v: random_density(d, rng) for v, d in graph.vertices} if with_states else None
    )
    return QuantumSemanticSheaf(graph, channels, states)


def random_tree_sheaf(
    rng: np.random.Generator,
    max_vertices: int = 6,
    max_stalk_dim: int = 2,
    kinds: tuple = ("identity", "unitary"),
) -> QuantumSemanticSheaf:
    """Random sheaf over a tree (no cycles, hence no obstruction space)."""
    n = int(rng.integers(2, max_vertices + 1))
    dim = int(rng.integers(1, max_stalk_dim + 1))
    vertices = [(f"v{i}", dim) for i in range(n)]
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        src, tgt = (f"v{j}", f"v{i}") if rng.random() < 0.5 else (f"v{i}", f"v{j}")
        edges.append((f"e{len(edges)}", src, tgt))
    graph = SemanticGraph(tuple(vertices), tuple(edges))
    channels = {e: _random_channel_for_edge(dim, rng, kinds) for e, _, _ in graph.edges}
    return QuantumSemanticSheaf(graph, channels, None)

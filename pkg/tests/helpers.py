"""Shared fixture builders: small sheaves, empirical models, bipartite states."""

import numpy as np

from qsheaf import qcore, resources, semantics, sheaf

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def scalar_identity_sheaf(vertices, edges):
    graph = sheaf.SemanticGraph(
        tuple((v, 1) for v in vertices),
        tuple(edges),
    )
    channels = {e: qcore.QuantumChannel.identity(1) for e, _, _ in edges}
    return sheaf.QuantumSemanticSheaf(graph, channels)


def triangle_sheaf():
    return scalar_identity_sheaf(
        ["A", "B", "C"],
        [("AB", "A", "B"), ("BC", "B", "C"), ("CA", "C", "A")],
    )


def triangle_cell():
    return sheaf.TwoCellComplex(
        (sheaf.TwoCell("A", (("AB", 1), ("BC", 1), ("CA", 1))),)
    )


def path_sheaf():
    return scalar_identity_sheaf(
        ["A", "B", "C"],
        [("AB", "A", "B"), ("BC", "B", "C")],
    )


def four_cycle_sheaf():
    return scalar_identity_sheaf(
        ["A", "B", "C", "D"],
        [("AB", "A", "B"), ("BC", "B", "C"), ("CD", "C", "D"), ("DA", "D", "A")],
    )


def theta_sheaf():
    """Two vertices joined by three parallel edges: obstruction dimension 2."""
    return scalar_identity_sheaf(
        ["u", "v"],
        [("e0", "u", "v"), ("e1", "u", "v"), ("e2", "u", "v")],
    )


def qubit_edge_sheaf(channel=None):
    graph = sheaf.SemanticGraph((("u", 2), ("v", 2)), (("uv", "u", "v"),))
    channel = channel or qcore.QuantumChannel.identity(2)
    return sheaf.QuantumSemanticSheaf(graph, {"uv": channel})


def x_square_sheaf():
    """Qubit 4-cycle whose first edge conjugates by Pauli X."""
    graph = sheaf.SemanticGraph(
        (("A", 2), ("B", 2), ("C", 2), ("D", 2)),
        (("AB", "A", "B"), ("BC", "B", "C"), ("CD", "C", "D"), ("DA", "D", "A")),
    )
    channels = {
        "AB": qcore.QuantumChannel.from_unitary(PAULI_X),
        "BC": qcore.QuantumChannel.identity(2),
        "CD": qcore.QuantumChannel.identity(2),
        "DA": qcore.QuantumChannel.identity(2),
    }
    return sheaf.QuantumSemanticSheaf(graph, channels)


def x_square_cell():
    return sheaf.TwoCellComplex(
        (sheaf.TwoCell("A", (("AB", 1), ("BC", 1), ("CD", 1), ("DA", 1))),)
    )


def scalar_cochain1(sh, values):
    return sheaf.Cochain1({e: [[complex(values[e])]] for e in sh.graph.edge_ids})


# measurement scenarios ------------------------------------------------------

def chsh_scenario():
    return resources.MeasurementScenario(
        measurements=(("a0", 2), ("a1", 2), ("b0", 2), ("b1", 2)),
        contexts=(("a0", "b0"), ("a0", "b1"), ("a1", "b0"), ("a1", "b1")),
    )


def pr_box_model():
    scen = chsh_scenario()
    tables = {}
    for ctx in scen.contexts:
        x = 0 if ctx[0] == "a0" else 1
        y = 0 if ctx[1] == "b0" else 1
        table = np.zeros((2, 2))
        for a in (0, 1):
            for b in (0, 1):
                if (a ^ b) == x * y:
                    table[a, b] = 0.5
        tables[ctx] = table
    return resources.EmpiricalModel(scen, tables)


def uniform_chsh_model():
    scen = chsh_scenario()
    return resources.EmpiricalModel(
        scen, {ctx: np.full((2, 2), 0.25) for ctx in scen.contexts}
    )


# bipartite states ------------------------------------------------------------

def bell_state():
    return semantics.BipartiteState(
        2, 2, qcore.DensityOperator.from_pure(np.array([1, 0, 0, 1]) / np.sqrt(2))
    )


def werner_state(visibility):
    bell = np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2
    rho = visibility * bell + (1 - visibility) * np.eye(4) / 4
    return semantics.BipartiteState(2, 2, qcore.DensityOperator(rho.astype(complex)))


def classically_correlated_state():
    return semantics.BipartiteState(
        2, 2, qcore.DensityOperator(np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex))
    )


def product_state(rng=None):
    rng = rng or np.random.default_rng(7)
    from qsheaf import rand

    rho = np.kron(rand.random_density(2, rng).matrix, rand.random_density(2, rng).matrix)
    return semantics.BipartiteState(2, 2, qcore.DensityOperator(rho))


def double_bell_state():
    """Two Bell pairs arranged as A = A1 A2, B = B1 B2 with pairs (A1,B1), (A2,B2)."""
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    psi = np.kron(bell, bell).reshape(2, 2, 2, 2)  # (A1, B1, A2, B2)
    psi = psi.transpose(0, 2, 1, 3).reshape(-1)  # (A1, A2, B1, B2)
    return semantics.BipartiteState(4, 4, qcore.DensityOperator.from_pure(psi))

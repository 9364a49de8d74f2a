"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; every tolerance is pinned here, not configured elsewhere.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

import exact_linalg
from helpers import (
    bell_state,
    classically_correlated_state,
    double_bell_state,
    pr_box_model,
    product_state,
    scalar_identity_sheaf,
    triangle_cell,
    triangle_sheaf,
    uniform_chsh_model,
    werner_state,
)
from qsheaf import align, qcore, rand, resources, runner, semantics, sheaf
from qsheaf.scenario import load_scenario

CORPUS_SEED = 20_240_817
CORPUS_SIZE = 100


def _line(number: int, ok: bool, text: str) -> None:
    print(f"ACCEPTANCE {number:02d} {'PASS' if ok else 'FAIL'}: {text}")
    assert ok, text


@pytest.fixture(scope="module")
def corpus():
    rng = rand.generator(CORPUS_SEED)
    return [
        rand.random_sheaf(
            rng,
            max_vertices=5,
            max_stalk_dim=2,
            extra_edges=3,
            kinds=("identity", "unitary", "depolarizing"),
        )
        for _ in range(CORPUS_SIZE)
    ]


def test_criterion_01_achievability(corpus):
    rng = rand.generator(CORPUS_SEED + 1)
    started = time.perf_counter()
    successes = 0
    for sh in corpus:
        report = sheaf.cohomology(sh)
        omega = rand.random_cochain1(sh, rng)
        transcript = align.align_protocol(sh, omega)
        if transcript.residual <= 1e-7 and transcript.symbols_sent == report.dim_H1:
            successes += 1
    elapsed = time.perf_counter() - started
    _line(
        1,
        successes == CORPUS_SIZE and elapsed < 60.0,
        f"alignment succeeded on {successes}/{CORPUS_SIZE} random sheaves "
        f"using exactly dim H1 symbols in {elapsed:.1f}s",
    )


def test_criterion_02_converse(corpus):
    rng = rand.generator(CORPUS_SEED + 2)
    eligible = witnesses = 0
    for sh in corpus:
        report = sheaf.cohomology(sh)
        k = report.dim_H1
        if k < 1:
            continue
        eligible += 1
        encoder = rng.standard_normal((k - 1, sh.dim_c1)) + 1j * rng.standard_normal(
            (k - 1, sh.dim_c1)
        )
        witness = align.converse_witness(sh, encoder)
        if witness.codeword_gap <= 1e-9 and witness.class_distance > 1e-6:
            witnesses += 1
    _line(
        2,
        eligible > 0 and witnesses == eligible,
        f"converse witness found for {witnesses}/{eligible} rank-deficient encoders",
    )


def test_criterion_03_kernel_characterization(corpus):
    worst = 0.0
    agree = True
    for sh in corpus:
        d0 = sheaf.build_coboundary(sh)
        lap = sheaf.sheaf_laplacian(d0)
        lap_kernel = qcore.kernel_basis(lap)
        d0_kernel = qcore.kernel_basis(d0)
        agree &= lap_kernel.shape[1] == d0_kernel.shape[1]
        for j in range(lap_kernel.shape[1]):
            worst = max(worst, float(np.linalg.norm(d0 @ lap_kernel[:, j])))
        for j in range(d0_kernel.shape[1]):
            worst = max(worst, float(np.linalg.norm(lap @ d0_kernel[:, j])))
    _line(
        3,
        agree and worst <= 1e-8,
        f"Laplacian kernel equals coboundary kernel on the corpus "
        f"(worst residual {worst:.2e})",
    )


def test_criterion_04_cohomology_oracle_equivalence():
    rng = np.random.default_rng(CORPUS_SEED + 4)
    pauli_y = np.array([[0, -1j], [1j, 0]])
    exact_channels = [
        qcore.QuantumChannel.identity(2),
        qcore.QuantumChannel.from_unitary(np.array([[0, 1], [1, 0]], dtype=complex)),
        qcore.QuantumChannel.from_unitary(pauli_y),
        qcore.QuantumChannel.from_unitary(np.diag([1, -1]).astype(complex)),
        qcore.QuantumChannel.depolarizing(2, 1.0),
    ]
    scalar_topologies = [
        (["A", "B"], [("e0", "A", "B")]),
        (["A", "B"], [("e0", "A", "B"), ("e1", "A", "B")]),
        (["A", "B", "C"], [("e0", "A", "B"), ("e1", "B", "C")]),
        (["A", "B", "C"], [("e0", "A", "B"), ("e1", "B", "C"), ("e2", "C", "A")]),
        (["A"], [("e0", "A", "A")]),
        (
            ["A", "B", "C", "D"],
            [("e0", "A", "B"), ("e1", "B", "C"), ("e2", "C", "D"), ("e3", "D", "A")],
        ),
        (["A", "B", "C", "D"], [("e0", "A", "B"), ("e1", "C", "D")]),
        (
            ["A", "B", "C", "D", "E"],
            [
                ("e0", "A", "B"),
                ("e1", "B", "C"),
                ("e2", "C", "D"),
                ("e3", "D", "E"),
                ("e4", "E", "A"),
                ("e5", "A", "C"),
            ],
        ),
    ]
    qubit_topologies = [
        (["A", "B"], [("e0", "A", "B")]),
        (["A", "B"], [("e0", "A", "B"), ("e1", "B", "A")]),
        (["A", "B", "C"], [("e0", "A", "B"), ("e1", "B", "C"), ("e2", "C", "A")]),
        (["A", "B", "C"], [("e0", "A", "B"), ("e1", "B", "C")]),
    ]
    instances = agreements = 0
    for vertices, edges in scalar_topologies:
        sh = scalar_identity_sheaf(vertices, edges)
        assert sh.dim_c0 <= 12
        d0 = sheaf.build_coboundary(sh)
        instances += 1
        agreements += int(
            sheaf.cohomology(sh).dim_H1 == exact_linalg.exact_h1_dimension(d0)
        )
    for vertices, edges in qubit_topologies:
        for _ in range(6):
            graph = sheaf.SemanticGraph(tuple((v, 2) for v in vertices), tuple(edges))
            channels = {
                e: exact_channels[rng.integers(len(exact_channels))]
                for e, _, _ in edges
            }
            sh = sheaf.QuantumSemanticSheaf(graph, channels)
            assert sh.dim_c0 <= 12
            d0 = sheaf.build_coboundary(sh)
            instances += 1
            agreements += int(
                sheaf.cohomology(sh).dim_H1 == exact_linalg.exact_h1_dimension(d0)
            )
    _line(
        4,
        instances >= 30 and agreements == instances,
        f"SVD and exact row-reduction agree on dim H1 for "
        f"{agreements}/{instances} small sheaves",
    )


def test_criterion_05_triangle_fixture():
    sh = triangle_sheaf()
    graph_report = sheaf.cohomology(sh)
    cell_report = sheaf.cohomology(sh, cells=triangle_cell())
    ok = (
        graph_report.dim_H0 == 1
        and graph_report.dim_H1 == 1
        and cell_report.dim_H1 == 0
        and abs(graph_report.spectral_gap - 3.0) <= 1e-9
    )
    _line(
        5,
        ok,
        f"triangle: H0={graph_report.dim_H0}, H1={graph_report.dim_H1} (graph), "
        f"H1={cell_report.dim_H1} (2-cell), gap={graph_report.spectral_gap!r}",
    )


def test_criterion_06_entanglement_budget():
    rng = rand.generator(CORPUS_SEED + 6)

    def bell_resource():
        return resources.EntangledEdgeResource.from_state(
            "e", qcore.PureState(2, 2, np.array([1, 0, 0, 1]) / np.sqrt(2))
        )

    def product_resource():
        return resources.EntangledEdgeResource.from_state(
            "e", qcore.PureState(2, 2, np.array([1, 0, 0, 0], dtype=complex))
        )

    def qutrit_resource():
        amplitudes = np.zeros(9, dtype=complex)
        for i in range(3):
            amplitudes[i * 3 + i] = 1 / np.sqrt(3)
        return resources.EntangledEdgeResource.from_state(
            "e", qcore.PureState(3, 3, amplitudes)
        )

    combos = [
        (3, [bell_resource()]),
        (2, [product_resource(), product_resource()]),  # all separable
        (1, [bell_resource(), bell_resource()]),  # over budget, clamp
        (0, []),
        (4, [qutrit_resource()]),
        (5, [bell_resource(), qutrit_resource()]),
        (2, []),
        (1, [product_resource()]),
    ]
    while len(combos) < 20:
        k = int(rng.integers(0, 7))
        picks = [
            (bell_resource, product_resource, qutrit_resource)[int(rng.integers(3))]()
            for _ in range(int(rng.integers(0, 4)))
        ]
        combos.append((k, picks))
    checked = exact = 0
    for dim_h1, pool in combos:
        report = resources.ea_h1_dimension(dim_h1, pool)
        budget = float(sum(np.log2(r.schmidt_rank) for r in pool))
        expected = max(0.0, dim_h1 - budget)
        checked += 1
        exact += int(
            abs(report.dim_H1_ea - expected) <= 1e-12
            and report.dim_H1_ea <= report.dim_H1_unassisted + 1e-12
        )
    _line(
        6,
        checked >= 20 and exact == checked,
        f"entanglement-assisted dimension matches max(0, k - sum log2 r) on "
        f"{exact}/{checked} combinations",
    )


def test_criterion_07_contextual_fraction():
    scen = pr_box_model().scenario
    slowest = 0.0
    vertex_ok = True
    for vertex in resources.nc_vertices(scen):
        started = time.perf_counter()
        result = resources.contextual_fraction(vertex)
        slowest = max(slowest, time.perf_counter() - started)
        vertex_ok &= result.cf <= 1e-7
    started = time.perf_counter()
    uniform_cf = resources.contextual_fraction(uniform_chsh_model()).cf
    slowest = max(slowest, time.perf_counter() - started)
    started = time.perf_counter()
    pr_cf = resources.contextual_fraction(pr_box_model()).cf
    slowest = max(slowest, time.perf_counter() - started)
    oracle = exact_linalg.exact_contextual_fraction(pr_box_model())
    ok = (
        vertex_ok
        and uniform_cf <= 1e-7
        and oracle == Fraction(1)
        and abs(pr_cf - float(oracle)) <= 1e-7
        and slowest < 1.0
    )
    _line(
        7,
        ok,
        f"cf: vertices 0, uniform {uniform_cf:.1e}, pr box {pr_cf:.9f} vs exact "
        f"{oracle}, slowest LP {slowest * 1000:.0f}ms",
    )


def test_criterion_08_discord_suite():
    bell_report = semantics.discord(bell_state())
    product_report = semantics.discord(product_state())
    classical_report = semantics.discord(classically_correlated_state())
    doubling = []
    for state in (bell_state(), classically_correlated_state(), werner_state(0.5)):
        base = semantics.classical_correlation(
            state, semantics.MeasurementSearchConfig(n_theta=64, n_phi=128)
        )[0]
        fine = semantics.classical_correlation(
            state, semantics.MeasurementSearchConfig(n_theta=128, n_phi=256)
        )[0]
        doubling.append(abs(base - fine))
    ok = (
        abs(bell_report.mutual_info - 2.0) <= 1e-6
        and abs(bell_report.classical_J - 1.0) <= 1e-3
        and abs(bell_report.discord - 1.0) <= 1e-3
        and abs(product_report.discord) <= 1e-6
        and abs(classical_report.discord) <= 2e-3
        and max(doubling) <= 1e-3
    )
    _line(
        8,
        ok,
        f"discord: bell (I={bell_report.mutual_info:.6f}, J={bell_report.classical_J:.6f}, "
        f"d={bell_report.discord:.6f}), product {product_report.discord:.1e}, "
        f"classical {classical_report.discord:.1e}, grid doubling {max(doubling):.1e}",
    )


def test_criterion_09_integration_duality(fixtures_dir):
    states = [
        bell_state(),
        product_state(),
        classically_correlated_state(),
        werner_state(0.0),
        werner_state(1.0 / 3.0),
        werner_state(1.0),
    ]
    identification_gap = 0.0
    for state in states:
        report = semantics.discord(state)
        phi = semantics.integrated_information(state)
        identification_gap = max(identification_gap, abs(phi - report.discord))
    phi_partition = semantics.integrated_information(
        double_bell_state(),
        mode="partition-search",
        factors_a=[2, 2],
        factors_b=[2, 2],
    )
    run_report = runner.run_command(
        load_scenario(fixtures_dir / "states.json"), "discord"
    )
    emitted = run_report["commands"]["discord"]["result"]["double_bell"]
    ok = (
        identification_gap <= 1e-9
        and abs(phi_partition) <= 2e-3
        and "partition_minus_discord" in emitted
    )
    _line(
        9,
        ok,
        f"integration duality: identification gap {identification_gap:.1e}, "
        f"double-bell partition phi {phi_partition:.1e}, discrepancy field emitted",
    )


def test_criterion_10_diffusion_contraction():
    sh = triangle_sheaf()
    initial = sheaf.Cochain0({"A": [[1.0]], "B": [[0.0]], "C": [[0.0]]})
    trajectory = align.diffuse(sh, initial, step_size=0.1, steps=50)
    norms = [n for _, n in trajectory]
    contraction = norms[50] / norms[49]
    ok = abs(contraction - 0.700) <= 1e-4
    _line(
        10,
        ok,
        f"diffusion contraction on the triangle reaches {contraction:.6f} "
        f"within 50 steps (target 0.700)",
    )


def test_criterion_11_determinism(fixtures_dir):
    names = ("triangle", "edge", "four_cycle", "theta", "chsh", "states")
    identical = True
    for name in names:
        first = runner.run_command(load_scenario(fixtures_dir / f"{name}.json"), "all")
        second = runner.run_command(load_scenario(fixtures_dir / f"{name}.json"), "all")
        identical &= runner.report_json(
            runner.strip_timings(first)
        ) == runner.report_json(runner.strip_timings(second))
    _line(
        11,
        identical,
        f"repeated seeded runs over {len(names)} fixture scenarios emit "
        f"byte-identical reports (timings excluded)",
    )

"""Scenario files: strict JSON schema describing a sheaf plus optional payloads.

Complex scalars serialize as ``[re, im]`` float pairs, matrices as
row-major nested arrays of those pairs.  Unknown fields anywhere in the
document are rejected so misconfigurations fail loudly instead of being
silently ignored.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import qcore, resources, semantics, sheaf
from .errors import ScenarioError

SCHEMA_VERSION = 1


@dataclass(eq=False)
class RunOptions:
    """Tolerances and simulation knobs; CLI flags override scenario values."""

    tol_rank: float = 1e-9
    grid_theta: int = 64
    grid_phi: int = 128
    step_size: float = 0.1
    steps: int = 500
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "tol_rank": self.tol_rank,
            "grid_theta": self.grid_theta,
            "grid_phi": self.grid_phi,
            "step_size": self.step_size,
            "steps": self.steps,
            "seed": self.seed,
        }


@dataclass(eq=False)
class BipartitePayload:
    name: str
    state: semantics.BipartiteState
    factors_a: list | None
    factors_b: list | None
    allow_coarse: bool = False


@dataclass(eq=False)
class Scenario:
    name: str
    sheaf: sheaf.QuantumSemanticSheaf
    two_cells: sheaf.TwoCellComplex | None
    entanglement: list
    empirical_models: list  # (name, EmpiricalModel) pairs
    bipartite_states: list  # BipartitePayload entries
    options: RunOptions
    source_hash: str


def _fail(path: str, message: str) -> None:
    raise ScenarioError(f"{path}: {message}")


def _expect_keys(obj: dict, path: str, required: tuple, optional: tuple = ()) -> None:
    if not isinstance(obj, dict):
        _fail(path, f"expected an object, got {type(obj).__name__}")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        _fail(path, f"unknown field(s) {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        _fail(path, f"missing required field(s) {missing}")


def _parse_complex(value, path: str) -> complex:
    if not (isinstance(value, (list, tuple)) and len(value) == 2):
        _fail(path, "complex entries must be [re, im] pairs")
    re, im = value
    if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in (re, im)):
        _fail(path, "complex entries must be numeric [re, im] pairs")
    return complex(re, im)


def _parse_matrix(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        _fail(path, "matrix must be a non-empty nested array")
    rows = []
    width = None
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            _fail(f"{path}[{i}]", "matrix row must be a non-empty array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            _fail(f"{path}[{i}]", "ragged matrix rows")
        rows.append([_parse_complex(z, f"{path}[{i}][{j}]") for j, z in enumerate(row)])
    return np.array(rows, dtype=np.complex128)


def _parse_vector(value, path: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        _fail(path, "vector must be a non-empty array of [re, im] pairs")
    return np.array(
        [_parse_complex(z, f"{path}[{i}]") for i, z in enumerate(value)],
        dtype=np.complex128,
    )


def _parse_channel(spec, path: str, dim_in: int, dim_out: int) -> qcore.QuantumChannel:
    _expect_keys(spec, path, ("kind",), ("p", "matrix", "kraus"))
    kind = spec["kind"]
    if kind == "identity":
        if dim_in != dim_out:
            _fail(path, f"identity channel needs equal stalk dims, got {dim_in}->{dim_out}")
        return qcore.QuantumChannel.identity(dim_in)
    if kind == "unitary":
        if "matrix" not in spec:
            _fail(path, "unitary channel needs a 'matrix' field")
        u = _parse_matrix(spec["matrix"], f"{path}.matrix")
        return qcore.QuantumChannel.from_unitary(u)
    if kind == "depolarizing":
        if dim_in != dim_out:
            _fail(path, "depolarizing channel needs equal stalk dims")
        if "p" not in spec:
            _fail(path, "depolarizing channel needs a 'p' field")
        return qcore.QuantumChannel.depolarizing(dim_in, float(spec["p"]))
    if kind == "kraus":
        if "kraus" not in spec or not isinstance(spec["kraus"], list) or not spec["kraus"]:
            _fail(path, "kraus channel needs a non-empty 'kraus' list")
        ops = tuple(
            _parse_matrix(k, f"{path}.kraus[{i}]") for i, k in enumerate(spec["kraus"])
        )
        return qcore.QuantumChannel(ops)
    _fail(path, f"unknown channel kind {kind!r}")


def _parse_graph_and_channels(doc, path: str):
    _expect_keys(doc, path, ("vertices", "edges"))
    vertices = []
    for i, v in enumerate(doc["vertices"]):
        _expect_keys(v, f"{path}.vertices[{i}]", ("id", "dim"))
        vertices.append((str(v["id"]), int(v["dim"])))
    dims = dict(vertices)
    edges, channels = [], {}
    for i, e in enumerate(doc["edges"]):
        epath = f"{path}.edges[{i}]"
        _expect_keys(e, epath, ("id", "source", "target", "channel"))
        edge_id = str(e["id"])
        src, tgt = str(e["source"]), str(e["target"])
        if src not in dims or tgt not in dims:
            _fail(epath, f"edge endpoints {src!r}->{tgt!r} must be declared vertices")
        edges.append((edge_id, src, tgt))
        channels[edge_id] = _parse_channel(
            e["channel"], f"{epath}.channel", dims[src], dims[tgt]
        )
    graph = sheaf.SemanticGraph(tuple(vertices), tuple(edges))
    return graph, channels


def _parse_entanglement(items, path: str) -> list:
    out = []
    for i, item in enumerate(items):
        ipath = f"{path}[{i}]"
        _expect_keys(item, ipath, ("edge", "kind"), ("dim", "dim_a", "dim_b", "amplitudes"))
        kind = item["kind"]
        edge = str(item["edge"])
        if kind == "bell":
            psi = qcore.PureState(2, 2, np.array([1, 0, 0, 1]) / np.sqrt(2))
        elif kind == "max_entangled":
            d = int(item.get("dim", 2))
            amplitudes = np.zeros(d * d, dtype=np.complex128)
            for j in range(d):
                amplitudes[j * d + j] = 1 / np.sqrt(d)
            psi = qcore.PureState(d, d, amplitudes)
        elif kind == "product":
            d = int(item.get("dim", 2))
            amplitudes = np.zeros(d * d, dtype=np.complex128)
            amplitudes[0] = 1.0
            psi = qcore.PureState(d, d, amplitudes)
        elif kind == "explicit":
            for key in ("dim_a", "dim_b", "amplitudes"):
                if key not in item:
                    _fail(ipath, f"explicit entanglement needs {key!r}")
            psi = qcore.PureState(
                int(item["dim_a"]),
                int(item["dim_b"]),
                _parse_vector(item["amplitudes"], f"{ipath}.amplitudes"),
            )
        else:
            _fail(ipath, f"unknown entanglement kind {kind!r}")
        out.append(resources.EntangledEdgeResource.from_state(edge, psi))
    return out


def _parse_empirical_models(items, path: str) -> list:
    out = []
    for i, item in enumerate(items):
        ipath = f"{path}[{i}]"
        _expect_keys(item, ipath, ("name", "measurements", "contexts", "tables"))
        measurements = []
        for j, m in enumerate(item["measurements"]):
            _expect_keys(m, f"{ipath}.measurements[{j}]", ("id", "outcomes"))
            measurements.append((str(m["id"]), int(m["outcomes"])))
        contexts = tuple(tuple(str(m) for m in ctx) for ctx in item["contexts"])
        scenario = resources.MeasurementScenario(tuple(measurements), contexts)
        if len(item["tables"]) != len(contexts):
            _fail(f"{ipath}.tables", "one table per context required")
        tables = {}
        for j, (ctx, table) in enumerate(zip(contexts, item["tables"])):
            tables[ctx] = np.array(table, dtype=float)
        try:
            model = resources.EmpiricalModel(scenario, tables)
        except Exception as exc:
            _fail(f"{ipath}", str(exc))
        out.append((str(item["name"]), model))
    return out


def _parse_bipartite_states(items, path: str) -> list:
    out = []
    for i, item in enumerate(items):
        ipath = f"{path}[{i}]"
        _expect_keys(
            item,
            ipath,
            ("name", "dim_a", "dim_b"),
            ("rho", "pure", "factors_a", "factors_b", "allow_coarse"),
        )
        dim_a, dim_b = int(item["dim_a"]), int(item["dim_b"])
        if "rho" in item:
            rho = qcore.DensityOperator(_parse_matrix(item["rho"], f"{ipath}.rho"))
        elif "pure" in item:
            rho = qcore.DensityOperator.from_pure(
                _parse_vector(item["pure"], f"{ipath}.pure")
            )
        else:
            _fail(ipath, "bipartite state needs 'rho' or 'pure'")
        state = semantics.BipartiteState(dim_a, dim_b, rho)
        out.append(
            BipartitePayload(
                name=str(item["name"]),
                state=state,
                factors_a=item.get("factors_a"),
                factors_b=item.get("factors_b"),
                allow_coarse=bool(item.get("allow_coarse", False)),
            )
        )
    return out


def _parse_two_cells(items, path: str) -> sheaf.TwoCellComplex:
    cells = []
    for i, item in enumerate(items):
        ipath = f"{path}[{i}]"
        _expect_keys(item, ipath, ("base", "steps"))
        steps = []
        for j, step in enumerate(item["steps"]):
            _expect_keys(step, f"{ipath}.steps[{j}]", ("edge", "sign"))
            steps.append((str(step["edge"]), int(step["sign"])))
        cells.append(sheaf.TwoCell(str(item["base"]), tuple(steps)))
    return sheaf.TwoCellComplex(tuple(cells))


def _parse_options(doc, path: str) -> RunOptions:
    _expect_keys(
        doc,
        path,
        (),
        ("tol_rank", "grid_theta", "grid_phi", "step_size", "steps", "seed"),
    )
    options = RunOptions()
    if "tol_rank" in doc:
        options.tol_rank = float(doc["tol_rank"])
    if "grid_theta" in doc:
        options.grid_theta = int(doc["grid_theta"])
    if "grid_phi" in doc:
        options.grid_phi = int(doc["grid_phi"])
    if "step_size" in doc:
        options.step_size = float(doc["step_size"])
    if "steps" in doc:
        options.steps = int(doc["steps"])
    if "seed" in doc:
        options.seed = int(doc["seed"])
    return options


def parse_scenario(doc: dict, source_bytes: bytes) -> Scenario:
    _expect_keys(
        doc,
        "scenario",
        ("schema_version", "name", "graph"),
        (
            "states",
            "entanglement",
            "empirical_models",
            "bipartite_states",
            "two_cells",
            "options",
        ),
    )
    if int(doc["schema_version"]) != SCHEMA_VERSION:
        _fail("scenario.schema_version", f"unsupported version {doc['schema_version']}")
    graph, channels = _parse_graph_and_channels(doc["graph"], "scenario.graph")
    states = None
    if "states" in doc:
        if not isinstance(doc["states"], dict):
            _fail("scenario.states", "expected a vertex -> matrix map")
        states = {}
        for v, matrix in doc["states"].items():
            states[str(v)] = qcore.DensityOperator(
                _parse_matrix(matrix, f"scenario.states[{v}]")
            )
    try:
        sheaf_obj = sheaf.QuantumSemanticSheaf(graph, channels, states)
    except Exception as exc:
        raise ScenarioError(f"scenario.graph: {exc}") from exc
    two_cells = (
        _parse_two_cells(doc["two_cells"], "scenario.two_cells")
        if "two_cells" in doc
        else None
    )
    entanglement = (
        _parse_entanglement(doc["entanglement"], "scenario.entanglement")
        if "entanglement" in doc
        else []
    )
    for resource in entanglement:
        if resource.edge_id not in graph.edge_ids:
            _fail("scenario.entanglement", f"unknown edge {resource.edge_id!r}")
    models = (
        _parse_empirical_models(doc["empirical_models"], "scenario.empirical_models")
        if "empirical_models" in doc
        else []
    )
    bipartite = (
        _parse_bipartite_states(doc["bipartite_states"], "scenario.bipartite_states")
        if "bipartite_states" in doc
        else []
    )
    options = _parse_options(doc.get("options", {}), "scenario.options")
    return Scenario(
        name=str(doc["name"]),
        sheaf=sheaf_obj,
        two_cells=two_cells,
        entanglement=entanglement,
        empirical_models=models,
        bipartite_states=bipartite,
        options=options,
        source_hash="sha256:" + hashlib.sha256(source_bytes).hexdigest(),
    )


def load_scenario(path) -> Scenario:
    """Load and fully validate a scenario file."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"{path}: no such file")
    raw = path.read_bytes()
    try:
        doc = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_scenario(doc, raw)

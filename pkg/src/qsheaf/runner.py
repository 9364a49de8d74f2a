"""Command dispatch and report emission for scenario files.

A run report is a plain JSON-able dict: deterministic given scenario,
options and seed.  Wall-clock timings live under a dedicated top-level
key so determinism checks can drop them wholesale.
"""

from __future__ import annotations

import csv
import json
import time
from pathlib import Path

import numpy as np

from . import __version__, align, qcore, rand, resources, semantics, sheaf
from .errors import PayloadError, QsheafError
from .scenario import RunOptions, Scenario

COMMANDS = ("cohomology", "align", "spectrum", "ea", "cf", "discord")


def _jsonable(value):
    """Convert numpy scalars/arrays (complex as [re, im]) to JSON-able values."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def _cohomology_payload(report: sheaf.CohomologyReport) -> dict:
    return {
        "dim_C0": report.dim_C0,
        "dim_C1": report.dim_C1,
        "rank_delta0": report.rank_delta0,
        "dim_H0": report.dim_H0,
        "dim_H1": report.dim_H1,
        "spectral_gap": report.spectral_gap,
        "mode": report.mode,
    }


def _run_cohomology(scenario: Scenario, options: RunOptions) -> dict:
    out = {
        "graph_mode": _cohomology_payload(
            sheaf.cohomology(scenario.sheaf, rank_rtol=options.tol_rank)
        )
    }
    if scenario.two_cells is not None:
        out["cell_mode"] = _cohomology_payload(
            sheaf.cohomology(
                scenario.sheaf, cells=scenario.two_cells, rank_rtol=options.tol_rank
            )
        )
    d0 = sheaf.build_coboundary(scenario.sheaf)
    singular_values = (
        np.linalg.svd(d0, compute_uv=False).tolist() if d0.size else []
    )
    out["coboundary_singular_values"] = singular_values
    return out


def _run_align(scenario: Scenario, options: RunOptions) -> dict:
    rng = rand.generator(options.seed)
    omega = rand.random_cochain1(scenario.sheaf, rng)
    transcript = align.align_protocol(
        scenario.sheaf, omega, rank_rtol=options.tol_rank
    )
    report = sheaf.cohomology(scenario.sheaf, rank_rtol=options.tol_rank)
    symbols, bits = align.semantic_rate(report)
    return {
        "symbols_sent": transcript.symbols_sent,
        "rate_bits": transcript.rate_bits,
        "rate_symbols": symbols,
        "rate_bits_from_report": bits,
        "residual": transcript.residual,
        "success": transcript.success,
        "coefficients": _jsonable(transcript.coefficients),
    }


def _run_spectrum(scenario: Scenario, options: RunOptions) -> dict:
    d0 = sheaf.build_coboundary(scenario.sheaf)
    lap = sheaf.sheaf_laplacian(d0)
    eigenvalues = (
        np.linalg.eigvalsh((lap + qcore.dagger(lap)) / 2).tolist() if lap.size else []
    )
    gap = sheaf.spectral_gap(lap, rtol=options.tol_rank) if lap.size else 0.0
    lam_max = eigenvalues[-1] if eigenvalues else 0.0
    if scenario.sheaf.states is not None and set(scenario.sheaf.states) == set(
        scenario.sheaf.graph.vertex_ids
    ):
        initial = sheaf.Cochain0(
            {v: rho.matrix for v, rho in scenario.sheaf.states.items()}
        )
    else:
        initial = rand.random_cochain0(
            scenario.sheaf, rand.generator(options.seed), hermitian=True
        )
    trajectory = align.diffuse(
        scenario.sheaf, initial, step_size=options.step_size, steps=options.steps
    )
    norms = [n for _, n in trajectory]
    contraction = None
    if len(norms) >= 2 and norms[-2] > 1e-14:
        contraction = norms[-1] / norms[-2]
    return {
        "laplacian_eigenvalues": eigenvalues,
        "spectral_gap": gap,
        "lambda_max": lam_max,
        "diffusion": {
            "step_size": options.step_size,
            "steps": options.steps,
            "contraction_estimate": contraction,
            "trajectory": [[t, n] for t, n in trajectory],
        },
    }


def _run_ea(scenario: Scenario, options: RunOptions) -> dict:
    if not scenario.entanglement:
        raise PayloadError("scenario declares no per-edge entanglement resources")
    report = sheaf.cohomology(scenario.sheaf, rank_rtol=options.tol_rank)
    ea = resources.ea_h1_dimension(report.dim_H1, scenario.entanglement)
    return {
        "dim_H1_unassisted": ea.dim_H1_unassisted,
        "ebit_budget": ea.ebit_budget,
        "dim_H1_ea": ea.dim_H1_ea,
        "edges": [
            {
                "edge": r.edge_id,
                "schmidt_rank": r.schmidt_rank,
                "schmidt_coefficients": _jsonable(r.schmidt_coefficients),
            }
            for r in scenario.entanglement
        ],
    }


def _run_cf(scenario: Scenario, options: RunOptions) -> dict:
    if not scenario.empirical_models:
        raise PayloadError("scenario declares no empirical models")
    out = {}
    for name, model in scenario.empirical_models:
        result = resources.contextual_fraction(model)
        out[name] = {
            "cf": result.cf,
            "per_context": {
                "|".join(ctx): tv for ctx, tv in result.per_context.items()
            },
            "weights": _jsonable(result.weights),
            "nearest_nc": {
                "|".join(ctx): _jsonable(table)
                for ctx, table in result.nearest_nc.tables.items()
            },
            "lp_iterations": result.lp_iterations,
        }
    return out


def _run_discord(scenario: Scenario, options: RunOptions) -> dict:
    if not scenario.bipartite_states:
        raise PayloadError("scenario declares no bipartite states")
    out = {}
    for payload in scenario.bipartite_states:
        search = semantics.MeasurementSearchConfig(
            n_theta=options.grid_theta,
            n_phi=options.grid_phi,
            allow_coarse=payload.allow_coarse,
            coarse_seed=options.seed,
        )
        report = semantics.discord(payload.state, search)
        entry = {
            "mutual_info": report.mutual_info,
            "classical_J": report.classical_J,
            "discord": report.discord,
            "integrated_phi": report.integrated_phi,
            "measurement": {
                "kind": report.optimizer_measurement.kind,
                "theta": report.optimizer_measurement.theta,
                "phi": report.optimizer_measurement.phi,
                "lower_bound": report.optimizer_measurement.lower_bound,
            },
        }
        if payload.factors_a and payload.factors_b:
            phi_partition = semantics.integrated_information(
                payload.state,
                search,
                mode="partition-search",
                factors_a=payload.factors_a,
                factors_b=payload.factors_b,
            )
            entry["integrated_phi_partition"] = phi_partition
            # surfaced rather than hidden: the two routes may disagree
            entry["partition_minus_discord"] = phi_partition - report.discord
        out[payload.name] = entry
    return out


_RUNNERS = {
    "cohomology": _run_cohomology,
    "align": _run_align,
    "spectrum": _run_spectrum,
    "ea": _run_ea,
    "cf": _run_cf,
    "discord": _run_discord,
}


def run_command(scenario: Scenario, command: str, options: RunOptions | None = None) -> dict:
    """Execute one command (or ``all``) and build the run report dict."""
    options = options or scenario.options
    if command != "all" and command not in _RUNNERS:
        raise QsheafError(f"unknown command {command!r}")
    results: dict = {}
    timings: dict = {}
    if command == "all":
        for name in COMMANDS:
            runner = _RUNNERS[name]
            started = time.perf_counter()
            try:
                results[name] = {"status": "ok", "result": runner(scenario, options)}
            except PayloadError as exc:
                results[name] = {"status": "skipped", "reason": str(exc)}
            timings[name] = time.perf_counter() - started
    else:
        runner = _RUNNERS[command]
        started = time.perf_counter()
        results[command] = {"status": "ok", "result": runner(scenario, options)}
        timings[command] = time.perf_counter() - started
    return {
        "schema_version": 1,
        "tool_version": __version__,
        "scenario": scenario.name,
        "scenario_hash": scenario.source_hash,
        "command": command,
        "options": options.to_dict(),
        "commands": results,
        "timings": timings,
    }


def strip_timings(report: dict) -> dict:
    """Copy of the report without wall-clock fields, for determinism checks."""
    return {k: v for k, v in report.items() if k != "timings"}


def report_json(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"


def _flatten_scalars(prefix: str, value, rows: list) -> None:
    if isinstance(value, dict):
        for key, sub in value.items():
            _flatten_scalars(f"{prefix}.{key}" if prefix else str(key), sub, rows)
    elif isinstance(value, bool):
        rows.append((prefix, int(value)))
    elif isinstance(value, (int, float)) and value is not None:
        rows.append((prefix, value))


# tolerance annotations for the csv metric rows
_METRIC_TOLERANCES = {
    "residual": 1e-7,
    "cf": 1e-7,
    "spectral_gap": 1e-9,
    "dim_H1_ea": 1e-12,
}


def _series_files(report: dict, out_path: Path) -> list:
    written = []
    commands = report.get("commands", {})
    spectrum = commands.get("spectrum", {})
    if spectrum.get("status") == "ok":
        result = spectrum["result"]
        diffusion = result["diffusion"]["trajectory"]
        series_path = out_path.with_name(out_path.stem + ".diffusion.csv")
        with series_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "disagreement_norm"])
            writer.writerows(diffusion)
        written.append(series_path)
        eig_path = out_path.with_name(out_path.stem + ".spectrum.csv")
        with eig_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "eigenvalue"])
            writer.writerows(enumerate(result["laplacian_eigenvalues"]))
        written.append(eig_path)
    return written


def emit_report(report: dict, fmt: str, path, figures: bool = True) -> list:
    """Write the report as json or csv; csv runs also emit series files.

    When figures are enabled, matplotlib renderings of the plottable
    series are written next to the output file.  Returns all paths
    written.
    """
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    written = [out_path]
    if fmt == "json":
        out_path.write_text(report_json(report))
    elif fmt == "csv":
        rows: list = []
        for command, entry in report.get("commands", {}).items():
            if entry.get("status") != "ok":
                continue
            scalars: list = []
            _flatten_scalars("", entry["result"], scalars)
            for metric, value in scalars:
                leaf = metric.rsplit(".", 1)[-1]
                tolerance = _METRIC_TOLERANCES.get(leaf, "")
                rows.append((report["scenario"], command, metric, value, tolerance))
        with out_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scenario", "command", "metric", "value", "tolerance"])
            writer.writerows(rows)
        written.extend(_series_files(report, out_path))
    else:
        raise QsheafError(f"unknown report format {fmt!r}")
    if figures:
        from . import figures as figure_module

        written.extend(figure_module.render_report_figures(report, out_path))
    return written

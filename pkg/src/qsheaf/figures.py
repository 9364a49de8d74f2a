"""Matplotlib renderings of report series, written next to the report file."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _figure_path(out_path: Path, suffix: str) -> Path:
    return out_path.with_name(f"{out_path.stem}.{suffix}.png")


def coboundary_spectrum_figure(singular_values, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3))
    if singular_values:
        ax.plot(range(len(singular_values)), singular_values, "o-", ms=4)
        ax.set_yscale("log")
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    ax.set_title("coboundary singular values")
    return _save(fig, path)


def laplacian_spectrum_figure(eigenvalues, gap, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.plot(range(len(eigenvalues)), eigenvalues, "o", ms=5)
    if gap:
        ax.axhline(gap, color="tab:red", lw=1, ls="--", label=f"spectral gap {gap:.4g}")
        ax.legend(fontsize=8)
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.set_title("sheaf Laplacian spectrum")
    return _save(fig, path)


def diffusion_figure(trajectory, path: Path) -> Path:
    steps = [t for t, _ in trajectory]
    norms = [n for _, n in trajectory]
    fig, ax = plt.subplots(figsize=(5, 3))
    positive = [n if n > 0 else float("nan") for n in norms]
    ax.semilogy(steps, positive, lw=1.5)
    ax.set_xlabel("step")
    ax.set_ylabel("disagreement norm")
    ax.set_title("Laplacian diffusion decay")
    return _save(fig, path)


def align_figure(coefficients, path: Path) -> Path:
    magnitudes = [abs(complex(re, im)) for re, im in coefficients]
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.bar(range(len(magnitudes)), magnitudes)
    ax.set_xlabel("obstruction class index")
    ax.set_ylabel("|coefficient|")
    ax.set_title("transmitted class coefficients")
    return _save(fig, path)


def ea_figure(entry, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3))
    labels = ["dim H1", "ebit budget", "dim H1 (assisted)"]
    values = [entry["dim_H1_unassisted"], entry["ebit_budget"], entry["dim_H1_ea"]]
    ax.bar(labels, values, color=["tab:blue", "tab:orange", "tab:green"])
    ax.set_ylabel("dimension / ebits")
    ax.set_title("entanglement-assisted obstruction budget")
    return _save(fig, path)


def cf_figure(name, entry, path: Path) -> Path:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3))
    contexts = list(entry["per_context"])
    ax1.bar(range(len(contexts)), [entry["per_context"][c] for c in contexts])
    ax1.set_xticks(range(len(contexts)))
    ax1.set_xticklabels(contexts, rotation=45, fontsize=7, ha="right")
    ax1.set_ylabel("total variation")
    ax1.set_title(f"{name}: per-context distance (cf={entry['cf']:.4g})")
    weights = entry["weights"]
    ax2.bar(range(len(weights)), weights)
    ax2.set_xlabel("deterministic vertex")
    ax2.set_ylabel("weight")
    ax2.set_title("nearest noncontextual mixture")
    return _save(fig, path)


def discord_figure(results, path: Path) -> Path:
    names = list(results)
    metrics = ("mutual_info", "classical_J", "discord")
    fig, ax = plt.subplots(figsize=(max(5, 1.5 * len(names)), 3))
    width = 0.25
    for k, metric in enumerate(metrics):
        xs = [i + (k - 1) * width for i in range(len(names))]
        ax.bar(xs, [results[n][metric] for n in names], width=width, label=metric)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, fontsize=8)
    ax.set_ylabel("bits")
    ax.legend(fontsize=8)
    ax.set_title("bipartite correlation measures")
    return _save(fig, path)


def render_report_figures(report: dict, out_path: Path) -> list:
    """Render every plottable series in the report; returns written paths."""
    written = []
    commands = report.get("commands", {})

    entry = commands.get("cohomology")
    if entry and entry.get("status") == "ok":
        values = entry["result"].get("coboundary_singular_values", [])
        written.append(
            coboundary_spectrum_figure(values, _figure_path(out_path, "coboundary"))
        )

    entry = commands.get("spectrum")
    if entry and entry.get("status") == "ok":
        result = entry["result"]
        written.append(
            laplacian_spectrum_figure(
                result["laplacian_eigenvalues"],
                result["spectral_gap"],
                _figure_path(out_path, "spectrum"),
            )
        )
        written.append(
            diffusion_figure(
                result["diffusion"]["trajectory"], _figure_path(out_path, "diffusion")
            )
        )

    entry = commands.get("align")
    if entry and entry.get("status") == "ok" and entry["result"]["coefficients"]:
        written.append(
            align_figure(entry["result"]["coefficients"], _figure_path(out_path, "align"))
        )

    entry = commands.get("ea")
    if entry and entry.get("status") == "ok":
        written.append(ea_figure(entry["result"], _figure_path(out_path, "ea")))

    entry = commands.get("cf")
    if entry and entry.get("status") == "ok":
        for name, payload in entry["result"].items():
            written.append(
                cf_figure(name, payload, _figure_path(out_path, f"cf_{name}"))
            )

    entry = commands.get("discord")
    if entry and entry.get("status") == "ok":
        written.append(
            discord_figure(entry["result"], _figure_path(out_path, "discord"))
        )
    return written

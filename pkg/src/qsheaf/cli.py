"""Command-line surface: scenario files in, reports (and figures) out.

Exit codes: 0 success, 2 validation failure, 3 missing payload,
4 numerical failure.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__, runner
from .errors import (
    AlignmentFailureError,
    DivergenceError,
    LPError,
    PayloadError,
    QsheafError,
    ScenarioError,
    ValidationError,
)
from .scenario import load_scenario

EXIT_VALIDATION = 2
EXIT_PAYLOAD = 3
EXIT_NUMERICAL = 4


def _apply_flag_overrides(options, seed, tol_rank, grid, step, steps):
    if seed is not None:
        options.seed = seed
    if tol_rank is not None:
        options.tol_rank = tol_rank
    if grid is not None:
        try:
            theta, phi = grid.lower().split("x")
            options.grid_theta, options.grid_phi = int(theta), int(phi)
        except ValueError:
            raise click.BadParameter("grid must look like 64x128", param_hint="--grid")
    if step is not None:
        options.step_size = step
    if steps is not None:
        options.steps = steps
    return options


def _run(command, scenario_paths, fmt, out, seed, tol_rank, grid, step, steps, figures):
    try:
        scenarios = [load_scenario(p) for p in scenario_paths]
    except ScenarioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)

    multiple = len(scenarios) > 1
    out_dir = None
    if out is not None and multiple:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)

    for scenario in scenarios:
        options = _apply_flag_overrides(
            scenario.options, seed, tol_rank, grid, step, steps
        )
        try:
            report = runner.run_command(scenario, command, options)
        except PayloadError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_PAYLOAD)
        except (AlignmentFailureError, DivergenceError, LPError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)
        except (ScenarioError, ValidationError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except QsheafError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_NUMERICAL)

        if out is None:
            click.echo(runner.report_json(report), nl=False)
        else:
            target = (
                out_dir / f"{scenario.name}.{fmt}" if multiple else Path(out)
            )
            written = runner.emit_report(report, fmt, target, figures=figures)
            for path in written:
                click.echo(f"wrote {path}")


def _command_options(fn):
    fn = click.argument(
        "scenarios", nargs=-1, required=True, type=click.Path(path_type=str)
    )(fn)
    fn = click.option(
        "--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
        show_default=True, help="Report format when --out is given.",
    )(fn)
    fn = click.option("--out", type=click.Path(path_type=str), default=None,
                      help="Output file (or directory for multiple scenarios).")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="Seed for every random draw in the run.")(fn)
    fn = click.option("--tol-rank", type=float, default=None,
                      help="Relative singular-value threshold for ranks.")(fn)
    fn = click.option("--grid", type=str, default=None,
                      help="Measurement search grid, e.g. 64x128.")(fn)
    fn = click.option("--step", type=float, default=None,
                      help="Diffusion step size.")(fn)
    fn = click.option("--steps", type=int, default=None,
                      help="Diffusion step count.")(fn)
    fn = click.option("--figures/--no-figures", default=True, show_default=True,
                      help="Render figures next to file output.")(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="qsheaf")
def main() -> None:
    """Quantum semantic sheaf toolkit.

    Loads scenario JSON files describing an agent network with quantum
    channels, then computes obstruction dimensions, alignment
    transcripts, spectra, entanglement budgets, contextual fractions and
    discord reports.
    """


def _register(name, help_text):
    @main.command(name=name, help=help_text)
    @_command_options
    def _cmd(scenarios, fmt, out, seed, tol_rank, grid, step, steps, figures):
        _run(name, scenarios, fmt, out, seed, tol_rank, grid, step, steps, figures)

    _cmd.__name__ = f"cmd_{name}"
    return _cmd


_register("cohomology", "Obstruction dimensions and spectral gap of the sheaf.")
_register("align", "Run the minimum-rate alignment protocol on a seeded cochain.")
_register("spectrum", "Laplacian spectrum plus a diffusion trajectory.")
_register("ea", "Entanglement-assisted obstruction accounting.")
_register("cf", "Contextual fraction of the declared empirical models.")
_register("discord", "Correlation measures for the declared bipartite states.")
_register("all", "Every command the scenario has payloads for.")


if __name__ == "__main__":
    main()

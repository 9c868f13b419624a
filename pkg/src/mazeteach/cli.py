"""Operator command line: bank building, experiments, reports, serving.

All randomness flows from --seed (default 7, fixed, never taken from the
environment); seeds are echoed into every output file header so reruns
can be verified byte-for-byte.
"""
from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from .experiment import (
    ExperimentConfig,
    compare,
    export_results,
    records_from_csv,
    run_suite,
    summary_to_dict,
)
from .guidance import EntropyWeights
from .metrics import summarize
from .planner import NoiseParams, PlannerParams, PlanningError, build_demo_bank
from .task import load_task

DEFAULT_SEED = 7


def _load_task_or_die(path: str):
    try:
        return load_task(path)
    except FileNotFoundError:
        raise click.ClickException(f"task config not found: {path}")


@click.group()
def main():
    """Entropy-guided demonstration selection for 2D maze LfD."""


@main.command("build-bank")
@click.option("--task", "task_path", required=True, type=click.Path(), help="Task TOML file.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Bank output file (default: <task>_bank.json).")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--noise/--no-noise", default=True, show_default=True, help="Also store perturbed copies under the 'noisy' source tag.")
@click.option("--jitter-sd", type=float, default=0.8, show_default=True, help="Waypoint jitter standard deviation (cm).")
@click.option("--endpoint-sd", type=float, default=0.8, show_default=True, help="Endpoint offset standard deviation (cm).")
def cmd_build_bank(task_path, out_path, seed, noise, jitter_sd, endpoint_sd):
    """Plan one demonstration per grid point and persist the bank."""
    spec = _load_task_or_die(task_path)
    params = PlannerParams(seed=seed)
    noise_params = (
        NoiseParams(waypoint_jitter_sd=jitter_sd, endpoint_offset_sd=endpoint_sd, seed=seed)
        if noise
        else None
    )
    try:
        bank = build_demo_bank(spec, params, noise_params)
    except PlanningError as e:
        raise click.ClickException(f"planning failed: {e}")
    out = Path(out_path) if out_path else Path(f"{spec.name}_bank.json")
    bank.save(out)
    per_source = {s: len(bank.indices(s)) for s in bank.sources()}
    click.echo(f"wrote {out} with {len(bank)} demonstrations ({per_source})")


@main.command("run")
@click.option("--task", "task_path", required=True, type=click.Path())
@click.option("--bank", "bank_path", required=True, type=click.Path(), help="Demo bank JSON from build-bank.")
@click.option("--rules", default="entropy,heuristic", show_default=True)
@click.option("--sources", default="planner", show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default="results", show_default=True)
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--max-demos", type=int, default=20, show_default=True)
@click.option("--jobs", type=int, default=None, help="Trial worker processes (default: available parallelism).")
@click.option("--figures/--no-figures", default=True, show_default=True, help="Render report figures next to the CSV.")
def cmd_run(task_path, bank_path, rules, sources, out_dir, seed, max_demos, jobs, figures):
    """Run the guided-teaching suite and export CSV, summary, and figures."""
    spec = _load_task_or_die(task_path)
    if not Path(bank_path).exists():
        raise click.ClickException(f"bank not found: {bank_path}")
    config = ExperimentConfig(
        task_path=str(task_path),
        bank_path=str(bank_path),
        rules=tuple(r.strip() for r in rules.split(",") if r.strip()),
        sources=tuple(s.strip() for s in sources.split(",") if s.strip()),
        max_demos_per_trial=max_demos,
        seed=seed,
        weights=EntropyWeights(),
    )
    jobs = jobs or os.cpu_count() or 1
    total = len(config.rules) * len(config.sources) * spec.grid.size
    done = [0]

    def progress(rec):
        done[0] += 1
        click.echo(
            f"[{done[0]}/{total}] {rec.rule}/{rec.source} point {rec.initial_point}: "
            f"|D|={rec.demo_count} eff={rec.efficacy:.3f} "
            f"{'converged' if rec.converged else 'capped'}",
            err=True,
        )

    records = run_suite(config, spec=spec, progress=progress, jobs=jobs)
    comparison = None
    if "entropy" in config.rules and "heuristic" in config.rules:
        comparison = compare(records, seed=seed)
    paths = export_results(records, out_dir, seed, comparison)
    if figures:
        from .report import render_all

        paths.update(render_all(records, summarize(records, seed=seed), out_dir))
    _echo_summary(records, seed, comparison)
    click.echo("wrote: " + ", ".join(str(p) for p in paths.values()))


def _echo_summary(records, seed, comparison):
    summary = summarize(records, seed=seed)
    click.echo(f"{'rule':<10} {'source':<8} {'mean eta':>9} {'95% CI':>19} {'|D|':>6} {'eff':>6} {'conv':>6}")
    for g in summary.groups:
        click.echo(
            f"{g.rule:<10} {g.source:<8} {g.mean_efficiency:>9.4f} "
            f"[{g.ci_low:.4f}, {g.ci_high:.4f}] {g.mean_demos:>6.2f} "
            f"{g.mean_efficacy:>6.3f} {g.convergence_rate:>6.2f}"
        )
    if comparison:
        for s, r in comparison.efficiency_ratios.items():
            click.echo(f"efficiency ratio entropy/heuristic ({s}): {r:.3f}")
        for r, d in comparison.degradations.items():
            click.echo(f"relative degradation planner->noisy ({r}): {d * 100:.1f}%")


@main.command("compare")
@click.option("--trials", "trials_path", required=True, type=click.Path(exists=True), help="trials.csv from a previous run.")
@click.option("--seed", type=int, default=DEFAULT_SEED, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Also render figures into this directory.")
def cmd_compare(trials_path, seed, out_dir):
    """Re-summarize an existing trials CSV."""
    records = records_from_csv(Path(trials_path).read_text())
    if not records:
        raise click.ClickException("no records in CSV")
    rules = {r.rule for r in records}
    comparison = compare(records, seed=seed) if {"entropy", "heuristic"} <= rules else None
    _echo_summary(records, seed, comparison)
    if out_dir:
        from .report import render_all

        paths = render_all(records, summarize(records, seed=seed), out_dir)
        click.echo("wrote: " + ", ".join(str(p) for p in paths.values()))


@main.command("serve")
@click.option("--addr", default="127.0.0.1:8080", show_default=True, help="host:port to bind.")
@click.option("--tasks", "tasks_dir", type=click.Path(), default=None, help="Directory of task TOMLs (default: built-in tasks).")
@click.option("--persist", "persist_dir", type=click.Path(), default=None, help="Session persistence directory.")
@click.option("--static", "static_dir", type=click.Path(), default=None, help="Built UI bundle to serve at /.")
def cmd_serve(addr, tasks_dir, persist_dir, static_dir):
    """Start the interactive teaching server."""
    import uvicorn

    from .server import create_app

    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise click.ClickException(f"--addr must be host:port, got {addr!r}")
    app = create_app(tasks_dir=tasks_dir, persist_dir=persist_dir, static_dir=static_dir)
    click.echo(f"serving on http://{host}:{port}")
    try:
        uvicorn.run(app, host=host, port=int(port), log_level="warning")
    except SystemExit:
        raise
    except OSError as e:
        raise click.ClickException(f"bind failed: {e}")


if __name__ == "__main__":
    sys.exit(main())

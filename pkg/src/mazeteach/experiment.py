"""Guided-teaching experiment harness.

One trial replays the teaching loop from a single initial grid point:
fetch the banked demonstration, refit the learner, evaluate over the
whole grid, and let the guidance rule pick the next point until 90%
coverage or the demo cap. A suite runs one trial per grid point for
each (rule, source) combination and exports CSV plus a summary.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import tpgmm
from .guidance import (
    EntropyWeights,
    ExhaustedError,
    GuidanceState,
    entropy_next,
    heuristic_next,
    is_done,
)
from .metrics import SuiteSummary, TrialRecord, summarize
from .planner import DemoBank
from .task import TaskSpec, build_grid, evaluate_model

RULES = ("entropy", "heuristic")
SOURCES = ("planner", "noisy")
DEFAULT_MAX_DEMOS = 20


@dataclass(frozen=True)
class ExperimentConfig:
    task_path: str
    bank_path: str
    rules: tuple[str, ...] = RULES
    sources: tuple[str, ...] = ("planner",)
    max_demos_per_trial: int = DEFAULT_MAX_DEMOS
    seed: int = 0
    weights: EntropyWeights = field(default_factory=EntropyWeights)

    def __post_init__(self):
        if not self.rules or not self.sources:
            raise ValueError("rules and sources must be non-empty")
        for r in self.rules:
            if r not in RULES:
                raise ValueError(f"unknown rule {r!r}")


def run_trial(
    rule: str,
    source: str,
    initial_point: int,
    spec: TaskSpec,
    bank: DemoBank,
    max_demos: int = DEFAULT_MAX_DEMOS,
    seed: int = 0,
    weights: EntropyWeights | None = None,
) -> TrialRecord:
    """One guided teaching episode starting from `initial_point`."""
    weights = weights or EntropyWeights()
    grid = build_grid(spec.grid)
    state = GuidanceState(grid, rule=rule)
    demos = []
    trace: list[float] = []
    current = initial_point
    converged = False
    k = None  # BIC-selected on the first refit, then kept for the trial

    while True:
        demos.append(bank.demonstration(source, current))
        state.record_demo(current)
        model = tpgmm.fit(demos, k=k, seed=seed)
        k = model.k
        result = evaluate_model(model, spec)
        state.update_evaluation(result, weights)
        trace.append(result.coverage)
        if is_done(state, spec.criteria):
            converged = True
            break
        if len(demos) >= max_demos:
            break
        try:
            current = entropy_next(state) if rule == "entropy" else heuristic_next(state)
        except ExhaustedError:
            break

    eps = trace[-1]
    n = len(demos)
    return TrialRecord(
        rule=rule,
        source=source,
        initial_point=initial_point,
        demo_count=n,
        efficacy=eps,
        efficiency=eps / n,
        converged=converged,
        coverage_trace=tuple(trace),
    )


_WORKER: dict = {}


def _worker_init(task_path, bank_path, max_demos, seed, weights):
    from .task import load_task

    _WORKER["spec"] = load_task(task_path)
    _WORKER["bank"] = DemoBank.load(bank_path)
    _WORKER["max_demos"] = max_demos
    _WORKER["seed"] = seed
    _WORKER["weights"] = weights


def _worker_run(args) -> TrialRecord:
    rule, source, i = args
    return run_trial(
        rule,
        source,
        i,
        _WORKER["spec"],
        _WORKER["bank"],
        max_demos=_WORKER["max_demos"],
        seed=_WORKER["seed"],
        weights=_WORKER["weights"],
    )


def run_suite(
    config: ExperimentConfig,
    spec: TaskSpec | None = None,
    bank: DemoBank | None = None,
    progress=None,
    jobs: int = 1,
) -> list[TrialRecord]:
    """One trial per grid point per (rule, source), in deterministic order.

    With jobs > 1 trials run in a process pool; result order (and thus
    the exported files) is identical to the serial run.
    """
    from .task import load_task

    spec = spec or load_task(config.task_path)
    bank = bank or DemoBank.load(config.bank_path)
    grid_size = spec.grid.size
    work = [
        (rule, source, i)
        for rule in config.rules
        for source in config.sources
        for i in range(grid_size)
    ]
    if jobs > 1:
        import multiprocessing as mp

        ctx = mp.get_context("spawn")
        init_args = (
            config.task_path,
            config.bank_path,
            config.max_demos_per_trial,
            config.seed,
            config.weights,
        )
        with ctx.Pool(jobs, initializer=_worker_init, initargs=init_args) as pool:
            records = []
            for rec in pool.imap(_worker_run, work):
                records.append(rec)
                if progress is not None:
                    progress(rec)
            return records

    records = []
    for rule, source, i in work:
        rec = run_trial(
            rule,
            source,
            i,
            spec,
            bank,
            max_demos=config.max_demos_per_trial,
            seed=config.seed,
            weights=config.weights,
        )
        records.append(rec)
        if progress is not None:
            progress(rec)
    return records


@dataclass(frozen=True)
class Comparison:
    summary: SuiteSummary
    efficiency_ratios: dict[str, float]  # per source: entropy / heuristic
    degradations: dict[str, float]  # per rule: (planner - noisy) / noisy


def compare(records: list[TrialRecord], seed: int = 0) -> Comparison:
    """Cross-rule and cross-source report over a suite of trials."""
    summary = summarize(records, seed=seed)
    rules = sorted({r.rule for r in records})
    sources = sorted({r.source for r in records})
    if "entropy" not in rules or "heuristic" not in rules:
        raise ValueError("comparison needs both rules present")

    ratios = {}
    for s in sources:
        e = summary.group("entropy", s).mean_efficiency
        h = summary.group("heuristic", s).mean_efficiency
        ratios[s] = e / h
    degradations = {}
    if "planner" in sources and "noisy" in sources:
        for r in rules:
            p = summary.group(r, "planner").mean_efficiency
            n = summary.group(r, "noisy").mean_efficiency
            degradations[r] = (p - n) / n
    return Comparison(summary, ratios, degradations)


def records_to_csv(records: list[TrialRecord], seed: int) -> str:
    buf = io.StringIO()
    buf.write(f"# seed={seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(
        ["rule", "source", "initial_point", "demos", "efficacy", "efficiency", "converged"]
    )
    for r in records:
        w.writerow(
            [
                r.rule,
                r.source,
                r.initial_point,
                r.demo_count,
                repr(r.efficacy),
                repr(r.efficiency),
                str(r.converged).lower(),
            ]
        )
    return buf.getvalue()


def records_from_csv(text: str) -> list[TrialRecord]:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    return [
        TrialRecord(
            rule=row["rule"],
            source=row["source"],
            initial_point=int(row["initial_point"]),
            demo_count=int(row["demos"]),
            efficacy=float(row["efficacy"]),
            efficiency=float(row["efficiency"]),
            converged=row["converged"] == "true",
        )
        for row in reader
    ]


def summary_to_dict(summary: SuiteSummary) -> dict:
    return {
        "groups": [
            {
                "rule": g.rule,
                "source": g.source,
                "n_trials": g.n_trials,
                "mean_efficiency": g.mean_efficiency,
                "ci_low": g.ci_low,
                "ci_high": g.ci_high,
                "mean_demos": g.mean_demos,
                "mean_efficacy": g.mean_efficacy,
                "convergence_rate": g.convergence_rate,
            }
            for g in summary.groups
        ]
    }


def export_results(
    records: list[TrialRecord],
    out_dir: str | Path,
    seed: int,
    comparison: Comparison | None = None,
) -> dict[str, Path]:
    """Write trials CSV, coverage-trace sidecar, and summary JSON."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    paths["trials"] = out / "trials.csv"
    paths["trials"].write_text(records_to_csv(records, seed))

    traces = {
        "seed": seed,
        "traces": [
            {
                "rule": r.rule,
                "source": r.source,
                "initial_point": r.initial_point,
                "coverage": list(r.coverage_trace),
            }
            for r in records
        ],
    }
    paths["traces"] = out / "coverage_traces.json"
    paths["traces"].write_text(json.dumps(traces, indent=1) + "\n")

    doc: dict = {"seed": seed}
    doc.update(summary_to_dict(summarize(records, seed=seed)))
    if comparison is not None:
        doc["efficiency_ratio_entropy_over_heuristic"] = comparison.efficiency_ratios
        doc["relative_degradation_planner_to_noisy"] = comparison.degradations
    paths["summary"] = out / "summary.json"
    paths["summary"].write_text(json.dumps(doc, indent=1) + "\n")
    return paths

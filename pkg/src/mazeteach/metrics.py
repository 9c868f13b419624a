"""Teaching efficacy/efficiency and cross-trial aggregation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .task import EvaluationResult

BOOTSTRAP_RESAMPLES = 10_000
BOOTSTRAP_SEED = 0


@dataclass(frozen=True)
class TrialRecord:
    rule: str
    source: str
    initial_point: int
    demo_count: int
    efficacy: float
    efficiency: float
    converged: bool
    coverage_trace: tuple[float, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.efficacy <= 1.0:
            raise ValueError("efficacy must be in [0, 1]")
        if self.efficiency != self.efficacy / self.demo_count:
            raise ValueError("efficiency must equal efficacy / demo_count exactly")


@dataclass(frozen=True)
class GroupSummary:
    rule: str
    source: str
    n_trials: int
    mean_efficiency: float
    ci_low: float
    ci_high: float
    mean_demos: float
    mean_efficacy: float
    convergence_rate: float

    @property
    def ci_half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2.0


@dataclass(frozen=True)
class SuiteSummary:
    groups: tuple[GroupSummary, ...] = field(default_factory=tuple)

    def group(self, rule: str, source: str) -> GroupSummary:
        for g in self.groups:
            if g.rule == rule and g.source == source:
                return g
        raise KeyError(f"no group ({rule}, {source})")


def efficacy(result: EvaluationResult) -> float:
    """Fraction of grid points with a successful trajectory."""
    if not result.outcomes:
        raise ValueError("empty grid")
    return result.coverage


def efficiency(eps: float, demos: int) -> float:
    """Efficacy normalized by the number of demonstrations."""
    if demos < 1:
        raise ValueError("need at least one demonstration")
    return eps / demos


def bootstrap_ci(
    values: np.ndarray,
    n_resamples: int = BOOTSTRAP_RESAMPLES,
    seed: int = BOOTSTRAP_SEED,
    level: float = 0.95,
) -> tuple[float, float]:
    """Seeded nonparametric percentile bootstrap CI for the mean."""
    values = np.asarray(values, dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, values.size, size=(n_resamples, values.size))
    means = values[idx].mean(axis=1)
    lo = (1.0 - level) / 2.0
    return (
        float(np.quantile(means, lo)),
        float(np.quantile(means, 1.0 - lo)),
    )


def summarize(records: list[TrialRecord], seed: int = BOOTSTRAP_SEED) -> SuiteSummary:
    """Group records by (rule, source) with bootstrap 95% CIs on mean efficiency."""
    if not records:
        raise ValueError("no records")
    keys = sorted({(r.rule, r.source) for r in records})
    groups = []
    for rule, source in keys:
        vals = [r for r in records if r.rule == rule and r.source == source]
        if len(vals) < 2:
            raise ValueError(f"group ({rule}, {source}) needs >= 2 records")
        eff = np.array([r.efficiency for r in vals])
        lo, hi = bootstrap_ci(eff, seed=seed)
        groups.append(
            GroupSummary(
                rule=rule,
                source=source,
                n_trials=len(vals),
                mean_efficiency=float(eff.mean()),
                ci_low=lo,
                ci_high=hi,
                mean_demos=float(np.mean([r.demo_count for r in vals])),
                mean_efficacy=float(np.mean([r.efficacy for r in vals])),
                convergence_rate=float(np.mean([r.converged for r in vals])),
            )
        )
    return SuiteSummary(tuple(groups))

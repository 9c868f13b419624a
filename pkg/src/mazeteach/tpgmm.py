"""Task-parameterized GMM over time-augmented 2D trajectories.

State vectors are xi = [t, x, y] with t the normalized trajectory time.
Each demonstration carries one coordinate frame per task landmark
(frame 0 = start, frame 1 = goal); a mixture is fitted to the pooled
demonstration data expressed in each frame, and new task instances are
produced by mapping every frame's components into the global frame and
fusing them with a product of Gaussians, then regressing on time.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Point2, Trajectory, resample
from .gmm import (
    FitReport,
    Gaussian,
    MixtureModel,
    em_fit,
    gaussian_product,
    gmr_batch,
    select_k,
)

N_DEMO_SAMPLES = 100
DEFAULT_K_RANGE = (2, 10)


@dataclass(frozen=True)
class Frame:
    """Coordinate frame on the augmented [t, x, y] space: orientation A, origin b."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if A.shape != (b.size, b.size):
            raise ValueError("A must be square and match b")
        if np.max(np.abs(A.T @ A - np.eye(b.size))) > 1e-9:
            raise ValueError("A must be orthonormal")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    def to_local(self, xi: np.ndarray) -> np.ndarray:
        return (np.asarray(xi, dtype=float) - self.b) @ self.A  # A^-1 = A^T

    def to_global(self, xi_local: np.ndarray) -> np.ndarray:
        return np.asarray(xi_local, dtype=float) @ self.A.T + self.b

    def gaussian_to_global(self, g: Gaussian) -> Gaussian:
        return Gaussian(self.A @ g.mean + self.b, self.A @ g.cov @ self.A.T)


@dataclass(frozen=True)
class Demonstration:
    trajectory: Trajectory
    frames: tuple[Frame, ...]
    source: str = "planner"

    def __post_init__(self):
        frames = tuple(self.frames)
        if len(frames) < 1:
            raise ValueError("need at least one frame")
        object.__setattr__(self, "frames", frames)


@dataclass(frozen=True)
class TPGMMModel:
    local_models: tuple[MixtureModel, ...]
    k: int
    fit_reports: tuple[FitReport, ...] = field(default_factory=tuple)

    def __post_init__(self):
        models = tuple(self.local_models)
        if any(m.k != self.k or m.dim != 3 for m in models):
            raise ValueError("local models must share K and have dimension 3")
        object.__setattr__(self, "local_models", models)
        object.__setattr__(self, "fit_reports", tuple(self.fit_reports))

    @property
    def n_frames(self) -> int:
        return len(self.local_models)


def make_frames(start: Point2, goal: Point2) -> tuple[Frame, Frame]:
    """Start and goal frames with identity orientation on [t, x, y]."""
    if start.x == goal.x and start.y == goal.y:
        raise ValueError("start and goal coincide")
    eye = np.eye(3)
    return (
        Frame(eye, np.array([0.0, start.x, start.y])),
        Frame(eye, np.array([0.0, goal.x, goal.y])),
    )


def augmented_samples(traj: Trajectory, n: int = N_DEMO_SAMPLES) -> np.ndarray:
    """Resample and stack into the (n, 3) augmented [t, x, y] array."""
    r = resample(traj, n)
    return np.column_stack([r.times, r.points])


def project(demo: Demonstration, j: int) -> np.ndarray:
    """Demonstration samples expressed in frame j: A_j^-1 (xi - b_j)."""
    if not 0 <= j < len(demo.frames):
        raise IndexError(f"frame index {j} out of range")
    return demo.frames[j].to_local(augmented_samples(demo.trajectory))


def _kmeans_pp_indices(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    idx = [int(rng.integers(n))]
    for _ in range(1, k):
        d2 = np.min([np.sum((data - data[i]) ** 2, axis=1) for i in idx], axis=0)
        total = d2.sum()
        if total <= 0:
            idx.append(int(rng.integers(n)))
        else:
            idx.append(int(rng.choice(n, p=d2 / total)))
    return np.array(idx)


def _joint_em(
    frame_data: list[np.ndarray],
    k: int,
    seed: int = 0,
    tol: float = 1e-6,
    max_iter: int = 200,
    n_init: int = 1,
) -> tuple[list[MixtureModel], FitReport]:
    """Joint EM; the first init is deterministic time-binned, additional
    inits (if requested) are seeded k-means++, best log-likelihood wins."""
    best = None
    for i in range(n_init):
        ms, rep = _joint_em_once(
            frame_data, k, seed + 7919 * i, tol, max_iter, time_init=(i == 0)
        )
        if best is None or rep.log_likelihood > best[1].log_likelihood:
            best = (ms, rep)
    return best


def _joint_em_once(
    frame_data: list[np.ndarray],
    k: int,
    seed: int = 0,
    tol: float = 1e-6,
    max_iter: int = 200,
    time_init: bool = True,
) -> tuple[list[MixtureModel], FitReport]:
    """EM over all frames at once with shared responsibilities.

    Sample n carries one projection per frame; its responsibility for
    component k multiplies that component's densities across frames, so
    corresponding components in different frames describe the same
    portion of the data. Weights are shared across frames.

    time_init partitions samples into k contiguous time bins (dimension
    0 is normalized time, identical in every frame) — the conventional
    deterministic initialization for time-indexed trajectory mixtures.
    """
    from .gmm import _component_logpdfs, _regularize

    j_frames = len(frame_data)
    n, d = frame_data[0].shape
    if n < k:
        raise ValueError(f"need at least k={k} samples, got {n}")

    if time_init:
        t = frame_data[0][:, 0]
        bins = np.minimum((t * k).astype(int), k - 1)
        # Guard against empty bins on tiny datasets.
        for c in range(k):
            if not np.any(bins == c):
                bins[np.argmin(np.abs(t - (c + 0.5) / k))] = c
        means = []
        covs = []
        for j in range(j_frames):
            mj = np.empty((k, d))
            cj = np.empty((k, d, d))
            for c in range(k):
                sel = frame_data[j][bins == c]
                mj[c] = sel.mean(axis=0)
                cj[c] = _regularize(
                    np.cov(sel.T) if sel.shape[0] > 1 else np.eye(d)
                )
            means.append(mj)
            covs.append(cj)
        weights = np.bincount(bins, minlength=k).astype(float) / n
        weights = np.maximum(weights, 1e-12)
        weights = weights / weights.sum()
    else:
        rng = np.random.default_rng(seed)
        center_idx = _kmeans_pp_indices(frame_data[0], k, rng)
        means = [frame_data[j][center_idx].copy() for j in range(j_frames)]
        covs = []
        for j in range(j_frames):
            base = _regularize(np.cov(frame_data[j].T) if n > 1 else np.eye(d))
            covs.append(np.array([base] * k))
        weights = np.full(k, 1.0 / k)

    def models() -> list[MixtureModel]:
        return [
            MixtureModel(
                weights, tuple(Gaussian(means[j][c], covs[j][c]) for c in range(k))
            )
            for j in range(j_frames)
        ]

    trace: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        ms = models()
        lp = np.log(weights)[None, :] + sum(
            _component_logpdfs(ms[j], frame_data[j]) for j in range(j_frames)
        )
        m = lp.max(axis=1, keepdims=True)
        log_norm = m + np.log(np.exp(lp - m).sum(axis=1, keepdims=True))
        ll = float(log_norm.sum())
        trace.append(ll)
        if len(trace) >= 2 and abs(ll - trace[-2]) <= tol * max(1.0, abs(trace[-2])):
            converged = True
            break
        resp = np.exp(lp - log_norm)
        nk = resp.sum(axis=0) + 1e-300
        weights = nk / n
        weights = weights / weights.sum()
        for j in range(j_frames):
            means[j] = (resp.T @ frame_data[j]) / nk[:, None]
            for c in range(k):
                diff = frame_data[j] - means[j][c]
                covs[j][c] = _regularize(
                    (resp[:, c][:, None] * diff).T @ diff / nk[c]
                )

    out = models()
    if not converged:
        lp = np.log(weights)[None, :] + sum(
            _component_logpdfs(out[j], frame_data[j]) for j in range(j_frames)
        )
        m = lp.max(axis=1, keepdims=True)
        trace.append(float((m + np.log(np.exp(lp - m).sum(axis=1, keepdims=True))).sum()))
    ll = trace[-1]
    # Free parameters: shared weights plus per-frame means and covariances.
    p = (k - 1) + j_frames * (k * d + k * d * (d + 1) // 2)
    bic = -2.0 * ll + p * np.log(n)
    report = FitReport(
        log_likelihood=ll,
        iterations=it,
        converged=converged,
        bic=float(bic),
        log_likelihood_trace=tuple(trace),
    )
    # Order components along time for stable, readable models.
    order = np.argsort([g.mean[0] for g in out[0].components], kind="stable")
    sorted_models = [
        MixtureModel(mm.weights[order], tuple(mm.components[i] for i in order))
        for mm in out
    ]
    return sorted_models, report


def fit(
    demos: list[Demonstration],
    k: int | None = None,
    seed: int = 0,
    k_range: tuple[int, int] = DEFAULT_K_RANGE,
) -> TPGMMModel:
    """Fit the per-frame mixtures jointly on the pooled demonstrations.

    When k is not given, candidates over `k_range` are fitted and the
    one minimizing BIC wins (ties toward smaller k).
    """
    if not demos:
        raise ValueError("need at least one demonstration")
    n_frames = len(demos[0].frames)
    if any(len(d.frames) != n_frames for d in demos):
        raise ValueError("demonstrations disagree on frame count")

    pooled = [
        np.vstack([project(d, j) for d in demos]) for j in range(n_frames)
    ]
    if k is None:
        lo, hi = k_range
        hi = min(hi, pooled[0].shape[0])
        if lo > hi or lo < 1:
            raise ValueError(f"empty candidate range [{lo}, {hi}]")
        best = None
        for cand in range(lo, hi + 1):
            ms, rep = _joint_em(pooled, cand, seed=seed + cand)
            if best is None or rep.bic < best[2].bic:
                best = (cand, ms, rep)
        k, models, report = best
    else:
        models, report = _joint_em(pooled, k, seed=seed)
    return TPGMMModel(tuple(models), k, (report,))


def instantiate(model: TPGMMModel, query_frames) -> MixtureModel:
    """Fuse per-frame components in global coordinates for a new task instance."""
    query_frames = tuple(query_frames)
    if len(query_frames) != model.n_frames:
        raise ValueError(
            f"expected {model.n_frames} frames, got {len(query_frames)}"
        )
    comps = []
    weights = np.zeros(model.k)
    for ki in range(model.k):
        globals_k = [
            f.gaussian_to_global(m.components[ki])
            for f, m in zip(query_frames, model.local_models)
        ]
        comps.append(gaussian_product(globals_k))
        weights[ki] = np.mean([m.weights[ki] for m in model.local_models])
    weights = weights / weights.sum()
    return MixtureModel(weights, tuple(comps))


def reproduce(model: TPGMMModel, query_frames, n_steps: int = 100) -> Trajectory:
    """Generate a trajectory by GMR on time over the instantiated mixture."""
    if n_steps < 2:
        raise ValueError("need n_steps >= 2")
    mixture = instantiate(model, query_frames)
    times = np.linspace(0.0, 1.0, n_steps)
    means, _ = gmr_batch(mixture, [0], [1, 2], times[:, None])
    return Trajectory(times, means)

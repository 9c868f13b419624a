"""Gaussian mixture core: EM fitting, BIC model selection, Gaussian
products, and Gaussian mixture regression.

Fitting is deterministic given the seed (k-means++ initialization drawn
from a seeded generator). Covariances are kept symmetric positive
definite by adding a small diagonal floor after every M-step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

COV_REG = 1e-6
DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 200
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class Gaussian:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape must match mean dimension")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    def logpdf(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        L = np.linalg.cholesky(self.cov)
        diff = x - self.mean
        z = np.linalg.solve(L, diff.T)
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        out = -0.5 * (self.dim * LOG_2PI + logdet + np.sum(z * z, axis=0))
        return out if out.size > 1 else out[0] if x.shape[0] == 1 else out

    def pdf(self, x: np.ndarray) -> np.ndarray:
        return np.exp(self.logpdf(x))


@dataclass(frozen=True)
class MixtureModel:
    weights: np.ndarray
    components: tuple[Gaussian, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        comps = tuple(self.components)
        if len(comps) < 1 or w.size != len(comps):
            raise ValueError("weights and components must align, K >= 1")
        if abs(float(w.sum()) - 1.0) > 1e-9 or np.any(w <= 0):
            raise ValueError("weights must be positive and sum to 1")
        dims = {g.dim for g in comps}
        if len(dims) != 1:
            raise ValueError("components must share a dimension")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def log_likelihood(self, data: np.ndarray) -> float:
        return float(np.sum(_mixture_log_density(self, np.asarray(data, dtype=float))))


@dataclass(frozen=True)
class FitReport:
    log_likelihood: float
    iterations: int
    converged: bool
    bic: float
    log_likelihood_trace: tuple[float, ...] = ()


def _component_logpdfs(model: MixtureModel, data: np.ndarray) -> np.ndarray:
    """(N, K) matrix of log N(x_n; mu_k, Sigma_k)."""
    n = data.shape[0]
    out = np.empty((n, model.k))
    for k, g in enumerate(model.components):
        L = np.linalg.cholesky(g.cov)
        diff = data - g.mean
        z = np.linalg.solve(L, diff.T)
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        out[:, k] = -0.5 * (g.dim * LOG_2PI + logdet + np.sum(z * z, axis=0))
    return out

def _mixture_log_density(model: MixtureModel, data: np.ndarray) -> np.ndarray:
    lp = _component_logpdfs(model, data) + np.log(model.weights)
    m = lp.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(lp - m).sum(axis=1, keepdims=True))).ravel()


def _kmeans_pp_centers(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = data.shape[0]
    centers = [data[rng.integers(n)]]
    for _ in range(1, k):
        d2 = np.min(
            [np.sum((data - c) ** 2, axis=1) for c in centers], axis=0
        )
        total = d2.sum()
        if total <= 0:
            centers.append(data[rng.integers(n)])
            continue
        probs = d2 / total
        centers.append(data[rng.choice(n, p=probs)])
    return np.array(centers)


def _regularize(cov: np.ndarray) -> np.ndarray:
    cov = 0.5 * (cov + cov.T)
    cov = cov + COV_REG * np.eye(cov.shape[0])
    # Bump the floor until Cholesky succeeds (pathological degenerate data).
    bump = COV_REG
    while True:
        try:
            np.linalg.cholesky(cov)
            return cov
        except np.linalg.LinAlgError:
            bump *= 10.0
            cov = cov + bump * np.eye(cov.shape[0])


def em_fit(
    data,
    k: int,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[MixtureModel, FitReport]:
    """Fit a K-component full-covariance mixture with EM.

    Initialization is k-means++ on a generator seeded from `seed`, so
    results are reproducible. The per-iteration log-likelihood trace is
    kept on the report (EM guarantees it is non-decreasing).
    """
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    n, d = data.shape
    if not np.all(np.isfinite(data)):
        raise ValueError("non-finite data")
    if k < 1 or n < k:
        raise ValueError(f"need at least k={k} points, got {n}")

    rng = np.random.default_rng(seed)
    means = _kmeans_pp_centers(data, k, rng)
    overall_cov = _regularize(np.cov(data.T) if n > 1 else np.eye(d))
    if overall_cov.ndim == 0:
        overall_cov = overall_cov.reshape(1, 1)
    covs = np.array([overall_cov] * k)
    weights = np.full(k, 1.0 / k)

    trace: list[float] = []
    converged = False
    it = 0
    log_resp = None
    for it in range(1, max_iter + 1):
        model = MixtureModel(
            weights, tuple(Gaussian(means[j], covs[j]) for j in range(k))
        )
        # E-step
        lp = _component_logpdfs(model, data) + np.log(weights)
        m = lp.max(axis=1, keepdims=True)
        log_norm = m + np.log(np.exp(lp - m).sum(axis=1, keepdims=True))
        ll = float(log_norm.sum())
        trace.append(ll)
        if len(trace) >= 2:
            prev = trace[-2]
            if abs(ll - prev) <= tol * max(1.0, abs(prev)):
                converged = True
                break
        resp = np.exp(lp - log_norm)
        # M-step
        nk = resp.sum(axis=0) + 1e-300
        weights = nk / n
        weights = weights / weights.sum()
        means = (resp.T @ data) / nk[:, None]
        for j in range(k):
            diff = data - means[j]
            cov = (resp[:, j][:, None] * diff).T @ diff / nk[j]
            covs[j] = _regularize(cov)

    model = MixtureModel(weights, tuple(Gaussian(means[j], covs[j]) for j in range(k)))
    if not converged:
        # Loop ended on max_iter after an M-step; account for it.
        trace.append(model.log_likelihood(data))
    ll = trace[-1]
    report = FitReport(
        log_likelihood=ll,
        iterations=it,
        converged=converged,
        bic=bic_score(ll, k, d, n),
        log_likelihood_trace=tuple(trace),
    )
    return model, report


def n_free_parameters(k: int, d: int) -> int:
    """Free parameters of a K-component full-covariance mixture in D dims."""
    return (k - 1) + k * d + k * d * (d + 1) // 2


def bic_score(log_likelihood: float, k: int, d: int, n: int) -> float:
    return -2.0 * log_likelihood + n_free_parameters(k, d) * math.log(n)


def bic(model: MixtureModel, data) -> float:
    """BIC of a fitted mixture on the given data (lower is better)."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[0] == 0:
        raise ValueError("empty data")
    return bic_score(model.log_likelihood(data), model.k, model.dim, data.shape[0])


def select_k(
    data,
    k_range: tuple[int, int] = (2, 8),
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[int, dict[int, FitReport]]:
    """Pick the component count minimizing BIC over an inclusive range.

    Each candidate k is fitted with seed `seed + k` (fixed schedule), so
    selection is deterministic. Ties break toward smaller k.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    lo, hi = k_range
    hi = min(hi, data.shape[0])
    if lo > hi or lo < 1:
        raise ValueError(f"empty candidate range [{lo}, {hi}]")
    reports: dict[int, FitReport] = {}
    best_k, best_bic = lo, math.inf
    for k in range(lo, hi + 1):
        _, rep = em_fit(data, k, seed=seed + k, tol=tol, max_iter=max_iter)
        reports[k] = rep
        if rep.bic < best_bic:
            best_k, best_bic = k, rep.bic
    return best_k, reports


def gaussian_product(gs: list[Gaussian] | tuple[Gaussian, ...]) -> Gaussian:
    """Precision-weighted fusion of Gaussians (unnormalized density product)."""
    gs = list(gs)
    if not gs:
        raise ValueError("need at least one Gaussian")
    d = gs[0].dim
    if any(g.dim != d for g in gs):
        raise ValueError("dimension mismatch")
    precision = np.zeros((d, d))
    info = np.zeros(d)
    for g in gs:
        p = np.linalg.inv(g.cov)
        precision += p
        info += p @ g.mean
    cov = np.linalg.inv(precision)
    cov = 0.5 * (cov + cov.T)
    return Gaussian(cov @ info, cov)


def gmr(
    model: MixtureModel,
    in_dims,
    out_dims,
    x_in,
) -> Gaussian:
    """Condition the mixture on input dims, moment-matched to one Gaussian."""
    mean, cov = gmr_batch(model, in_dims, out_dims, np.atleast_2d(x_in))
    return Gaussian(mean[0], cov[0])


def gmr_batch(model: MixtureModel, in_dims, out_dims, x_in):
    """Vectorized GMR over a batch of query inputs.

    Returns (means (M, Do), covariances (M, Do, Do)); the covariance is
    the moment-matched mixture covariance (includes inter-component
    spread).
    """
    in_dims = list(in_dims)
    out_dims = list(out_dims)
    if set(in_dims) & set(out_dims):
        raise ValueError("in_dims and out_dims must be disjoint")
    if max(in_dims + out_dims) >= model.dim or min(in_dims + out_dims) < 0:
        raise ValueError("dimension index out of range")
    x = np.atleast_2d(np.asarray(x_in, dtype=float))
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite query input")
    m, k = x.shape[0], model.k
    do = len(out_dims)

    cond_means = np.empty((k, m, do))
    cond_covs = np.empty((k, do, do))
    log_w = np.empty((k, m))
    for j, g in enumerate(model.components):
        mu_i = g.mean[in_dims]
        mu_o = g.mean[out_dims]
        s_ii = g.cov[np.ix_(in_dims, in_dims)]
        s_oi = g.cov[np.ix_(out_dims, in_dims)]
        s_oo = g.cov[np.ix_(out_dims, out_dims)]
        gi = Gaussian(mu_i, s_ii)
        log_w[j] = np.log(model.weights[j]) + np.atleast_1d(gi.logpdf(x))
        gain = s_oi @ np.linalg.inv(s_ii)
        cond_means[j] = mu_o + (x - mu_i) @ gain.T
        cc = s_oo - gain @ s_oi.T
        cond_covs[j] = 0.5 * (cc + cc.T)

    mx = log_w.max(axis=0, keepdims=True)
    h = np.exp(log_w - mx)
    h /= h.sum(axis=0, keepdims=True)  # (K, M) responsibilities

    means = np.einsum("km,kmd->md", h, cond_means)
    covs = np.einsum("km,kde->mde", h, cond_covs)
    dev = cond_means - means[None, :, :]
    covs += np.einsum("km,kmd,kme->mde", h, dev, dev)
    return means, covs

"""Acceptance gate: one test (and one printed PASS/FAIL line) per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines; the
full guided-teaching suites are executed once per session.
"""
from __future__ import annotations

import math
import time

import numpy as np
import pytest

from mazeteach import tpgmm
from mazeteach.experiment import ExperimentConfig, compare, records_to_csv, run_suite
from mazeteach.geometry import Point2, Trajectory
from mazeteach.gmm import Gaussian, MixtureModel, em_fit, gaussian_product, gmr
from mazeteach.guidance import (
    P_FLOOR,
    EntropyWeights,
    GuidanceState,
    compute_features,
    entropy_next,
    heuristic_next,
    region_entropy,
)
from mazeteach.metrics import summarize
from mazeteach.task import (
    EvaluationResult,
    Outcome,
    build_grid,
    builtin_task_path,
    evaluate_trajectory,
)
from mazeteach.tpgmm import Demonstration, make_frames, reproduce

SEED = 7


def _check(name: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="session")
def bank_path(tmp_path_factory, training_bank):
    path = tmp_path_factory.mktemp("acceptance") / "training_bank.json"
    training_bank.save(path)
    return path


def _config(bank_path, **kw):
    return ExperimentConfig(
        task_path=str(builtin_task_path("training")),
        bank_path=str(bank_path),
        seed=SEED,
        **kw,
    )


@pytest.fixture(scope="session")
def planner_suite(training_spec, training_bank, bank_path):
    config = _config(bank_path, sources=("planner",))
    t0 = time.monotonic()
    records = run_suite(config, spec=training_spec, bank=training_bank)
    return config, records, time.monotonic() - t0


@pytest.fixture(scope="session")
def noisy_suite(training_spec, training_bank, bank_path):
    config = _config(bank_path, sources=("noisy",))
    return config, run_suite(config, spec=training_spec, bank=training_bank)


def test_criterion_entropy_beats_heuristic(planner_suite):
    config, records, elapsed = planner_suite
    summary = summarize(records, seed=SEED)
    e = summary.group("entropy", "planner")
    h = summary.group("heuristic", "planner")
    ratio = e.mean_efficiency / h.mean_efficiency
    disjoint = e.ci_low > h.ci_high
    ok = (
        e.n_trials == 56
        and h.n_trials == 56
        and e.mean_efficiency > h.mean_efficiency
        and (disjoint or ratio >= 1.2)
        and elapsed < 300.0
    )
    _check(
        "entropy-vs-heuristic",
        ok,
        f"mean eta entropy={e.mean_efficiency:.4f} [{e.ci_low:.4f},{e.ci_high:.4f}] "
        f"heuristic={h.mean_efficiency:.4f} [{h.ci_low:.4f},{h.ci_high:.4f}] "
        f"ratio={ratio:.3f} CIs disjoint={disjoint} 112 trials in {elapsed:.0f}s",
    )


def test_criterion_robustness_to_quality(planner_suite, noisy_suite):
    _, planner_records, _ = planner_suite
    _, noisy_records = noisy_suite
    c = compare(planner_records + noisy_records, seed=SEED)
    ok = c.degradations["entropy"] < c.degradations["heuristic"]
    _check(
        "robustness-to-quality",
        ok,
        "relative degradation entropy={:.1%} heuristic={:.1%}".format(
            c.degradations["entropy"], c.degradations["heuristic"]
        ),
    )


def test_criterion_termination_and_consistency(planner_suite, noisy_suite):
    _, planner_records, _ = planner_suite
    _, noisy_records = noisy_suite
    all_records = planner_records + noisy_records
    entropy_planner = [r for r in planner_records if r.rule == "entropy"]
    conv_rate = np.mean([r.converged for r in entropy_planner])
    identity_ok = all(
        r.efficiency == r.efficacy / r.demo_count for r in all_records
    )
    converged_ok = all(
        r.efficacy >= 0.9 for r in all_records if r.converged
    )
    capped_ok = all(r.demo_count <= 20 for r in all_records)
    ok = conv_rate >= 0.8 and identity_ok and converged_ok and capped_ok
    _check(
        "termination-and-consistency",
        ok,
        f"entropy/planner convergence={conv_rate:.2f} (need >=0.80), "
        f"eta*|D|==eps exact={identity_ok}, converged=>coverage>=0.9={converged_ok}",
    )


def test_criterion_learner_properties(training_spec, training_bank):
    # (a) EM monotonicity on 20 random fixtures, slack 1e-9.
    mono = True
    for seed in range(20):
        rng = np.random.default_rng(seed)
        data = np.vstack(
            [rng.normal(c, 0.7, size=(60, 2)) for c in ((0, 0), (6, 6))]
        )
        _, rep = em_fit(data, k=3, seed=seed)
        mono &= bool(np.all(np.diff(rep.log_likelihood_trace) >= -1e-9))

    # (b) gaussian_product vs dense-grid density multiplication, < 1e-6.
    g1 = Gaussian(np.array([0.0, 0.0]), np.array([[1.0, 0.2], [0.2, 0.5]]))
    g2 = Gaussian(np.array([1.0, -0.5]), np.array([[0.6, -0.1], [-0.1, 1.2]]))
    prod = gaussian_product([g1, g2])
    xs = np.linspace(-3, 3, 161)
    xx, yy = np.meshgrid(xs, xs)
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    raw = g1.pdf(pts) * g2.pdf(pts)
    cell = (xs[1] - xs[0]) ** 2
    numeric = raw / (raw.sum() * cell)
    analytic = prod.pdf(pts)
    analytic = analytic / (analytic.sum() * cell)
    product_err = float(np.max(np.abs(numeric - analytic)))

    # (c) K=1 GMR equals closed-form conditioning within 1e-10.
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 3))
    cov = A @ A.T + 3 * np.eye(3)
    mean = rng.normal(size=3)
    model = MixtureModel(np.array([1.0]), (Gaussian(mean, cov),))
    gmr_err = 0.0
    for x in (-1.0, 0.3, 2.2):
        out = gmr(model, [0], [1, 2], [x])
        mu = mean[1:] + cov[1:, 0] / cov[0, 0] * (x - mean[0])
        sig = cov[1:, 1:] - np.outer(cov[1:, 0], cov[1:, 0]) / cov[0, 0]
        gmr_err = max(
            gmr_err,
            float(np.max(np.abs(out.mean - mu))),
            float(np.max(np.abs(out.cov - sig))),
        )

    # (d) TP-GMM translation equivariance within 1e-6 cm.
    t = np.linspace(0.0, 1.0, 60)
    base_pts = np.column_stack([10 * t + 2 * np.sin(2 * np.pi * t), 20 * t])
    demos = []
    for x0 in (0.0, 5.0):
        pts = base_pts + np.array([x0, 0.0])
        traj = Trajectory(t, pts)
        demos.append(Demonstration(traj, make_frames(traj.start, traj.end)))
    m1 = tpgmm.fit(demos, k=4, seed=0)
    frames = make_frames(Point2(2.0, 0.0), demos[0].trajectory.end)
    base = reproduce(m1, frames, n_steps=50)
    dx, dy = 7.3, -11.9
    shifted = [
        Demonstration(
            d.trajectory.translated(dx, dy),
            make_frames(
                Point2(d.trajectory.start.x + dx, d.trajectory.start.y + dy),
                Point2(d.trajectory.end.x + dx, d.trajectory.end.y + dy),
            ),
        )
        for d in demos
    ]
    m2 = tpgmm.fit(shifted, k=4, seed=0)
    frames2 = make_frames(
        Point2(2.0 + dx, dy), Point2(demos[0].trajectory.end.x + dx,
                                     demos[0].trajectory.end.y + dy)
    )
    moved = reproduce(m2, frames2, n_steps=50)
    equiv_err = float(np.max(np.abs(moved.points - (base.points + [dx, dy]))))

    # (e) single-demo self-reproduction endpoint within goal tolerance,
    # for every grid point of the training task.
    grid = build_grid(training_spec.grid)
    worst = 0.0
    for i, p in enumerate(grid):
        demo = training_bank.demonstration("planner", i)
        m = tpgmm.fit([demo], seed=SEED)
        traj = reproduce(m, training_spec.query_frames(p))
        out = evaluate_trajectory(traj, training_spec, training_spec.goal_for(p))
        worst = max(worst, out.d_goal)
    tol = training_spec.criteria.goal_tolerance

    ok = (
        mono
        and product_err < 1e-6
        and gmr_err < 1e-10
        and equiv_err < 1e-6
        and worst <= tol
    )
    _check(
        "learner-properties",
        ok,
        f"EM monotone={mono}, product oracle err={product_err:.2e}, "
        f"K=1 GMR err={gmr_err:.2e}, equivariance err={equiv_err:.2e} cm, "
        f"worst self-repro d_goal={worst:.3f} cm (tol {tol})",
    )


def _eval_result(failed, n, d_goal=None):
    outcomes = []
    for i in range(n):
        bad = i in failed
        outcomes.append(
            Outcome(
                success=not bad,
                d_goal=d_goal[i] if d_goal else (8.0 if bad else 0.5),
                n_collision=3 if bad else 0,
                n_outside=0,
            )
        )
    return EvaluationResult.from_outcomes(outcomes)


def test_criterion_guidance_properties():
    # Entropy formula on 1000 random p, tolerance 1e-12.
    rng = np.random.default_rng(0)
    ps = rng.uniform(1e-9, 1.0, size=1000)
    formula_ok = all(
        abs(region_entropy(float(p)) - (-p * np.log(p))) <= 1e-12 for p in ps
    )
    extrema_ok = region_entropy(1.0) == 0.0 and math.isclose(
        region_entropy(1 / math.e), 1 / math.e, abs_tol=1e-15
    )

    # Max-normalization makes the argmax invariant under common scaling.
    grid = [Point2(c * 3.0, r * 3.0) for r in range(3) for c in range(3)]
    scale_ok = True
    for trial in range(20):
        rng2 = np.random.default_rng(trial)
        d = rng2.uniform(0.0, 10.0, 9)
        failed = {i for i in range(9) if d[i] > 2.0}
        s1 = GuidanceState(grid)
        s1.update_evaluation(_eval_result(failed, 9, d_goal=list(d)))
        s2 = GuidanceState(grid)
        s2.update_evaluation(_eval_result(failed, 9, d_goal=list(4.2 * d)))
        scale_ok &= entropy_next(s1) == entropy_next(s2)

    # Heuristic phases on three hand-computed fixtures.
    s = GuidanceState(grid, rule="heuristic")
    s.record_demo(4)
    s.update_evaluation(_eval_result({1, 5}, 9))
    phase2_ok = heuristic_next(s) == 1  # nearest failed near the first demo

    s = GuidanceState(grid, rule="heuristic")
    s.record_demo(0)
    s.update_evaluation(_eval_result({5, 7, 8}, 9))
    phase3_ok = heuristic_next(s) == 5  # densest failure cluster by a success

    wide = [Point2(c * 5.0, r * 5.0) for r in range(3) for c in range(3)]
    s = GuidanceState(wide, rule="heuristic")
    s.record_demo(0)
    s.update_evaluation(_eval_result({2, 8}, 9))
    fallback_ok = heuristic_next(s) == 2  # no candidate within 4 cm

    # No rule ever repeats a demonstrated point.
    no_repeat_ok = True
    for rule_fn in (entropy_next, heuristic_next):
        state = GuidanceState(grid)
        state.update_evaluation(_eval_result({0, 1, 2, 3}, 9))
        state.record_demo(4)
        seen = {4}
        for _ in range(8):
            nxt = rule_fn(state)
            no_repeat_ok &= nxt not in seen
            seen.add(nxt)
            state.record_demo(nxt)

    ok = (
        formula_ok
        and extrema_ok
        and scale_ok
        and phase2_ok
        and phase3_ok
        and fallback_ok
        and no_repeat_ok
    )
    _check(
        "guidance-properties",
        ok,
        f"formula={formula_ok} extrema={extrema_ok} scaling={scale_ok} "
        f"heuristic fixtures=({phase2_ok},{phase3_ok},{fallback_ok}) "
        f"no-repeat={no_repeat_ok}",
    )


def test_criterion_task_fixtures(
    training_spec, transfer_spec, training_bank, bank_path, planner_suite
):
    grids_ok = (
        len(build_grid(training_spec.grid)) == 56
        and len(build_grid(transfer_spec.grid)) == 32
    )

    grid = build_grid(training_spec.grid)
    bank_ok = True
    for i, p in enumerate(grid):
        traj = training_bank.trajectory("planner", i)
        out = evaluate_trajectory(traj, training_spec, training_spec.goal_for(p))
        bank_ok &= out.success

    # Byte-identical rerun: a fresh entropy/planner suite must serialize
    # to exactly the same CSV as that slice of the session's suite run.
    config, records, _ = planner_suite
    subset = [r for r in records if r.rule == "entropy"]
    rerun_config = _config(bank_path, rules=("entropy",), sources=("planner",))
    rerun = run_suite(rerun_config, spec=training_spec, bank=training_bank)
    byte_ok = records_to_csv(subset, SEED) == records_to_csv(rerun, SEED)

    ok = grids_ok and bank_ok and byte_ok
    _check(
        "task-fixtures",
        ok,
        f"grids 56/32={grids_ok}, bank demos self-pass={bank_ok}, "
        f"byte-identical rerun={byte_ok}",
    )

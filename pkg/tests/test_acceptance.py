"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test records a PASS/FAIL line in ``RESULTS``; the lines are printed in
the pytest terminal summary, or directly when this file is run as a script.
"""

import itertools
import sys
import time
from fractions import Fraction as Fr

import numpy as np
import pytest

from risdof.channel import PhaseVector, RisChannel, absorb_direct_path, apply, sample_channel
from risdof.dof import DofSpec, dof_joint, dof_phase_only, dof_region
from risdof.harness import ExperimentConfig, run_feasgrid, run_transition
from risdof.manifold import project_tangent, retract
from risdof.numerics import Rng, gaussian_complex
from risdof.optimizer import (
    augmented_lagrangian,
    grad_phi_euclidean,
    grad_x,
    objective,
    random_start,
)
from risdof.precoding import Constellation, SlpProblem, ml_decode, solve

RESULTS = {}

pytestmark = pytest.mark.slow


def record(num, ok, detail):
    RESULTS[num] = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    assert ok, RESULTS[num]


def cvec(rng, n, scale=1.0):
    z = rng.gen.standard_normal((n, 2))
    return scale * (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2)


# 1 ---------------------------------------------------------------------------

def test_phase_transition():
    t0 = time.perf_counter()
    crossings = {}
    stalled = 0
    for direct in (False, True):
        cfg = ExperimentConfig(m=2, k_list=(4,), p=10.0, delta=1e-3, trials=200,
                               n_min=2, n_max=8, restarts=4, direct=direct, seed=0)
        res = run_transition(cfg)
        crossings[direct] = res.crossing(4, 0.5)
        stalled += res.stalled
    c0, c1 = crossings[False], crossings[True]
    ok = 4 <= c0 <= 6 and 3 <= c1 <= 5 and c1 <= c0
    record(1, ok, f"50% crossing no-direct {c0:.3f} (want [4,6]), direct {c1:.3f} "
                  f"(want [3,5]), stalled {stalled}, {time.perf_counter() - t0:.0f}s")


# 2 ---------------------------------------------------------------------------

GRID_SEED = 8


def test_feasibility_grid():
    fr = {}
    for n in (4, 5, 6):
        cfg = ExperimentConfig(kind="feasgrid", m=2, n=n, k=4, p=1.0, grid_res=41,
                               grid_extent=1.0, seed=GRID_SEED)
        fr[n] = run_feasgrid(cfg).feasible_fraction(min_abs=0.1)
    ok = fr[4] < 0.05 and fr[5] > fr[4] and fr[6] > fr[5] and fr[5] > 0.10
    record(2, ok, f"channel seed {GRID_SEED}: feasible fraction N=4 {fr[4]:.3f}, "
                  f"N=5 {fr[5]:.3f}, N=6 {fr[6]:.3f}")


def test_feasibility_grid_across_channels():
    # not a criterion: how typical the single-channel picture is
    seeds = range(10)
    fr = {n: [] for n in (4, 5, 6)}
    for seed in seeds:
        for n in fr:
            cfg = ExperimentConfig(kind="feasgrid", m=2, n=n, k=4, p=1.0, grid_res=11,
                                   grid_extent=1.0, seed=seed)
            fr[n].append(run_feasgrid(cfg).feasible_fraction(min_abs=0.1))
    mean = {n: float(np.mean(v)) for n, v in fr.items()}
    RESULTS["2b"] = (f"INFO mean feasible fraction over {len(seeds)} channels (11x11): "
                     f"N=4 {mean[4]:.3f}, N=5 {mean[5]:.3f}, N=6 {mean[6]:.3f}")
    assert max(fr[4]) < 0.05
    assert mean[4] < mean[5] < mean[6]


# 3 ---------------------------------------------------------------------------

def fd_gradient(fun, z, h=1e-5):
    out = np.zeros_like(z)
    for i in range(z.shape[0]):
        e = np.zeros_like(z)
        e[i] = h
        out[i] = ((fun(z + e) - fun(z - e)) + 1j * (fun(z + 1j * e) - fun(z - 1j * e))) / (2 * h)
    return out


def test_gradient_oracle():
    worst = 0.0
    active = 0
    for inst in range(10):
        rng = Rng(300, (inst,))
        m, n, k = (int(rng.gen.integers(1, 5)), int(rng.gen.integers(1, 9)),
                   int(rng.gen.integers(1, 7)))
        ch = sample_channel(rng, m, n, k, direct_path=bool(inst % 2), p=float(rng.gen.uniform(0.5, 5)))
        t = cvec(rng, k)
        for pt in range(10):
            # half the points sit outside the ball so the penalty is active
            x = cvec(rng, m)
            x *= (1.3 if pt % 2 else 0.7) / np.linalg.norm(x)
            phi = PhaseVector(rng.uniform_phase(n)).phi
            lam, rho = float(rng.gen.uniform(0, 2)), float(rng.gen.uniform(0.5, 10))
            active += lam / rho + np.linalg.norm(x) ** 2 - 1 > 0

            def lag(z):
                return augmented_lagrangian(objective(ch, t, z, phi), z, lam, rho)

            gx, fx = grad_x(ch, t, x, phi, lam, rho), fd_gradient(lag, x)
            gp = grad_phi_euclidean(ch, t, x, phi)
            fp = fd_gradient(lambda z: objective(ch, t, x, z), phi)
            for g, f in ((gx, fx), (gp, fp)):
                worst = max(worst, np.linalg.norm(g - f) / max(np.linalg.norm(f), 1e-12))
    record(3, worst < 1e-6 and active >= 50,
           f"max relative error {worst:.2e} over 100 points (want < 1e-6), "
           f"{active} with active penalty")


# 4 ---------------------------------------------------------------------------

def test_manifold_properties():
    rng = Rng(400)
    idem = tang = unit = 0.0
    ratios = []
    for _ in range(1000):
        n = int(rng.gen.integers(1, 9))
        phi = PhaseVector(rng.uniform_phase(n)).phi
        z = cvec(rng, n, 3.0)
        g = project_tangent(phi, z).z
        idem = max(idem, np.max(np.abs(project_tangent(phi, g).z - g)))
        tang = max(tang, np.max(np.abs(np.real(g * np.conj(phi)))))
        unit = max(unit, np.max(np.abs(np.abs(retract(phi + g).phi) - 1)))
        v = g / max(np.linalg.norm(g), 1e-300)
        e = [np.linalg.norm(retract(phi + t * v).phi - (phi + t * v)) for t in (1e-3, 1e-4)]
        ratios.append(e[0] / e[1])
    lo, hi = min(ratios), max(ratios)
    ok = idem < 1e-12 and tang < 1e-10 and unit < 1e-12 and lo >= 50 and hi <= 200
    record(4, ok, f"idempotence {idem:.1e}, tangency {tang:.1e}, unit modulus {unit:.1e}, "
                  f"remainder ratio in [{lo:.1f}, {hi:.1f}]")


# 5 ---------------------------------------------------------------------------

def test_direct_path_reformulation():
    worst = 0.0
    for inst in range(100):
        rng = Rng(500, (inst,))
        r = 1 + inst % 2
        m, k = int(rng.gen.integers(r, 5)), int(rng.gen.integers(r, 6))
        n = int(rng.gen.integers(1, 9))
        base = sample_channel(rng, m, n, k)
        f = gaussian_complex(rng, k, r) @ gaussian_complex(rng, r, m)
        ch = RisChannel(base.h, base.g, f)
        ch2, rank = absorb_direct_path(ch)
        assert rank == r
        for _ in range(50):
            phi = PhaseVector(rng.uniform_phase(n)).phi
            x = cvec(rng, m)
            lhs = ch.matrix(phi) @ x
            rhs = ch2.h @ (np.concatenate([phi, np.ones(r)]) * (ch2.g @ x))
            worst = max(worst, np.linalg.norm(lhs - rhs) / (1 + np.linalg.norm(x)))
    record(5, worst <= 1e-10, f"max ||diff||/(1+||X||) {worst:.1e} (want <= 1e-10)")


# 6 ---------------------------------------------------------------------------

def test_solver_completeness():
    ok_count = 0
    max_norm2 = 0.0
    for inst in range(100):
        rng = Rng(600, (inst,))
        ch = sample_channel(rng.spawn(0), 2, 8, 4, p=1.0)
        x0, phi0 = random_start(rng.spawn(1), 2, 8)
        x0 = x0 * rng.gen.uniform(0.2, 1.0) / np.linalg.norm(x0)
        sol = solve(SlpProblem(ch, apply(ch, phi0, x0)), restarts=4, rng=rng.spawn(2))
        ok_count += sol.residual < 1e-3
        max_norm2 = max(max_norm2, float(np.real(np.vdot(sol.x, sol.x))))
    record(6, ok_count >= 90 and max_norm2 <= 1 + 1e-6,
           f"{ok_count}/100 solved to residual < 1e-3 (want >= 90), "
           f"max ||X||^2 {max_norm2:.9f} (want <= 1 + 1e-6)")


# 7 ---------------------------------------------------------------------------

def test_dof_exactness():
    checks = [
        # single antennas everywhere: sum DoF 1
        dof_joint(DofSpec(1, 1, 1)) == 1,
        dof_region(DofSpec(1, 1, 1)).sum_bound == 1,
        dof_phase_only(DofSpec(1, 1, 1)) == Fr(1, 2),
        # N=5 RIS elements reach DoF 4 with M=2, K=4
        dof_joint(DofSpec(2, 5, 4)) == 4,
        dof_joint(DofSpec(2, 4, 4)) == Fr(7, 2),
        dof_region(DofSpec(2, 8, 10)).shape == "pentagon",
        dof_region(DofSpec(2, 8, 10)).vertices
        == ((0, 0), (2, 0), (2, Fr(7, 2)), (Fr(3, 2), 4), (0, 4)),
        dof_region(DofSpec(2, 8, 10, 1)).shape == "rectangle",
        dof_region(DofSpec(2, 8, 10, 1)).sum_bound == 6,
        dof_region(DofSpec(4, 8, 3)).shape == "simplex",
        dof_region(DofSpec(4, 8, 3)).vertices == ((0, 0), (3, 0), (0, 3)),
        # a rank-r direct path lifts the RIS-limited sum DoF by r while
        # N/2 + r <= M <= N + r <= K; past that the M + N/2 term binds
        all(dof_joint(DofSpec(4, 4, 10, r)) == 4 + r for r in range(3)),
        dof_joint(DofSpec(4, 4, 10, 3)) == 6,
        dof_phase_only(DofSpec(2, 8, 4)) == 4,
        dof_phase_only(DofSpec(2, 6, 4)) == 3,
        dof_joint(DofSpec(2, 4, 4, 1)) == 4,
    ]
    record(7, all(checks), f"{sum(checks)}/{len(checks)} exact rational checks hold")


# 8 ---------------------------------------------------------------------------

def reference_decode(ch, y, pairs, tol=1e-12):
    metrics = []
    for x, phi in pairs:
        a = np.sqrt(ch.p) * (ch.h @ np.diag(phi) @ ch.g + ch.f)
        metrics.append(float(np.sum(np.abs(y - a @ x) ** 2)))
    best = min(metrics)
    tied = [i for i, v in enumerate(metrics) if v <= best + tol * (1 + best)]
    return tied[0], best, len(tied) > 1


def test_ml_decoder_oracle():
    agree = total = 0
    for inst in range(50):
        rng = Rng(800, (inst,))
        m, n, k = int(rng.gen.integers(1, 3)), int(rng.gen.integers(1, 4)), int(rng.gen.integers(1, 4))
        ch = sample_channel(rng, m, n, k, direct_path=bool(inst % 2), p=4.0)
        order = int(rng.gen.choice([2, 4]))
        n_x = max(1, min(8, 256 // order**n))
        xs = [random_start(rng, m, 1)[0] for _ in range(n_x)]
        const = Constellation.psk_product(xs, n, order)
        assert len(const) <= 256
        for level in range(20):
            i0 = int(rng.gen.integers(len(const)))
            x0, phi0 = const.pairs[i0]
            sigma = 0.0 if level == 0 else 10 ** (-3 + 0.2 * level)
            y = apply(ch, phi0, x0) + sigma * cvec(rng, k)
            res = ml_decode(ch, y, const)
            ref = reference_decode(ch, y, const.pairs)
            total += 1
            agree += (res.index, res.tie) == (ref[0], ref[2]) and abs(res.metric - ref[1]) <= 1e-9 * (1 + ref[1])
    siso = RisChannel(np.ones((1, 1)), np.ones((1, 1)), np.zeros((1, 1)))
    amb = Constellation([(np.array([1.0]), PhaseVector(np.array([np.pi]))),
                         (np.array([-1.0]), PhaseVector(np.array([0.0])))])
    res = ml_decode(siso, np.array([-1.0]), amb)
    tie_ok = res.index == 0 and res.tie
    record(8, agree == total and tie_ok,
           f"{agree}/{total} decodes match the exhaustive reference; "
           f"SISO ambiguity tie reported: {tie_ok}")


if __name__ == "__main__":
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    failed = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failed += 1
    for key in sorted(RESULTS, key=str):
        print(RESULTS[key])
    sys.exit(1 if failed else 0)

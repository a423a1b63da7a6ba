"""Augmented Lagrangian + Riemannian conjugate gradient precoding solver.

Solves

    min_{X, phi}  ||Y_hat - sqrt(P) (H diag(phi) G + F) X||^2
    s.t.          ||X||^2 <= 1,  |phi_i| = 1.

The power constraint is handled by an augmented Lagrangian outer loop with a
clipped multiplier update; each subproblem is minimized jointly over
(X, phi) by conjugate gradient on C^M x (circle)^N with Hestenes-Stiefel
updates, projection transport and normalization retraction.

Gradients use the real-coordinate convention: for f real-valued,
``grad = df/dRe + j df/dIm``.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .channel import PhaseVector, as_phi
from .manifold import project_tangent
from .numerics import DimensionError, as_cvec

STOP_CONVERGED = "converged"
STOP_MAX_OUTER = "max_outer_iters"

DEFAULT_DELTA = 1e-3


@dataclass(frozen=True)
class AlmParams:
    eps0: float = 1e-3
    eps_min: float = 1e-6
    theta_eps: float = 1000.0 ** (-1.0 / 30.0)
    rho0: float = 1.0
    theta_rho: float = 10.0
    theta_sigma: float = 0.8
    lam0: float = 1.0
    lam_max: float = 1e4
    d_min: float = 1e-6
    # violations below this are treated as met and never raise rho
    sigma_tol: float = 1e-6
    # line search and iteration caps
    armijo_c: float = 1e-4
    step_shrink: float = 0.5
    alpha_init: float = 1.0
    max_backtracks: int = 50
    max_inner_iters: int = 2000
    max_outer_iters: int = 60

    def __post_init__(self):
        checks = [
            (0 < self.theta_eps < 1, "theta_eps must lie in (0, 1)"),
            (self.theta_rho > 1, "theta_rho must exceed 1"),
            (0 < self.theta_sigma < 1, "theta_sigma must lie in (0, 1)"),
            (0 < self.eps_min <= self.eps0, "need 0 < eps_min <= eps0"),
            (self.rho0 > 0, "rho0 must be positive"),
            (self.lam_max > 0, "lam_max must be positive"),
            (0 <= self.lam0 <= self.lam_max, "lam0 must lie in [0, lam_max]"),
            (self.d_min > 0, "d_min must be positive"),
            (self.sigma_tol >= 0, "sigma_tol must be nonnegative"),
            (0 < self.armijo_c < 1, "armijo_c must lie in (0, 1)"),
            (0 < self.step_shrink < 1, "step_shrink must lie in (0, 1)"),
            (self.alpha_init > 0, "alpha_init must be positive"),
            (self.max_backtracks >= 1, "max_backtracks must be >= 1"),
            (self.max_inner_iters >= 1, "max_inner_iters must be >= 1"),
            (self.max_outer_iters >= 1, "max_outer_iters must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class SlpSolution:
    x: np.ndarray
    phi: PhaseVector
    residual: float
    feasible: bool
    outer_iters: int = 0
    inner_iters: int = 0
    stop_reason: str = STOP_CONVERGED
    stalled: bool = False
    history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        from .numerics import encode_complex

        return {
            "x": encode_complex(self.x),
            "theta": [float(t) for t in self.phi.theta],
            "residual": self.residual,
            "feasible": self.feasible,
            "outer_iters": self.outer_iters,
            "inner_iters": self.inner_iters,
            "stop_reason": self.stop_reason,
            "stalled": self.stalled,
        }


def _prepare(ch, target, x, phi):
    target = as_cvec(target, "target")
    x = as_cvec(x, "X")
    phi = np.ascontiguousarray(as_phi(phi))
    if target.shape[0] != ch.k:
        raise DimensionError(f"target has length {target.shape[0]}, expected {ch.k}")
    if x.shape[0] != ch.m:
        raise DimensionError(f"X has length {x.shape[0]}, expected {ch.m}")
    if phi.shape[0] != ch.n:
        raise DimensionError(f"phi has length {phi.shape[0]}, expected {ch.n}")
    return target, x, phi


def _mats(ch):
    return (np.ascontiguousarray(ch.h), np.ascontiguousarray(ch.g),
            np.ascontiguousarray(ch.f), float(np.sqrt(ch.p)))


def objective(ch, target, x, phi):
    """Squared synthesis error ||target - sqrt(P) (H diag(phi) G + F) x||^2."""
    target, x, phi = _prepare(ch, target, x, phi)
    r = _kernels.residual(*_mats(ch), target, x, phi)
    return float(np.real(np.vdot(r, r)))


def augmented_lagrangian(f, x, lam, rho):
    """f + (rho/2) max(0, lam/rho + ||x||^2 - 1)^2."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    x = as_cvec(x, "X")
    t = lam / rho + float(np.real(np.vdot(x, x))) - 1.0
    return f + 0.5 * rho * max(0.0, t) ** 2


def grad_x(ch, target, x, phi, lam, rho):
    target, x, phi = _prepare(ch, target, x, phi)
    _, gx, _ = _kernels.gradients(*_mats(ch), target, x, phi, float(lam), float(rho))
    return gx


def grad_phi_euclidean(ch, target, x, phi):
    """Gradient of the objective in phi, treating phi as a free vector in C^N."""
    target, x, phi = _prepare(ch, target, x, phi)
    _, _, gp = _kernels.gradients(*_mats(ch), target, x, phi, 0.0, 1.0)
    return gp


def grad_phi_riemannian(ch, target, x, phi):
    return project_tangent(phi, grad_phi_euclidean(ch, target, x, phi))


def clip(x, lo, hi):
    if lo > hi:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    return max(lo, min(hi, x))


@dataclass
class InnerResult:
    x: np.ndarray
    phi: np.ndarray
    grad_norm: float
    iters: int
    stalled: bool
    lagrangian: np.ndarray  # L at every iterate
    armijo: np.ndarray      # c * alpha * <grad, dir> of each accepted step


def rcg_solve(ch, target, start, lam, rho, eps, params=AlmParams(), fix_x=False):
    """Minimize the augmented Lagrangian for fixed (lam, rho) to accuracy eps.

    ``fix_x`` freezes X and optimizes over the phases only.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    target, x0, phi0 = _prepare(ch, target, *start)
    lhist = np.zeros(params.max_inner_iters + 1)
    dhist = np.zeros(params.max_inner_iters)
    x, phi, gnorm, iters, status = _kernels.rcg(
        *_mats(ch), target, x0.copy(), phi0.copy(), float(lam), float(rho), float(eps),
        bool(fix_x), params.armijo_c, params.step_shrink, params.alpha_init,
        params.max_backtracks, params.max_inner_iters, lhist, dhist,
    )
    return InnerResult(x, phi, float(gnorm), int(iters), status == _kernels.STALLED,
                       lhist[: iters + 1], dhist[:iters])


def random_start(rng, m, n):
    """Uniform phases and X ~ CN(0, I/M), pulled back into the unit ball."""
    theta = rng.uniform_phase(n)
    z = rng.gen.standard_normal((m, 2))
    x = (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0 * m)
    nrm = np.linalg.norm(x)
    if nrm > 1.0:
        x = x / nrm
    return x, PhaseVector(theta)


def alm_solve(ch, target, start, params=AlmParams(), delta=DEFAULT_DELTA,
              fix_x=False, trace=None):
    """Augmented Lagrangian outer loop around :func:`rcg_solve`.

    ``trace`` may be a writable text stream; one JSON record is written per
    outer iteration.
    """
    target, x, phi = _prepare(ch, target, *start)
    x, phi = x.copy(), phi.copy()
    lam, rho, eps = params.lam0, params.rho0, params.eps0
    sigma_prev = None
    inner_total = 0
    stalled = False
    stop = STOP_MAX_OUTER
    history = []
    k = 0
    for k in range(params.max_outer_iters):
        res = rcg_solve(ch, target, (x, phi), lam, rho, eps, params, fix_x)
        inner_total += res.iters
        stalled = stalled or res.stalled
        dist = (float(np.sum(np.abs(res.x - x) ** 2))
                + float(np.sum(np.abs(res.phi - phi) ** 2)))
        x, phi = res.x, res.phi
        nx2 = float(np.real(np.vdot(x, x)))
        rec = {
            "k": k,
            "residual": float(np.sqrt(objective(ch, target, x, phi))),
            "x_norm2": nx2,
            "lam": lam,
            "rho": rho,
            "eps": eps,
            "inner_iters": res.iters,
        }
        history.append(rec)
        if trace is not None:
            trace.write(json.dumps(rec) + "\n")
        if dist < params.d_min and eps <= params.eps_min:
            stop = STOP_CONVERGED
            break
        lam_next = clip(lam + rho * (nx2 - 1.0), 0.0, params.lam_max)
        sigma = max(nx2 - 1.0, -lam / rho)
        eps = max(params.eps_min, params.theta_eps * eps)
        shrinking = k == 0 or abs(sigma) <= params.theta_sigma * abs(sigma_prev)
        if not (shrinking or abs(sigma) <= params.sigma_tol):
            rho = params.theta_rho * rho
        lam = lam_next
        sigma_prev = sigma

    nx2 = float(np.real(np.vdot(x, x)))
    if nx2 > 1.0 and not fix_x:
        # residual constraint violation left by the penalty: pull back onto the ball
        x = x / np.sqrt(nx2)
    residual = float(np.sqrt(objective(ch, target, x, phi)))
    return SlpSolution(
        x=x,
        phi=PhaseVector.from_complex(phi),
        residual=residual,
        feasible=residual < delta,
        outer_iters=k + 1,
        inner_iters=inner_total,
        stop_reason=stop,
        stalled=stalled,
        history=history,
    )

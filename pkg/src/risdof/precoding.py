"""Symbol-level precoding problems, feasibility, and exhaustive ML decoding."""

import itertools
from dataclasses import dataclass

import numpy as np

from .channel import PhaseVector, RisChannel, as_phi
from .numerics import DimensionError, as_cvec, decode_complex, encode_complex
from .optimizer import DEFAULT_DELTA, AlmParams, SlpSolution, alm_solve, random_start

JOINT = "joint"
PHASE_ONLY = "phase-only"

DEFAULT_RESTARTS = 4
DEFAULT_DECODE_CAP = 2**20


@dataclass(frozen=True)
class SlpProblem:
    """Synthesize ``target`` at the receiver.

    In ``phase-only`` mode the transmit vector is fixed to ``x`` and only the
    RIS phases are designed.
    """

    channel: RisChannel
    target: np.ndarray
    mode: str = JOINT
    x: np.ndarray = None

    def __post_init__(self):
        target = as_cvec(self.target, "target")
        if target.shape[0] != self.channel.k:
            raise DimensionError(f"target has length {target.shape[0]}, expected {self.channel.k}")
        object.__setattr__(self, "target", target)
        if self.mode not in (JOINT, PHASE_ONLY):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == PHASE_ONLY:
            if self.x is None:
                raise ValueError("phase-only mode needs a fixed transmit vector")
            x = as_cvec(self.x, "X")
            if x.shape[0] != self.channel.m:
                raise DimensionError(f"X has length {x.shape[0]}, expected {self.channel.m}")
            if np.any(np.abs(self.channel.g @ x) == 0):
                raise ValueError("G @ X has a zero entry; that RIS element carries nothing")
            object.__setattr__(self, "x", x)

    def effective_target(self):
        """Target minus the direct-path contribution (phase-only mode)."""
        ch = self.channel
        return self.target - np.sqrt(ch.p) * (ch.f @ self.x)

    def to_dict(self):
        d = self.channel.to_dict()
        d["target"] = encode_complex(self.target)
        d["mode"] = self.mode
        if self.x is not None:
            d["x"] = encode_complex(self.x)
        return d

    @classmethod
    def from_dict(cls, d):
        ch = RisChannel.from_dict(d)
        x = d.get("x")
        return cls(
            channel=ch,
            target=decode_complex(d["target"], (ch.k,)),
            mode=d.get("mode", JOINT),
            x=None if x is None else decode_complex(x, (ch.m,)),
        )


def is_feasible(solution, delta=DEFAULT_DELTA):
    if delta <= 0:
        raise ValueError("delta must be positive")
    return solution.residual < delta


def solve(problem, params=AlmParams(), restarts=DEFAULT_RESTARTS, rng=None,
          delta=DEFAULT_DELTA, early_stop=True):
    """Best solution over random restarts.

    With ``early_stop`` the remaining restarts are skipped once one of them
    is feasible.  The returned solution is flagged stalled only if every
    restart stalled.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if rng is None:
        from .numerics import Rng

        rng = Rng(0)
    ch = problem.channel
    fix_x = problem.mode == PHASE_ONLY
    best = None
    all_stalled = True
    for _ in range(restarts):
        x0, phi0 = random_start(rng, ch.m, ch.n)
        if fix_x:
            x0 = problem.x
        sol = alm_solve(ch, problem.target, (x0, phi0), params, delta, fix_x=fix_x)
        all_stalled = all_stalled and sol.stalled
        if best is None or sol.residual < best.residual:
            best = sol
        if early_stop and best.residual < delta:
            break
    best.stalled = all_stalled
    best.feasible = is_feasible(best, delta)
    return best


class Constellation:
    """Finite set of (X, phi) candidate pairs, indexed in a fixed order."""

    def __init__(self, pairs):
        pairs = [(as_cvec(x, "X"), as_phi(p)) for x, p in pairs]
        if not pairs:
            raise ValueError("constellation is empty")
        for x, _ in pairs:
            if np.real(np.vdot(x, x)) > 1.0 + 1e-12:
                raise ValueError("candidate X violates the power constraint")
        self.pairs = pairs

    @classmethod
    def product(cls, x_candidates, phi_candidates):
        """All combinations, X-major: index = i_x * len(phi) + i_phi."""
        return cls(list(itertools.product(x_candidates, phi_candidates)))

    @classmethod
    def psk_product(cls, x_candidates, n, order):
        """X candidates times per-element ``order``-PSK phases on n elements."""
        angles = 2.0 * np.pi * np.arange(order) / order
        phis = [PhaseVector(np.array(t)) for t in itertools.product(angles, repeat=n)]
        return cls.product(x_candidates, phis)

    def __len__(self):
        return len(self.pairs)


@dataclass
class Decoded:
    x: np.ndarray
    phi: np.ndarray
    metric: float
    index: int
    tie: bool


def ml_decode(ch, y, constellation, cap=DEFAULT_DECODE_CAP, tie_tol=1e-12):
    """Exhaustive minimum-distance decoding over the constellation.

    Candidates whose metric is within ``tie_tol`` (relative) of the best
    count as tied; the lowest-indexed of them is returned and ``tie`` is set.
    """
    if len(constellation) > cap:
        raise OverflowError(f"constellation has {len(constellation)} pairs, cap is {cap}")
    y = as_cvec(y, "Y")
    if y.shape[0] != ch.k:
        raise DimensionError(f"Y has length {y.shape[0]}, expected {ch.k}")
    xs = np.array([x for x, _ in constellation.pairs])
    phis = np.array([p for _, p in constellation.pairs])
    if xs.shape[1] != ch.m or phis.shape[1] != ch.n:
        raise DimensionError("constellation does not match the channel dimensions")
    sp = np.sqrt(ch.p)
    gx = xs @ ch.g.T                     # (C, N)
    out = sp * ((phis * gx) @ ch.h.T + xs @ ch.f.T)
    metrics = np.sum(np.abs(y[None, :] - out) ** 2, axis=1)
    best = float(metrics.min())
    close = np.flatnonzero(metrics <= best + tie_tol * (1.0 + best))
    i = int(close[0])
    x, p = constellation.pairs[i]
    return Decoded(x.copy(), p.copy(), float(metrics[i]), i, close.size > 1)

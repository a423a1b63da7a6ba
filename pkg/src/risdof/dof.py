"""Closed-form degree-of-freedom results for RIS channels.

All DoF values are exact :class:`fractions.Fraction` half-integers.
"""

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

HALF = Fraction(1, 2)

NONCOHERENT = "noncoherent-magnitude"
CONSTANT_ENVELOPE = "constant-envelope"


@dataclass(frozen=True)
class DofSpec:
    m: int
    n: int
    k: int
    r: int = 0  # direct-path rank, 0 when the direct path is blocked

    def __post_init__(self):
        if min(self.m, self.n, self.k) < 1:
            raise ValueError("M, N and K must be positive")
        if self.r < 0 or self.r > min(self.m, self.k):
            raise ValueError(f"direct-path rank must lie in [0, min(M, K)], got {self.r}")


def _joint_terms(spec):
    """The three candidates whose minimum is the joint DoF."""
    m, n, k, r = spec.m, Fraction(spec.n), spec.k, spec.r
    if r == 0:
        return (m + n / 2 - HALF, n, Fraction(k))
    return (m + n / 2, n + r, Fraction(k))


def dof_joint(spec):
    return min(_joint_terms(spec))


def binding_terms(spec):
    """Indices (0: transmit+RIS, 1: RIS, 2: receiver) attaining the joint DoF."""
    terms = _joint_terms(spec)
    best = min(terms)
    return [i for i, t in enumerate(terms) if t == best]


def dof_phase_only(spec):
    return min(Fraction(spec.n, 2), Fraction(spec.k))


@dataclass(frozen=True)
class Constraint:
    """Half-plane a * dof_x + b * dof_theta <= c."""

    a: Fraction
    b: Fraction
    c: Fraction

    def holds(self, pt):
        return self.a * pt[0] + self.b * pt[1] <= self.c

    def tight(self, pt):
        return self.a * pt[0] + self.b * pt[1] == self.c


@dataclass(frozen=True)
class DofRegion:
    constraints: tuple
    vertices: tuple  # counterclockwise, starting at the origin

    @property
    def x_bound(self):
        return self.constraints[0].c

    @property
    def theta_bound(self):
        return self.constraints[1].c

    @property
    def sum_bound(self):
        return self.constraints[2].c

    @property
    def shape(self):
        cx, ct, cs = self.x_bound, self.theta_bound, self.sum_bound
        if cs >= cx + ct:
            return "rectangle"
        if cs <= cx and cs <= ct:
            return "simplex"
        if cs > cx and cs > ct:
            return "pentagon"
        return "trapezoid"

    def contains(self, pt):
        return all(c.holds(pt) for c in self.constraints)

    def to_dict(self):
        return {
            "constraints": [{"a": _num(c.a), "b": _num(c.b), "c": _num(c.c)}
                            for c in self.constraints],
            "vertices": [[_num(x), _num(y)] for x, y in self.vertices],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dof_x", "dof_theta"])
        for x, y in self.vertices:
            w.writerow([format_half(x), format_half(y)])
        return buf.getvalue()


def _num(q):
    return int(q) if q.denominator == 1 else float(q)


def format_half(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else str(float(q))


def _intersect(c1, c2):
    det = c1.a * c2.b - c1.b * c2.a
    if det == 0:
        return None
    x = (c1.c * c2.b - c1.b * c2.c) / det
    y = (c1.a * c2.c - c1.c * c2.a) / det
    return (x, y)


def dof_region(spec):
    """DoF region of the multiple-access model (independent X and theta)."""
    n_half = Fraction(spec.n, 2)
    if spec.r == 0:
        cx = Fraction(min(spec.m, spec.n, spec.k))
    else:
        cx = Fraction(min(spec.m, spec.n + spec.r, spec.k))
    ct = min(n_half, Fraction(spec.k))
    cs = dof_joint(spec)
    one, zero = Fraction(1), Fraction(0)
    cons = (
        Constraint(one, zero, cx),
        Constraint(zero, one, ct),
        Constraint(one, one, cs),
        Constraint(-one, zero, zero),
        Constraint(zero, -one, zero),
    )
    pts = set()
    for c1, c2 in combinations(cons, 2):
        p = _intersect(c1, c2)
        if p is not None and all(c.holds(p) for c in cons):
            pts.add(p)
    cx_, cy_ = (sum(p[0] for p in pts) / len(pts), sum(p[1] for p in pts) / len(pts))
    ordered = sorted(pts, key=lambda p: math.atan2(p[1] - cy_, p[0] - cx_))
    start = ordered.index((zero, zero))
    ordered = ordered[start:] + ordered[:start]
    return DofRegion(cons, tuple(ordered))


def siso_rate_approx(kind, snr, x_magnitude=1.0):
    """High-SNR rate approximations (bits) for the SISO RIS channel.

    ``noncoherent-magnitude``: information in |X| only, 0.5 log2(snr) - 0.69.
    ``constant-envelope``: information in the phase for known X,
    0.5 log2(snr |X|^2) + 1.1.
    """
    if snr <= 0:
        raise ValueError("snr must be positive")
    if kind == NONCOHERENT:
        return 0.5 * math.log2(snr) - 0.69
    if kind == CONSTANT_ENVELOPE:
        if x_magnitude <= 0:
            raise ValueError("x_magnitude must be positive")
        return 0.5 * math.log2(snr * x_magnitude**2) + 1.1
    raise ValueError(f"unknown kind {kind!r}")


def expected_transition(m, k, direct):
    """RIS size at which synthesis of a generic K-vector becomes possible."""
    if k < m:
        raise ValueError("transition undefined for K < M")
    return 2 * k - 2 * m if direct else 2 * k - 2 * m + 1

"""RIS-aided MIMO channel: Y = sqrt(P) (H diag(phi) G + F) X + Z."""

import json
from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    DEFAULT_RANK_TOL,
    DimensionError,
    as_cmat,
    as_cvec,
    decode_complex,
    encode_complex,
    gaussian_complex,
    numeric_rank,
    svd,
)


def _frozen(a):
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PhaseVector:
    """RIS configuration as angles ``theta`` with cached ``phi = exp(j theta)``."""

    theta: np.ndarray
    phi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float, copy=True).reshape(-1)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", _frozen(np.exp(1j * theta)))

    @classmethod
    def from_complex(cls, v):
        """Build from unit-modulus complex values, keeping them bit-exact."""
        v = as_cvec(v, "phi")
        pv = cls(np.angle(v))
        object.__setattr__(pv, "phi", _frozen(v))
        return pv

    @classmethod
    def ones(cls, n):
        return cls(np.zeros(n))

    def __len__(self):
        return self.phi.shape[0]


def as_phi(phi):
    """Accept a PhaseVector or a raw complex array and return the complex array."""
    if isinstance(phi, PhaseVector):
        return phi.phi
    return as_cvec(phi, "phi")


@dataclass(frozen=True)
class RisChannel:
    h: np.ndarray  # K x N, RIS -> receiver
    g: np.ndarray  # N x M, transmitter -> RIS
    f: np.ndarray  # K x M, direct path (zeros when blocked)
    p: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        h, g, f = as_cmat(self.h, "H"), as_cmat(self.g, "G"), as_cmat(self.f, "F")
        if h.shape[1] != g.shape[0]:
            raise DimensionError(f"H is {h.shape} but G is {g.shape}")
        if f.shape != (h.shape[0], g.shape[1]):
            raise DimensionError(f"F must be {(h.shape[0], g.shape[1])}, got {f.shape}")
        if self.p < 0 or self.sigma2 < 0:
            raise ValueError("power and noise variance must be nonnegative")
        object.__setattr__(self, "h", _frozen(h))
        object.__setattr__(self, "g", _frozen(g))
        object.__setattr__(self, "f", _frozen(f))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "sigma2", float(self.sigma2))

    @property
    def m(self):
        return self.g.shape[1]

    @property
    def n(self):
        return self.h.shape[1]

    @property
    def k(self):
        return self.h.shape[0]

    @property
    def has_direct_path(self):
        return bool(np.any(self.f != 0))

    def matrix(self, phi):
        """The end-to-end K x M matrix sqrt(P) (H diag(phi) G + F)."""
        phi = as_phi(phi)
        if phi.shape[0] != self.n:
            raise DimensionError(f"phi has length {phi.shape[0]}, expected {self.n}")
        return np.sqrt(self.p) * ((self.h * phi) @ self.g + self.f)

    def to_dict(self):
        return {
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "h": encode_complex(self.h),
            "g": encode_complex(self.g),
            "f": encode_complex(self.f),
            "p": self.p,
            "sigma2": self.sigma2,
        }

    @classmethod
    def from_dict(cls, d):
        m, n, k = int(d["m"]), int(d["n"]), int(d["k"])
        f = d.get("f")
        f = np.zeros((k, m), complex) if f is None else decode_complex(f, (k, m))
        return cls(
            h=decode_complex(d["h"], (k, n)),
            g=decode_complex(d["g"], (n, m)),
            f=f,
            p=float(d.get("p", 1.0)),
            sigma2=float(d.get("sigma2", 1.0)),
        )

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def apply(ch, phi, x, noise=None):
    """Received vector for transmit signal ``x`` and RIS phases ``phi``."""
    x = as_cvec(x, "X")
    if x.shape[0] != ch.m:
        raise DimensionError(f"X has length {x.shape[0]}, expected {ch.m}")
    y = ch.matrix(phi) @ x
    if noise is not None:
        noise = as_cvec(noise, "noise")
        if noise.shape[0] != ch.k:
            raise DimensionError(f"noise has length {noise.shape[0]}, expected {ch.k}")
        y = y + noise
    return y


def effective_channel(ch, x):
    """H diag(G x): with it, the RIS term of the output is linear in phi."""
    x = as_cvec(x, "X")
    if x.shape[0] != ch.m:
        raise DimensionError(f"X has length {x.shape[0]}, expected {ch.m}")
    return ch.h * (ch.g @ x)


def absorb_direct_path(ch, tol=DEFAULT_RANK_TOL):
    """Fold a rank-r direct path into r extra RIS elements with fixed phase.

    With F = U S V, (H diag(phi) G + F) equals H' diag([phi; 1_r]) G' for
    H' = [H, U S] and G' = [G; V].  Returns ``(channel', r)``; the last r
    elements of the new channel must stay at phase 0.
    """
    u, s, v = svd(ch.f)
    r = numeric_rank(s, tol)
    if r == 0:
        return ch, 0
    h2 = np.hstack([ch.h, u[:, :r] * s[:r]])
    g2 = np.vstack([ch.g, v[:r, :]])
    return RisChannel(h2, g2, np.zeros_like(ch.f), ch.p, ch.sigma2), r


def sample_channel(rng, m, n, k, direct_path=False, p=1.0, sigma2=1.0):
    """Rayleigh channel with i.i.d. CN(0, 1) entries."""
    h = gaussian_complex(rng, k, n)
    g = gaussian_complex(rng, n, m)
    if direct_path:
        f = gaussian_complex(rng, k, m)
    else:
        f = np.zeros((k, m), dtype=np.complex128)
    return RisChannel(h, g, f, p, sigma2)

"""Geometry of the complex circle product {phi in C^N : |phi_i| = 1}.

The metric is the ambient real inner product Re(a^H b); tangent vectors at
phi satisfy Re(z * conj(phi)) = 0 entrywise.
"""

from dataclasses import dataclass

import numpy as np

from .channel import PhaseVector, as_phi
from .numerics import DimensionError, as_cvec

RETRACT_FLOOR = 1e-14


class DegenerateRetraction(ArithmeticError):
    """A component of the point to retract is (numerically) zero."""


@dataclass(frozen=True)
class TangentVec:
    base: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        if self.base.shape != self.z.shape:
            raise DimensionError("tangent vector and base point differ in length")


def _check_lengths(phi, z):
    if phi.shape != z.shape:
        raise DimensionError(f"length mismatch: {phi.shape[0]} vs {z.shape[0]}")


def project_tangent(phi, z):
    """Orthogonal projection z - Re(z * conj(phi)) * phi."""
    phi = as_phi(phi)
    z = as_cvec(z, "z")
    _check_lengths(phi, z)
    return TangentVec(phi, z - np.real(z * np.conj(phi)) * phi)


def retract(v):
    """Entrywise normalization v_i / |v_i| back onto the manifold."""
    v = as_cvec(v, "v")
    mag = np.abs(v)
    if np.any(mag < RETRACT_FLOOR):
        i = int(np.argmin(mag))
        raise DegenerateRetraction(f"component {i} has modulus {mag[i]:.3g}")
    return PhaseVector.from_complex(v / mag)


def transport(phi_from, phi_to, d):
    """Carry ``d`` to the tangent space at ``phi_to`` by projection.

    This is not an isometry; it is the projection used by the solver.
    """
    z = d.z if isinstance(d, TangentVec) else as_cvec(d, "d")
    src = as_phi(phi_from)
    _check_lengths(src, z)
    return project_tangent(phi_to, z)


def inner(a, b):
    if a.base.shape != b.base.shape or not np.array_equal(a.base, b.base):
        raise ValueError("tangent vectors live at different base points")
    return float(np.real(np.vdot(a.z, b.z)))

"""Complex linear-algebra helpers and reproducible random streams.

Vectors and matrices are plain ``numpy`` complex128 arrays throughout the
package; this module only adds the few operations with package-specific
conventions (seeding, SVD ordering, rank thresholding).
"""

import numpy as np

DEFAULT_RANK_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when array shapes are not conformable."""


class Rng:
    """Counter-based random stream keyed by ``(seed, stream)``.

    Backed by Philox through ``numpy.random.SeedSequence``, so a given key
    yields the same draws on every platform, and sibling streams obtained
    with :meth:`spawn` are independent of the order in which they are used.
    """

    def __init__(self, seed, stream=()):
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self.gen = np.random.Generator(np.random.Philox(seq))

    def spawn(self, *keys):
        return Rng(self.seed, self.stream + tuple(keys))

    def uniform_phase(self, n):
        """Angles in (-pi, pi]."""
        return np.pi - 2.0 * np.pi * self.gen.random(n)

    def __repr__(self):
        return f"Rng(seed={self.seed}, stream={self.stream})"


def as_cvec(x, name="vector"):
    x = np.asarray(x, dtype=np.complex128)
    if x.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {x.shape}")
    return x


def as_cmat(a, name="matrix"):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {a.shape}")
    return a


def gaussian_complex(rng, rows, cols):
    """Matrix with i.i.d. CN(0, 1) entries: (N(0,1) + j N(0,1)) / sqrt(2)."""
    if rows < 1 or cols < 1:
        raise DimensionError(f"dimensions must be positive, got {rows}x{cols}")
    z = rng.gen.standard_normal((rows, cols, 2))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)


def svd(a):
    """Thin SVD ``a = U @ diag(s) @ V`` with ``s`` in descending order.

    Note ``V`` is returned with orthonormal *rows* (it is what numpy calls
    ``Vh``), so the factors multiply back without any extra transpose.
    """
    a = as_cmat(a)
    u, s, v = np.linalg.svd(a, full_matrices=False)
    return u, s, v


def numeric_rank(singular_values, tol=DEFAULT_RANK_TOL):
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0:
        return 0
    smax = s.max()
    if smax <= 0:
        return 0
    return int(np.count_nonzero(s > tol * smax))


def encode_complex(a):
    """JSON-friendly nested ``[re, im]`` pairs (row-major for matrices)."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        return [[float(v.real), float(v.imag)] for v in a]
    return [[[float(v.real), float(v.imag)] for v in row] for row in a]


def decode_complex(data, shape=None):
    arr = np.asarray(data, dtype=float)
    if arr.size == 0:
        out = np.zeros(shape if shape is not None else (0,), dtype=np.complex128)
        return out
    if arr.shape[-1] != 2:
        raise DimensionError("complex entries must be [re, im] pairs")
    out = arr[..., 0] + 1j * arr[..., 1]
    if shape is not None:
        out = out.reshape(shape)
    return out

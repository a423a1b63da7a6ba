"""Compiled inner loops for the precoding solver.

Everything here works on raw complex128 arrays so it can run under numba;
``optimizer`` wraps these with validation and the public data types.
"""

import numpy as np
from numba import njit

CONVERGED = 0
MAX_ITERS = 1
STALLED = 2

_DENOM_FLOOR = 1e-14
_DESCENT_FLOOR = 1e-6
_RETRACT_FLOOR = 1e-14


@njit(cache=True)
def _matvec(a, x):
    rows, cols = a.shape
    out = np.zeros(rows, dtype=np.complex128)
    for i in range(rows):
        acc = 0j
        for j in range(cols):
            acc += a[i, j] * x[j]
        out[i] = acc
    return out


@njit(cache=True)
def _rmatvec(a, y):
    # a^H y
    rows, cols = a.shape
    out = np.zeros(cols, dtype=np.complex128)
    for i in range(rows):
        yi = y[i]
        for j in range(cols):
            out[j] += np.conj(a[i, j]) * yi
    return out


@njit(cache=True)
def _rdot(a, b):
    # Re(a^H b)
    acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i].real * b[i].real + a[i].imag * b[i].imag
    return acc


@njit(cache=True)
def _project(phi, z):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        c = z[i].real * phi[i].real + z[i].imag * phi[i].imag
        out[i] = z[i] - c * phi[i]
    return out


@njit(cache=True)
def residual(h, g, f, sp, target, x, phi):
    gx = _matvec(g, x)
    w = phi * gx
    return target - sp * (_matvec(h, w) + _matvec(f, x))


@njit(cache=True)
def penalty(x, lam, rho):
    if rho <= 0.0:
        return 0.0
    t = lam / rho + _rdot(x, x) - 1.0
    if t <= 0.0:
        return 0.0
    return 0.5 * rho * t * t


@njit(cache=True)
def lagrangian(h, g, f, sp, target, x, phi, lam, rho):
    r = residual(h, g, f, sp, target, x, phi)
    return _rdot(r, r) + penalty(x, lam, rho)


@njit(cache=True)
def gradients(h, g, f, sp, target, x, phi, lam, rho):
    """Returns (L, grad_x, euclidean grad_phi)."""
    gx = _matvec(g, x)
    r = target - sp * (_matvec(h, phi * gx) + _matvec(f, x))
    hr = _rmatvec(h, r)
    # A^H r with A = sp (H diag(phi) G + F)
    ahr = sp * (_rmatvec(g, np.conj(phi) * hr) + _rmatvec(f, r))
    act = lam + rho * (_rdot(x, x) - 1.0)
    if act < 0.0:
        act = 0.0
    gxv = -2.0 * ahr + 2.0 * act * x
    gphi = -2.0 * sp * np.conj(gx) * hr
    val = _rdot(r, r) + penalty(x, lam, rho)
    return val, gxv, gphi


@njit(cache=True)
def _retract_step(phi, d, alpha):
    out = np.empty_like(phi)
    for i in range(phi.shape[0]):
        v = phi[i] + alpha * d[i]
        a = abs(v)
        if a < _RETRACT_FLOOR:
            return out, False
        out[i] = v / a
    return out, True


@njit(cache=True)
def rcg(h, g, f, sp, target, x0, phi0, lam, rho, eps, fix_x,
        armijo_c, shrink, alpha_init, max_backtracks, max_iters,
        lhist, dechist):
    """Riemannian conjugate gradient on C^M x (circle)^N.

    Minimizes the augmented Lagrangian for fixed (lam, rho) until the joint
    gradient norm drops below ``eps``.  ``lhist[j]`` receives L at iterate j
    and ``dechist[j]`` the Armijo bound c * alpha * <grad, dir> of the step
    taken from it.  Returns (x, phi, grad_norm, iters, status).
    """
    x = x0.copy()
    phi = phi0.copy()
    if fix_x:
        # X is frozen, so the power penalty is a constant; dropping it keeps
        # the Armijo test sensitive to tiny objective changes
        lam = 0.0
        rho = 0.0
    val, gx, ge = gradients(h, g, f, sp, target, x, phi, lam, rho)
    if fix_x:
        gx[:] = 0.0
    gp = _project(phi, ge)
    gnorm2 = _rdot(gx, gx) + _rdot(gp, gp)
    dx = -gx
    dp = -gp
    lhist[0] = val
    it = 0
    status = MAX_ITERS
    while True:
        if np.sqrt(gnorm2) < eps:
            status = CONVERGED
            break
        if it >= max_iters:
            status = MAX_ITERS
            break
        slope = _rdot(gx, dx) + _rdot(gp, dp)
        if slope > -_DESCENT_FLOOR * gnorm2:
            # not a sufficient descent direction (HS can cancel the gradient
            # exactly on a one-dimensional problem): restart along -grad
            dx = -gx
            dp = -gp
            slope = -gnorm2
        alpha = alpha_init
        accepted = False
        xt = x
        pt = phi
        vt = val
        for _ in range(max_backtracks):
            pt, ok = _retract_step(phi, dp, alpha)
            if ok:
                xt = x + alpha * dx
                vt = lagrangian(h, g, f, sp, target, xt, pt, lam, rho)
                if vt <= val + armijo_c * alpha * slope:
                    accepted = True
                    break
            alpha *= shrink
        if not accepted:
            status = STALLED
            break
        dechist[it] = armijo_c * alpha * slope
        val, gx_new, ge = gradients(h, g, f, sp, target, xt, pt, lam, rho)
        if fix_x:
            gx_new[:] = 0.0
        gp_new = _project(pt, ge)
        # move the previous gradient and direction into the new tangent space
        gp_old = _project(pt, gp)
        dp_old = _project(pt, dp)
        yx = gx_new - gx
        yp = gp_new - gp_old
        denom = _rdot(dx, yx) + _rdot(dp_old, yp)
        beta = 0.0
        if abs(denom) > _DENOM_FLOOR:
            beta = (_rdot(gx_new, yx) + _rdot(gp_new, yp)) / denom
            if beta < 0.0:
                beta = 0.0
        x = xt
        phi = pt
        gx = gx_new
        gp = gp_new
        gnorm2 = _rdot(gx, gx) + _rdot(gp, gp)
        dx = -gx + beta * dx
        dp = -gp + beta * dp_old
        it += 1
        lhist[it] = val
    return x, phi, np.sqrt(gnorm2), it, status

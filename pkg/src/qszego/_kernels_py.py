"""Pure-NumPy/Python kernel backend.

Reference implementation of the hot numerical kernels: the spectral
right-hand side of the flow, fixed-step time advancement of spectra (classical
RK4 and 3-stage Gauss collocation), and the rank-one coordinate ODE.  The
compiled backend in ``_kernels.pyx`` implements the same interface; either is
selected at import time by :mod:`qszego.backend`.

Both integrators take the number of steps rather than an end time so the
caller controls the monitoring cadence exactly.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# 3-stage Gauss-Legendre collocation (order 6).  The method conserves
# quadratic invariants exactly, so mass and momentum drift is set by the
# stage-iteration tolerance rather than the step size.
_S15 = np.sqrt(15.0)
_GAUSS_A = np.array(
    [
        [5.0 / 36.0, 2.0 / 9.0 - _S15 / 15.0, 5.0 / 36.0 - _S15 / 30.0],
        [5.0 / 36.0 + _S15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - _S15 / 24.0],
        [5.0 / 36.0 + _S15 / 30.0, 2.0 / 9.0 + _S15 / 15.0, 5.0 / 36.0],
    ]
)
_GAUSS_B = np.array([5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0])

_GAUSS_TOL = 1e-15
_GAUSS_MAXIT = 50


def pde_rhs(a: np.ndarray) -> np.ndarray:
    """Time derivative of a one-sided spectrum under the quadratic flow.

    du/dt = -i (2 j P(|u|^2) + conj(j) u^2) truncated at the cutoff, where
    j = (u^2|u) and P drops negative modes.
    """
    n = len(a)
    sq = np.convolve(a, a)[:n]
    corr = np.correlate(a, a, mode="full")[n - 1 :]
    j = np.vdot(a, sq)
    return -1j * (2.0 * j * corr + np.conj(j) * sq)


def pde_rk4_advance(a: np.ndarray, dt: float, nsteps: int) -> np.ndarray:
    """Advance a spectrum by nsteps classical RK4 steps of size dt.

    Divergence (too large a step) yields non-finite values; the loop stops
    early and callers treat the state as an instability signal.
    """
    a = np.array(a, dtype=np.complex128)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(nsteps):
            k1 = pde_rhs(a)
            k2 = pde_rhs(a + 0.5 * dt * k1)
            k3 = pde_rhs(a + 0.5 * dt * k2)
            k4 = pde_rhs(a + dt * k3)
            a = a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(a)):
                break
    return a


def pde_gauss6_advance(a: np.ndarray, dt: float, nsteps: int) -> np.ndarray:
    """Advance by nsteps Gauss-collocation steps of size dt.

    Stage derivatives are solved by fixed-point iteration, warm-started from
    the previous step, until the implied stage-value update falls below
    1e-15 relative to the state scale.  Divergence (too large a step for the
    local rotation rate) surfaces as non-finite output, which callers treat
    as instability.
    """
    a = np.array(a, dtype=np.complex128)
    with np.errstate(over="ignore", invalid="ignore"):
        k = np.tile(pde_rhs(a), (3, 1))
        for _ in range(nsteps):
            scale = max(1.0, float(np.max(np.abs(a))))
            for _ in range(_GAUSS_MAXIT):
                stages = a[None, :] + dt * (_GAUSS_A @ k)
                k_new = np.vstack([pde_rhs(stages[i]) for i in range(3)])
                delta = float(np.max(np.abs(k_new - k)))
                k = k_new
                if not np.isfinite(delta):
                    break
                if abs(dt) * delta <= _GAUSS_TOL * scale:
                    break
            a = a + dt * (_GAUSS_B @ k)
            if not np.all(np.isfinite(a)):
                break
    return a


def rational_rhs(b: complex, c: complex, p: complex) -> tuple[complex, complex, complex]:
    """Coordinate velocity of the rank-one reduction in (b, c, p)."""
    w = 1.0 / (1.0 - (p.real * p.real + p.imag * p.imag))
    ab2 = b.real * b.real + b.imag * b.imag
    ac2 = c.real * c.real + c.imag * c.imag
    j = ab2 * b + 2.0 * b * ac2 * w + ac2 * c * p.conjugate() * w * w
    jc = j.conjugate()
    db = -1j * (b * b * jc + 2.0 * ab2 * j + 2.0 * j * ac2 * w)
    dc = -1j * (2.0 * b * c * jc + 2.0 * b.conjugate() * c * j + 2.0 * j * p * ac2 * w)
    dp = -1j * c * jc
    return db, dc, dp


def rational_rk4_advance(
    b: complex, c: complex, p: complex, dt: float, nsteps: int
) -> tuple[complex, complex, complex]:
    """Advance the rank-one coordinates by nsteps RK4 steps of size dt."""
    h = dt / 6.0
    for _ in range(nsteps):
        db1, dc1, dp1 = rational_rhs(b, c, p)
        db2, dc2, dp2 = rational_rhs(
            b + 0.5 * dt * db1, c + 0.5 * dt * dc1, p + 0.5 * dt * dp1
        )
        db3, dc3, dp3 = rational_rhs(
            b + 0.5 * dt * db2, c + 0.5 * dt * dc2, p + 0.5 * dt * dp2
        )
        db4, dc4, dp4 = rational_rhs(b + dt * db3, c + dt * dc3, p + dt * dp3)
        b = b + h * (db1 + 2.0 * db2 + 2.0 * db3 + db4)
        c = c + h * (dc1 + 2.0 * dc2 + 2.0 * dc3 + dc4)
        p = p + h * (dp1 + 2.0 * dp2 + 2.0 * dp3 + dp4)
    return b, c, p

"""Truncated Hardy-space symbol arithmetic.

A one-sided spectrum is a 1-D complex array ``a`` of length ``N + 1`` holding
the Fourier coefficients ``a[n] = u_hat(n)`` of a symbol ``u`` with vanishing
negative frequencies, truncated at cutoff ``N`` (modes above ``N`` are
implicitly zero).  A two-sided spectrum is a 1-D complex array of odd length
``2*N + 1`` holding modes ``-N .. N``, with mode ``m`` stored at index
``m + N``.

All operations are pure functions on value arrays; nothing is mutated.
Products are exact coefficient convolutions followed by Galerkin truncation
back to the working cutoff, so the truncated flow remains Hamiltonian and the
classical invariants are conserved by the semi-discrete dynamics up to
integrator error only.

Sobolev convention: ``||u||_{H^s}^2 = sum_n (1+n)^{2s} |u_hat(n)|^2``.  With
this weight the identity ``||u||_{H^{1/2}}^2 = Q + M`` (mass plus momentum)
is exact, which is relied on throughout the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Conserved",
    "as_spectrum",
    "as_two_sided",
    "cutoff_of",
    "two_sided_cutoff",
    "embed_two_sided",
    "szego_project",
    "anti_project",
    "conjugate_two_sided",
    "mul_zbar",
    "multiply",
    "mod_squared",
    "inner",
    "l2_norm",
    "cubic_moment",
    "conserved_quantities",
    "sobolev_norm",
    "shift_adjoint",
    "poisson_smooth",
    "truncation_tail",
]


def as_spectrum(a) -> np.ndarray:
    """Coerce to a validated one-sided coefficient array (complex128, finite)."""
    arr = np.ascontiguousarray(a, dtype=np.complex128)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("a one-sided spectrum must be a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("spectrum contains non-finite entries")
    return arr


def as_two_sided(f) -> np.ndarray:
    """Coerce to a validated two-sided coefficient array (odd length)."""
    arr = np.ascontiguousarray(f, dtype=np.complex128)
    if arr.ndim != 1 or arr.size % 2 == 0:
        raise ValueError("a two-sided spectrum must be 1-D with odd length")
    if not np.all(np.isfinite(arr)):
        raise ValueError("spectrum contains non-finite entries")
    return arr


def cutoff_of(a) -> int:
    """Cutoff N of a one-sided spectrum (length N + 1)."""
    return len(a) - 1


def two_sided_cutoff(f) -> int:
    """Cutoff N of a two-sided spectrum (length 2N + 1)."""
    return (len(f) - 1) // 2


def _require_same_cutoff(u, v) -> None:
    if len(u) != len(v):
        raise ValueError(
            f"cutoff mismatch: {len(u) - 1} vs {len(v) - 1}; operations do "
            "not re-pad silently"
        )


def embed_two_sided(u) -> np.ndarray:
    """Embed a one-sided spectrum into the two-sided representation."""
    u = as_spectrum(u)
    n = cutoff_of(u)
    out = np.zeros(2 * n + 1, dtype=np.complex128)
    out[n:] = u
    return out


def szego_project(f) -> np.ndarray:
    """Orthogonal projection onto nonnegative modes (the Szego projector).

    Takes a two-sided spectrum of cutoff N and returns the one-sided spectrum
    of modes 0..N; negative modes are discarded.
    """
    f = as_two_sided(f)
    n = two_sided_cutoff(f)
    return f[n:].copy()


def anti_project(f) -> np.ndarray:
    """Complementary projection: keep strictly negative modes (two-sided)."""
    f = as_two_sided(f)
    n = two_sided_cutoff(f)
    out = np.zeros_like(f)
    out[:n] = f[:n]
    return out


def conjugate_two_sided(f) -> np.ndarray:
    """Coefficients of the complex conjugate symbol: mode m -> conj(mode -m)."""
    f = as_two_sided(f)
    return np.conj(f[::-1])


def mul_zbar(f) -> np.ndarray:
    """Multiply a two-sided symbol by conj(z): shift every mode down by one.

    The top mode falls off the representation; the vacated bottom entry is
    zero.
    """
    f = as_two_sided(f)
    out = np.zeros_like(f)
    out[:-1] = f[1:]
    return out


def multiply(u, v) -> np.ndarray:
    """Holomorphic product, Galerkin-truncated back to the common cutoff.

    Returns the convolution ``sum_{j+k=m} u_hat(j) v_hat(k)`` for m = 0..N;
    modes above N are discarded.  Mismatched cutoffs raise.
    """
    u = as_spectrum(u)
    v = as_spectrum(v)
    _require_same_cutoff(u, v)
    return np.convolve(u, v)[: len(u)]


def mod_squared(u) -> np.ndarray:
    """Exact two-sided spectrum of |u|^2.

    Mode m holds ``sum_k u_hat(k+m) conj(u_hat(k))``; the result is Hermitian
    (entry(-m) = conj(entry(m))) and its zero mode equals the mass Q.
    """
    u = as_spectrum(u)
    return np.correlate(u, u, mode="full")


def inner(f, g) -> complex:
    """Hermitian inner product (f|g) = sum_n f_hat(n) conj(g_hat(n))."""
    f = np.asarray(f)
    g = np.asarray(g)
    _require_same_cutoff(f, g)
    return complex(np.vdot(g, f))


def l2_norm(u) -> float:
    return float(np.linalg.norm(u))


def cubic_moment(u) -> complex:
    """The conserved cubic correlation (u^2 | u).

    Since u has no modes above its cutoff, the Galerkin truncation of u^2
    does not affect the value: modes of u^2 above the cutoff pair with zero
    coefficients of u.  Trailing zero modes are stripped before the
    reduction, so the value is bit-identical under cutoff extension; the
    test suite checks both statements.
    """
    u = as_spectrum(u)
    nz = np.nonzero(u)[0]
    if nz.size == 0:
        return 0j
    u = u[: nz[-1] + 1]
    sq = np.convolve(u, u)[: len(u)]
    return complex(np.vdot(u, sq))


@dataclass(frozen=True)
class Conserved:
    """The classical invariants: mass Q, momentum M, energy E = |cubic|^2/2."""

    mass: float
    momentum: float
    energy: float
    cubic: complex

    def as_dict(self) -> dict:
        return {
            "Q": self.mass,
            "M": self.momentum,
            "E": self.energy,
            "absJ": abs(self.cubic),
        }


def conserved_quantities(u) -> Conserved:
    """Mass, momentum, energy and the cubic correlation of a spectrum."""
    u = as_spectrum(u)
    w = np.abs(u) ** 2
    q = float(np.sum(w))
    m = float(np.sum(np.arange(len(u)) * w))
    j = cubic_moment(u)
    return Conserved(mass=q, momentum=m, energy=0.5 * abs(j) ** 2, cubic=j)


def sobolev_norm(u, s: float) -> float:
    """H^s norm with weight (1+n)^{2s}; s = 1/2 gives sqrt(Q + M) exactly."""
    if s < 0:
        raise ValueError("sobolev_norm requires s >= 0")
    u = as_spectrum(u)
    weights = (1.0 + np.arange(len(u))) ** (2.0 * s)
    return float(np.sqrt(np.sum(weights * np.abs(u) ** 2)))


def shift_adjoint(u) -> np.ndarray:
    """Adjoint shift: coefficients move down one slot, the top entry is zero."""
    u = as_spectrum(u)
    out = np.zeros_like(u)
    out[:-1] = u[1:]
    return out


def poisson_smooth(u, r: float) -> np.ndarray:
    """Poisson-kernel smoothing: u_hat(n) -> r^n u_hat(n) for r in [0, 1].

    r = 1 is the identity and r = 0 keeps only the mean (0^0 = 1 convention).
    The map is an L^2 contraction for every admissible r.
    """
    if not 0.0 <= r <= 1.0:
        raise ValueError("poisson_smooth requires 0 <= r <= 1")
    u = as_spectrum(u)
    return u * (r ** np.arange(len(u), dtype=float))


def truncation_tail(u) -> float:
    """Estimated discarded-tail magnitude for a geometrically decaying symbol.

    Extrapolates the top two coefficients by the ratio ``rho = |a_N / a_{N-1}|``
    and returns ``|a_N| * rho / (1 - rho)``, the l^1 size of the modes above
    the cutoff if the decay stayed geometric.  For rational one-pole data this
    reproduces |c| |p|^N / (1 - |p|).  Returns 0 when the top coefficient
    vanishes and +inf when no decay is visible (rho >= 1).
    """
    u = as_spectrum(u)
    if len(u) < 2:
        return 0.0
    top = abs(u[-1])
    prev = abs(u[-2])
    if top == 0.0:
        return 0.0
    if prev == 0.0 or top >= prev:
        return float("inf")
    rho = top / prev
    return float(top * rho / (1.0 - rho))

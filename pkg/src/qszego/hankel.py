"""Finite sections of Hankel, shifted-Hankel and Toeplitz operators.

Antilinear convention: an antilinear operator is stored as the complex
matrix ``A`` of its coefficient action ``h -> A @ conj(h)``.  Composition
rules under this convention:

* linear ``B`` after antilinear ``A``      has matrix ``B @ A``;
* antilinear ``A`` after linear ``B``      has matrix ``A @ conj(B)``;
* the square of antilinear ``A``           has matrix ``A @ conj(A)``.

Hankel sections are complex symmetric (entry (j, k) depends only on j + k),
so their singular values coincide with the square roots of the eigenvalues
of ``A @ conj(A)`` (Takagi/Autonne structure); the test suite cross-checks
this identity on small instances.
"""

from __future__ import annotations

import numpy as np

from .spectrum import as_spectrum, as_two_sided, cubic_moment, two_sided_cutoff

__all__ = [
    "hankel_matrix",
    "shifted_hankel_matrix",
    "toeplitz_matrix",
    "lax_generator_matrix",
    "apply_antilinear",
    "singular_values",
    "trace_norm",
    "bmo_proxy",
]


def _padded(u, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=np.complex128)
    m = min(len(u), length)
    out[:m] = u[:m]
    return out


def hankel_matrix(u, n: int) -> np.ndarray:
    """n x n section with entries u_hat(j + k); the symbol's Hankel operator.

    Requires n <= cutoff + 1 so the first row is fully determined; entries
    with j + k beyond the cutoff are zero.
    """
    u = as_spectrum(u)
    if n < 1 or n > len(u):
        raise ValueError(f"section size {n} exceeds available coefficients ({len(u)})")
    pad = _padded(u, 2 * n - 1)
    idx = np.arange(n)
    return pad[idx[:, None] + idx[None, :]]


def shifted_hankel_matrix(u, n: int) -> np.ndarray:
    """n x n section with entries u_hat(j + k + 1).

    Identical to the Hankel section of the down-shifted symbol; its squared
    singular values are the conserved spectrum of the flow.
    """
    u = as_spectrum(u)
    if n < 1 or n > len(u):
        raise ValueError(f"section size {n} exceeds available coefficients ({len(u)})")
    pad = _padded(u, 2 * n)
    idx = np.arange(n)
    return pad[idx[:, None] + idx[None, :] + 1]


def toeplitz_matrix(b, n: int) -> np.ndarray:
    """n x n section of the Toeplitz operator of a two-sided symbol b.

    Entry (j, k) is b_hat(j - k); the matrix is constant along diagonals.
    """
    b = as_two_sided(b)
    nb = two_sided_cutoff(b)
    if n < 1 or n > nb + 1:
        raise ValueError(f"section size {n} exceeds symbol cutoff ({nb})")
    idx = np.arange(n)
    return b[(idx[:, None] - idx[None, :]) + nb]


def lax_generator_matrix(u, n: int) -> np.ndarray:
    """Section of the skew-adjoint generator -i(T_{conj(j)u} + T_{j conj(u)}).

    Here j is the cubic moment of u.  The analytic symbol conj(j)*u fills the
    lower triangle, the anti-analytic symbol j*conj(u) the upper triangle,
    and the diagonal carries both zero-mode contributions, which makes the
    result exactly skew-adjoint up to rounding.
    """
    u = as_spectrum(u)
    if n < 1:
        raise ValueError("section size must be positive")
    j = cubic_moment(u)
    pad = _padded(u, n)
    idx = np.arange(n)
    d = idx[:, None] - idx[None, :]
    lower = np.where(d >= 0, np.conj(j) * pad[np.clip(d, 0, n - 1)], 0.0)
    upper = np.where(d <= 0, j * np.conj(pad[np.clip(-d, 0, n - 1)]), 0.0)
    return -1j * (lower + upper)


def apply_antilinear(a, h) -> np.ndarray:
    """Apply the antilinear operator with coefficient matrix a: h -> a conj(h)."""
    a = np.asarray(a, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("coefficient matrix must be square")
    if h.shape != (a.shape[1],):
        raise ValueError(f"dimension mismatch: matrix {a.shape}, vector {h.shape}")
    return a @ np.conj(h)


def singular_values(a) -> np.ndarray:
    """Nonincreasing singular values of a complex symmetric section.

    For complex symmetric a these are the square roots of the eigenvalues of
    ``a @ conj(a)`` (the matrix of the squared antilinear operator).  SVD
    failures propagate as LinAlgError rather than being silently ignored.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.array_equal(a, a.T):
        raise ValueError("expected a complex symmetric matrix (a == a.T exactly)")
    return np.linalg.svd(a, compute_uv=False)


def trace_norm(a) -> float:
    """Sum of singular values; conserved by the flow for shifted-Hankel data."""
    return float(np.sum(singular_values(a)))


def bmo_proxy(u, n: int) -> float:
    """Top singular value of the n-section Hankel matrix.

    A lower bound for the BMO norm of the symbol (Nehari), nondecreasing in
    the section size n.
    """
    u = as_spectrum(u)
    a = hankel_matrix(u, n)
    return float(np.linalg.svd(a, compute_uv=False)[0])

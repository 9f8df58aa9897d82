"""Exact dynamics on the invariant manifold of rank-one shifted-Hankel symbols.

States are coordinatized by three complex numbers (b, c, p) with |p| < 1 and
c != 0, representing the symbol ``b + c z / (1 - p z)``: coefficient 0 is b
and coefficient k >= 1 is c p^(k-1).  The flow preserves this family, so the
spectral PDE collapses to a three-dimensional complex ODE whose conserved
quantities have closed forms:

    Q = |b|^2 + |c|^2 / (1-|p|^2)        (mass)
    M = |c|^2 / (1-|p|^2)^2              (momentum)
    E = |cubic|^2 / 2                    (energy)

The resonance identity E = Q^3 / 2 separates two regimes: off resonance every
Sobolev norm stays bounded, on resonance |c(t)| decays like exp(-rate*|t|)
with rate = Q^(3/2) sqrt(4M - Q) and each H^s norm with s > 1/2 grows like
exp((2s-1)*rate*|t|).  The envelope of |c| obeys
(d|c|/dt / |c|)^2 = P(|c| sqrt(M)) for the quadratic P below.

Numerical caution: the momentum closed form divides by (1-|p|^2)^2, so its
floating-point evaluation degrades like eps/(1-|p|^2) as |p| -> 1; drift
assertions belong on trajectories with |p| bounded away from 1, while mass
and energy stay well-conditioned in the forms used here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import kernels
from .flow import FlowConfig
from .spectrum import Conserved
from .trajectory import Trajectory

__all__ = [
    "RationalState",
    "RationalTrajectory",
    "EnvelopeData",
    "to_spectrum",
    "cubic_moment",
    "conserved_quantities",
    "energy_expanded",
    "h1_norm_sq",
    "hankel_singular_values",
    "hankel_top_singular_value",
    "shifted_hankel_top_singular_value",
    "ode_rhs",
    "evolve_ode",
    "resonance_residual",
    "growth_rate",
    "envelope_roots",
    "envelope_polynomial",
    "envelope_data",
    "find_blowup_initial",
    "GrowthFit",
    "growth_diagnostic",
]

P_ABORT_MARGIN = 1e-12  # evolve_ode aborts once |p| >= 1 - this margin


@dataclass(frozen=True)
class RationalState:
    """Coordinates (b, c, p) of a rank-one symbol; |p| < 1 and c != 0."""

    b: complex
    c: complex
    p: complex

    def __post_init__(self):
        for name in ("b", "c", "p"):
            z = complex(getattr(self, name))
            if not (np.isfinite(z.real) and np.isfinite(z.imag)):
                raise ValueError(f"{name} must be finite")
        if abs(self.p) >= 1.0:
            raise ValueError("|p| must be strictly below 1")
        if self.c == 0:
            raise ValueError("c must be nonzero (rank-one membership)")

    def as_tuple(self) -> tuple[complex, complex, complex]:
        return complex(self.b), complex(self.c), complex(self.p)


def to_spectrum(state: RationalState, n: int) -> np.ndarray:
    """Truncated coefficient vector: (b, c, c p, c p^2, ..., c p^(n-1))."""
    b, c, p = state.as_tuple()
    out = np.empty(n + 1, dtype=np.complex128)
    out[0] = b
    out[1:] = c * p ** np.arange(n)
    return out


def _weight(p: complex) -> float:
    return 1.0 / (1.0 - abs(p) ** 2)


def cubic_moment(state: RationalState) -> complex:
    """Closed form of (u^2|u) via residues at the single pole."""
    b, c, p = state.as_tuple()
    w = _weight(p)
    return abs(b) ** 2 * b + 2.0 * b * abs(c) ** 2 * w \
        + abs(c) ** 2 * c * np.conj(p) * w * w


def conserved_quantities(state: RationalState) -> Conserved:
    """Closed-form mass, momentum and energy of a rank-one state."""
    b, c, p = state.as_tuple()
    w = _weight(p)
    j = cubic_moment(state)
    return Conserved(
        mass=abs(b) ** 2 + abs(c) ** 2 * w,
        momentum=abs(c) ** 2 * w * w,
        energy=0.5 * abs(j) ** 2,
        cubic=j,
    )


def energy_expanded(state: RationalState) -> float:
    """Energy written out in the coordinates, term by term.

    Independent of :func:`conserved_quantities` (which squares the cubic
    moment); the two must agree to rounding and the tests check that.
    """
    b, c, p = state.as_tuple()
    w = _weight(p)
    ab2 = abs(b) ** 2
    ac2 = abs(c) ** 2
    rbcp = (b * np.conj(c) * p).real
    return (
        0.5 * ab2 ** 3
        + 2.0 * ab2 ** 2 * ac2 * w
        + ab2 * ac2 * w * w * (rbcp + 2.0 * ac2)
        + 2.0 * ac2 ** 2 * w ** 3 * rbcp
        + 0.5 * abs(p) ** 2 * ac2 ** 3 * w ** 4
    )


def h1_norm_sq(state: RationalState) -> float:
    """Closed-form squared H^1 norm (weight (1+n)^2), exact for all |p| < 1."""
    b, c, p = state.as_tuple()
    x = abs(p) ** 2
    one = 1.0 - x
    s = (1.0 + x) / one ** 3 + 2.0 / one ** 2 + 1.0 / one
    return abs(b) ** 2 + abs(c) ** 2 * s


def hankel_singular_values(state: RationalState) -> tuple[float, float]:
    """The two nonzero singular values of the symbol's full Hankel operator.

    The Hankel matrix of b + c z/(1 - p z) factors through the orthogonal
    pair {e0, (0, 1, p, p^2, ...)} with 2x2 symmetric coefficient block
    [[b, c], [c, c p]], so the squared singular values are the eigenvalues
    of a 2x2 product -- exact and stable for every |p| < 1, including p = 0.
    """
    b, c, p = state.as_tuple()
    g = _weight(p)
    coeff = np.array([[b, c], [c, c * p]])
    gram = np.diag([1.0, g])
    m2 = coeff @ gram @ np.conj(coeff) @ gram
    eigs = np.sort(np.abs(np.linalg.eigvals(m2)))[::-1]
    return float(np.sqrt(eigs[0])), float(np.sqrt(eigs[1]))


def hankel_top_singular_value(state: RationalState) -> float:
    """Exact BMO proxy (operator norm of the Hankel operator) of the state."""
    return hankel_singular_values(state)[0]


def shifted_hankel_top_singular_value(state: RationalState) -> float:
    """sigma_1 of the shifted Hankel operator: sqrt(momentum), exactly."""
    return float(np.sqrt(conserved_quantities(state).momentum))


def ode_rhs(state: RationalState) -> tuple[complex, complex, complex]:
    """Velocity (db, dc, dp) of the reduced flow at the state."""
    return kernels.rational_rhs(*state.as_tuple())


@dataclass
class RationalTrajectory:
    """Coordinate time series of a reduced-flow run."""

    t: np.ndarray
    b: np.ndarray
    c: np.ndarray
    p: np.ndarray
    aborted: bool = False
    abort_reason: str = ""

    def __len__(self) -> int:
        return len(self.t)

    def state_at(self, i: int) -> RationalState:
        return RationalState(self.b[i], self.c[i], self.p[i])

    def abs_c(self) -> np.ndarray:
        return np.abs(self.c)

    def abs_p(self) -> np.ndarray:
        return np.abs(self.p)

    def to_trajectory(self, spectrum_rank: int = 5,
                      tail_cutoff: int | None = None) -> Trajectory:
        """Render the run in the common monitored-record format.

        All columns come from closed forms: sigma_1 of the shifted Hankel
        operator is sqrt(momentum) and the higher singular values vanish
        identically on this manifold; the BMO proxy uses the exact rank-two
        reduction.  ``tail_cutoff`` adds the |c||p|^N/(1-|p|) tail a
        synthesis at cutoff N would discard.
        """
        n = len(self.t)
        mass = np.empty(n)
        mom = np.empty(n)
        ene = np.empty(n)
        absj = np.empty(n)
        h1 = np.empty(n)
        bmo = np.empty(n)
        for i in range(n):
            s = self.state_at(i)
            cons = conserved_quantities(s)
            mass[i] = cons.mass
            mom[i] = cons.momentum
            ene[i] = cons.energy
            absj[i] = abs(cons.cubic)
            h1[i] = np.sqrt(h1_norm_sq(s))
            bmo[i] = hankel_top_singular_value(s)
        sig = np.zeros((n, spectrum_rank))
        if spectrum_rank > 0:
            sig[:, 0] = np.sqrt(mom)
        if tail_cutoff is not None:
            ap = np.abs(self.p)
            tail = np.abs(self.c) * ap ** tail_cutoff / (1.0 - ap)
        else:
            tail = np.zeros(n)
        return Trajectory(
            t=self.t.copy(),
            mass=mass,
            momentum=mom,
            energy=ene,
            abs_cubic=absj,
            h_half=np.sqrt(mass + mom),
            h_one=h1,
            bmo=bmo,
            sigmas=sig,
            trace_norm=np.sqrt(mom),
            tail=tail,
            states=None,
            aborted=self.aborted,
            abort_reason=self.abort_reason,
        )


def evolve_ode(state: RationalState, cfg: FlowConfig) -> RationalTrajectory:
    """Integrate the reduced flow with fixed-step RK4.

    Records the coordinates every ``monitor_stride`` steps.  The run aborts
    (with the partial record flagged) when the pole modulus reaches
    1 - 1e-12, when c collapses to exact zero (leaving the manifold), or
    when a coordinate stops being finite.
    """
    b, c, p = state.as_tuple()
    total = cfg.nsteps
    ts = [0.0]
    bs = [b]
    cs = [c]
    ps = [p]
    aborted = False
    reason = ""
    step = 0
    while step < total:
        block = min(cfg.monitor_stride, total - step)
        b, c, p = kernels.rational_rk4_advance(b, c, p, cfg.dt, block)
        step += block
        bad = None
        if not all(np.isfinite([b.real, b.imag, c.real, c.imag, p.real, p.imag])):
            bad = f"non-finite coordinates at t={step * cfg.dt:g}"
        elif abs(p) >= 1.0 - P_ABORT_MARGIN:
            bad = f"|p| reached {abs(p):.17g} at t={step * cfg.dt:g}"
        elif c == 0:
            bad = f"c vanished at t={step * cfg.dt:g} (left the manifold)"
        if bad is not None:
            aborted = True
            reason = bad
            break
        ts.append(step * cfg.dt)
        bs.append(b)
        cs.append(c)
        ps.append(p)
    return RationalTrajectory(
        t=np.array(ts),
        b=np.array(bs),
        c=np.array(cs),
        p=np.array(ps),
        aborted=aborted,
        abort_reason=reason,
    )


def resonance_residual(state: RationalState) -> float:
    """E - Q^3/2; zero exactly on the turbulent (norm-exploding) set."""
    cons = conserved_quantities(state)
    return cons.energy - 0.5 * cons.mass ** 3


def growth_rate(mass: float, momentum: float) -> float:
    """The exponential rate Q^(3/2) sqrt(4M - Q) of the resonant regime."""
    if mass <= 0 or momentum <= 0:
        raise ValueError("mass and momentum must be positive")
    if mass >= 4.0 * momentum:
        raise ValueError("the resonant regime requires Q < 4M")
    return float(mass ** 1.5 * np.sqrt(4.0 * momentum - mass))


def envelope_polynomial(x: float, mass: float, momentum: float) -> float:
    """P(X) = -(M+Q)^2 X^2 + 2 Q^2 (M-Q) X + Q^3 (4M-Q).

    Along resonant trajectories (|c|'/|c|)^2 = P(|c| sqrt(M)) pointwise.
    """
    q, m = mass, momentum
    return -((m + q) ** 2) * x * x + 2.0 * q * q * (m - q) * x + q ** 3 * (4.0 * m - q)


def envelope_roots(mass: float, momentum: float) -> tuple[float, float]:
    """The two real roots r_- < r_+ of the envelope polynomial.

    Their product is -Q^3 (4M-Q)/(M+Q)^2; the discriminant
    8 M^2 Q^4 + 4 M^3 Q^3 is positive for all positive inputs.
    """
    q, m = mass, momentum
    if q <= 0 or m <= 0:
        raise ValueError("mass and momentum must be positive")
    disc = 2.0 * m * q * np.sqrt(2.0 * q * q + m * q)
    r_minus = (q * q * (m - q) - disc) / (m + q) ** 2
    r_plus = (q * q * (m - q) + disc) / (m + q) ** 2
    return float(r_minus), float(r_plus)


@dataclass(frozen=True)
class EnvelopeData:
    """Envelope constants of a resonant run: roots and exponential rate."""

    mass: float
    momentum: float
    rate: float
    r_minus: float
    r_plus: float


def envelope_data(mass: float, momentum: float) -> EnvelopeData:
    r_minus, r_plus = envelope_roots(mass, momentum)
    return EnvelopeData(
        mass=mass,
        momentum=momentum,
        rate=growth_rate(mass, momentum),
        r_minus=r_minus,
        r_plus=r_plus,
    )


def find_blowup_initial(mass: float, momentum: float, p_abs: float) -> RationalState:
    """Construct a resonant state with prescribed mass, momentum and |p|.

    Gauge choice: b and c real positive, the dynamical phase carried by p.
    |c| and |b| follow from the closed forms; the remaining relative phase
    is found by a sign-change scan (256 samples) plus bisection on the
    resonance residual, to a residual tolerance of 1e-12.

    Raises when Q >= 4M (resonance unreachable), when the implied |b|^2 is
    nonpositive, or when no sign change exists (the residual range is
    reported).
    """
    q, m = float(mass), float(momentum)
    if not (0.0 < q < 4.0 * m):
        raise ValueError("need 0 < Q < 4M for a resonant state")
    if not 0.0 < p_abs < 1.0:
        raise ValueError("need 0 < p_abs < 1")
    c_mag = np.sqrt(m) * (1.0 - p_abs ** 2)
    b_sq = q - np.sqrt(m) * c_mag
    if b_sq <= 0.0:
        raise ValueError(
            f"infeasible request: Q - sqrt(M)|c| = {b_sq:g} must be positive"
        )
    b_mag = np.sqrt(b_sq)

    def residual(psi: float) -> float:
        return resonance_residual(
            RationalState(b_mag, c_mag, p_abs * np.exp(1j * psi))
        )

    n_scan = 256
    grid = np.linspace(0.0, 2.0 * np.pi, n_scan, endpoint=False)
    vals = np.array([residual(x) for x in grid])
    lo = hi = None
    for i in range(n_scan):
        a, bnd = vals[i], vals[(i + 1) % n_scan]
        if a == 0.0:
            lo = hi = grid[i]
            break
        if (a < 0.0) != (bnd < 0.0):
            lo = grid[i]
            hi = grid[i] + 2.0 * np.pi / n_scan
            break
    if lo is None:
        raise ValueError(
            "no resonant phase exists for these targets; residual stays in "
            f"[{vals.min():g}, {vals.max():g}]"
        )
    flo = residual(lo)
    psi = lo
    for _ in range(200):
        psi = 0.5 * (lo + hi)
        fmid = residual(psi)
        if abs(fmid) < 1e-12 or hi - lo < 1e-15:
            break
        if (flo < 0.0) != (fmid < 0.0):
            hi = psi
        else:
            lo, flo = psi, fmid
    return RationalState(b_mag, c_mag, p_abs * np.exp(1j * psi))


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares growth diagnostic over the late-time window."""

    rate: float
    window: tuple[float, float]
    n_points: int


def growth_diagnostic(traj: RationalTrajectory, s: float,
                      t_stop: float | None = None) -> GrowthFit:
    """Fitted exponential rate of the H^s-norm proxy M^(s+1/2) |c|^(1-2s).

    The fit window runs from the first time |c| drops below half its initial
    value to ``t_stop`` (or the end of the record).  On resonant data the
    slope approaches (2s-1) * rate; s = 1/2 gives identically zero (the
    energy-space norm stays bounded).  Raises with "no exponential regime"
    when |c| never halves or recovers inside the window (the bounded,
    non-resonant branch of the dichotomy).
    """
    if s < 0.5:
        raise ValueError("the diagnostic applies for s >= 1/2")
    ac = traj.abs_c()
    t = traj.t
    if t_stop is not None:
        keep = t <= t_stop
        t, ac = t[keep], ac[keep]
    if len(t) < 2:
        raise ValueError("trajectory too short")
    below = np.nonzero(ac < 0.5 * ac[0])[0]
    if below.size == 0:
        raise ValueError("no exponential regime: |c| never drops below half "
                         "its initial value")
    i0 = int(below[0])
    tw, cw = t[i0:], ac[i0:]
    if np.max(cw) > 1.05 * cw[0]:
        raise ValueError("no exponential regime: |c| is non-monotone in the "
                         "late-time window")
    if len(tw) < 10:
        raise ValueError("window too short: need at least 10 points")
    if cw[0] / cw[-1] < 100.0 and s != 0.5:
        raise ValueError("window too short: |c| decays by fewer than two "
                         "decades")
    mom = conserved_quantities(traj.state_at(0)).momentum
    y = np.log(mom ** (0.5 + s) * cw ** (1.0 - 2.0 * s))
    slope = float(np.polyfit(tw, y, 1)[0])
    return GrowthFit(rate=slope, window=(float(tw[0]), float(tw[-1])),
                     n_points=len(tw))

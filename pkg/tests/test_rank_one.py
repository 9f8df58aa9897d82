"""Rank-one invariant manifold: closed forms, reduced ODE, turbulence."""

import numpy as np
import pytest

from qszego import flow, rank_one as r1
from qszego import hankel as hk
from qszego import spectrum as sp
from qszego.flow import FlowConfig
from qszego.rank_one import RationalState


# ----------------------------------------------------------------- the type

def test_state_validation():
    with pytest.raises(ValueError, match=r"\|p\|"):
        RationalState(1.0, 1.0, 1.0)
    with pytest.raises(ValueError, match="c must be nonzero"):
        RationalState(1.0, 0.0, 0.5)
    with pytest.raises(ValueError, match="finite"):
        RationalState(np.nan, 1.0, 0.5)


# ----------------------------------------------------------------- synthesis

def test_to_spectrum_examples(geo_state):
    tiny = r1.to_spectrum(RationalState(1.0, 1e-9, 0.0), 3)
    assert np.array_equal(tiny, np.array([1.0, 1e-9, 0.0, 0.0]))
    z = r1.to_spectrum(RationalState(0.0, 1.0, 0.0), 2)
    assert np.array_equal(z, np.array([0.0, 1.0, 0.0]))
    geo = r1.to_spectrum(geo_state, 4)
    assert np.array_equal(geo, np.array([1.0, 1.0, 0.5, 0.25, 0.125]))


# -------------------------------------------------------------- closed forms

def test_cubic_moment_pole_only():
    s = RationalState(0.0, 1.0, 0.5)
    assert abs(r1.cubic_moment(s) - 8.0 / 9.0) < 1e-15
    # cross-check against the spectral computation
    j_spec = sp.cubic_moment(r1.to_spectrum(s, 64))
    assert abs(r1.cubic_moment(s) - j_spec) < 1e-13


def test_cubic_moment_examples(geo_state):
    assert abs(r1.cubic_moment(geo_state) - 41.0 / 9.0) < 1e-14
    b, c = 0.7 - 0.2j, 1.1 + 0.4j
    s = RationalState(b, c, 0.0)
    assert abs(r1.cubic_moment(s) - (abs(b) ** 2 * b + 2.0 * b * abs(c) ** 2)) < 1e-14


def test_conserved_closed_forms(geo_state):
    z = r1.conserved_quantities(RationalState(0.0, 1.0, 0.0))
    assert (z.mass, z.momentum, z.energy) == (1.0, 1.0, 0.0)
    c = r1.conserved_quantities(geo_state)
    assert abs(c.mass - 7.0 / 3.0) < 1e-14
    assert abs(c.momentum - 16.0 / 9.0) < 1e-14
    assert abs(c.energy - 0.5 * (41.0 / 9.0) ** 2) < 1e-12


def test_energy_expanded_cross_check(rng, geo_state):
    # two independent closed forms of the energy must coincide
    assert abs(r1.energy_expanded(geo_state)
               - r1.conserved_quantities(geo_state).energy) < 1e-12
    for _ in range(10):
        s = RationalState(
            rng.standard_normal() + 1j * rng.standard_normal(),
            rng.standard_normal() + 1j * rng.standard_normal(),
            0.8 * rng.uniform() * np.exp(2j * np.pi * rng.uniform()),
        )
        a = r1.energy_expanded(s)
        b = r1.conserved_quantities(s).energy
        assert abs(a - b) < 1e-11 * max(1.0, abs(a))


def test_closed_forms_match_spectral(rng):
    for _ in range(5):
        s = RationalState(
            0.9 * (rng.standard_normal() + 1j * rng.standard_normal()) / 1.5,
            0.9 * (rng.standard_normal() + 1j * rng.standard_normal()) / 1.5,
            0.7 * rng.uniform() * np.exp(2j * np.pi * rng.uniform()),
        )
        u = r1.to_spectrum(s, 256)
        a = r1.conserved_quantities(s)
        b = sp.conserved_quantities(u)
        assert abs(a.mass - b.mass) < 1e-12
        assert abs(a.momentum - b.momentum) < 1e-11
        assert abs(a.cubic - b.cubic) < 1e-11


# ------------------------------------------------------------ exact spectra

def test_hankel_singular_values_closed_form(geo_state):
    s1, s2 = r1.hankel_singular_values(geo_state)
    assert abs(s1 - 2.0) < 1e-14
    assert abs(s2 - 1.0 / 3.0) < 1e-14
    assert r1.hankel_top_singular_value(geo_state) == s1


def test_hankel_singular_values_match_sections(rng):
    for p in (0.0, 1e-9, 0.3, 0.8):
        s = RationalState(0.7 + 0.1j, -0.4 + 0.9j, p * np.exp(0.4j))
        u = r1.to_spectrum(s, 192)
        sec = np.linalg.svd(hk.hankel_matrix(u, 193), compute_uv=False)
        s1, s2 = r1.hankel_singular_values(s)
        assert abs(sec[0] - s1) < 1e-10
        assert abs(sec[1] - s2) < 1e-10
        assert np.max(sec[2:]) < 1e-10


def test_shifted_hankel_sigma_is_sqrt_momentum(rng):
    for _ in range(5):
        s = RationalState(
            rng.standard_normal() + 1j * rng.standard_normal(),
            rng.standard_normal() + 1j * rng.standard_normal(),
            0.8 * rng.uniform() * np.exp(2j * np.pi * rng.uniform()),
        )
        u = r1.to_spectrum(s, 192)
        sig = np.linalg.svd(hk.shifted_hankel_matrix(u, 193), compute_uv=False)
        want = r1.shifted_hankel_top_singular_value(s)
        assert abs(sig[0] - want) < 1e-9 * max(1.0, want)
        assert np.max(sig[1:]) < 1e-9


# ---------------------------------------------------------------- reduced ODE

def test_ode_rhs_stationary():
    db, dc, dp = r1.ode_rhs(RationalState(0.0, 1.0, 0.0))
    assert db == dc == dp == 0.0


def test_ode_rhs_geo(geo_state):
    db, dc, dp = r1.ode_rhs(geo_state)
    assert abs(dp - (-41j / 9.0)) < 1e-14


def test_pushforward_matches_pde_field(rng):
    # d/dt of the synthesis along the reduced field equals the spectral field
    n = 128
    for _ in range(6):
        s = RationalState(
            (rng.standard_normal() + 1j * rng.standard_normal()) / 2,
            (rng.standard_normal() + 1j * rng.standard_normal()) / 2,
            0.8 * rng.uniform() * np.exp(2j * np.pi * rng.uniform()),
        )
        b, c, p = s.as_tuple()
        db, dc, dp = r1.ode_rhs(s)
        k = np.arange(n)
        push = np.empty(n + 1, dtype=complex)
        push[0] = db
        push[1:] = dc * p ** k
        push[2:] += c * k[1:] * p ** (k[1:] - 1) * dp
        pde = flow.rhs(r1.to_spectrum(s, n))
        assert np.max(np.abs(push - pde)) < 1e-10


def test_evolve_ode_constant_trajectory():
    cfg = FlowConfig(dt=1e-3, t_end=0.5, monitor_stride=100)
    traj = r1.evolve_ode(RationalState(0.0, 1.0, 0.0), cfg)
    assert not traj.aborted
    assert np.max(np.abs(traj.b)) == 0.0
    assert np.max(np.abs(traj.c - 1.0)) < 1e-14
    assert np.max(np.abs(traj.p)) == 0.0


def test_evolve_ode_conservation_spec_budget(geo_state):
    # dt = 1e-4 over [0, 10]: closed-form invariants drift below 1e-9
    cfg = FlowConfig(dt=1e-4, t_end=10.0, monitor_stride=1000)
    traj = r1.evolve_ode(geo_state, cfg)
    assert not traj.aborted
    rec = traj.to_trajectory()
    d = rec.drift()
    assert d["Q"]["max_rel"] < 1e-9
    assert d["M"]["max_rel"] < 1e-9
    assert d["E"]["max_rel"] < 1e-9
    assert np.max(np.abs(traj.p)) < 1.0


def test_evolve_ode_aborts_near_unit_pole():
    # the resonant orbit is a separatrix: integrator drift bottoms |c| out
    # at a dt-dependent level, so the pole-abort needs a fine step to fire
    s = r1.find_blowup_initial(2.0, 1.0, 0.5)
    cfg = FlowConfig(dt=1e-4, t_end=9.0, monitor_stride=100)
    traj = r1.evolve_ode(s, cfg)
    assert traj.aborted
    assert "|p|" in traj.abort_reason
    assert np.max(np.abs(traj.p)) < 1.0


# ------------------------------------------------------------- resonance set

def test_resonance_residual_examples(geo_state):
    assert abs(r1.resonance_residual(RationalState(0.0, 1.0, 0.0)) + 0.5) < 1e-15
    # (1, 1, 1/2): E - Q^3/2 = (1681 - 2*343/3*...)/162 = 326/81
    assert abs(r1.resonance_residual(geo_state) - 326.0 / 81.0) < 1e-12


def test_growth_rate_examples():
    assert abs(r1.growth_rate(2.0, 1.0) - 4.0) < 1e-14
    assert abs(r1.growth_rate(1.0, 1.0) - np.sqrt(3.0)) < 1e-14
    assert r1.growth_rate(4.0 - 1e-9, 1.0) < 3e-4  # continuous vanishing
    with pytest.raises(ValueError, match="Q < 4M"):
        r1.growth_rate(4.0, 1.0)
    with pytest.raises(ValueError):
        r1.growth_rate(-1.0, 1.0)


def test_envelope_roots_examples():
    rm, rp = r1.envelope_roots(2.0, 1.0)
    assert abs(rm - (-4.0 - 4.0 * np.sqrt(10.0)) / 9.0) < 1e-14
    assert abs(rp - (-4.0 + 4.0 * np.sqrt(10.0)) / 9.0) < 1e-14
    assert abs(rm * rp - (-16.0 / 9.0)) < 1e-12
    rm1, rp1 = r1.envelope_roots(1.0, 1.0)
    assert abs(rm1 + np.sqrt(3.0) / 2.0) < 1e-14
    assert abs(rp1 - np.sqrt(3.0) / 2.0) < 1e-14


def test_envelope_polynomial_identities(rng):
    q, m = 2.0, 1.0
    rm, rp = r1.envelope_roots(q, m)
    assert abs(r1.envelope_polynomial(rp, q, m)) < 1e-10
    assert r1.envelope_polynomial(0.0, q, m) == q ** 3 * (4 * m - q)
    for _ in range(20):
        x = rng.uniform(-3, 3)
        fact = (m + q) ** 2 * (x - rm) * (rp - x)
        val = r1.envelope_polynomial(x, q, m)
        assert abs(val - fact) < 1e-12 * max(1.0, abs(val))


def test_envelope_data_invariants():
    env = r1.envelope_data(2.0, 1.0)
    assert env.r_minus < 0.0 < env.r_plus
    assert abs(env.rate - 4.0) < 1e-14
    prod = -env.mass ** 3 * (4 * env.momentum - env.mass) / (env.mass + env.momentum) ** 2
    assert abs(env.r_plus * env.r_minus - prod) < 1e-12


# ------------------------------------------------------------ resonant hunt

def test_find_blowup_initial_reference():
    s = r1.find_blowup_initial(2.0, 1.0, 0.5)
    assert abs(r1.resonance_residual(s)) < 1e-10
    # gauge: b, c real positive, phase on p
    assert s.b.imag == 0 and s.b.real > 0
    assert s.c.imag == 0 and s.c.real > 0
    assert abs(abs(s.p) - 0.5) < 1e-14
    cons = r1.conserved_quantities(s)
    assert abs(cons.mass - 2.0) < 1e-12
    assert abs(cons.momentum - 1.0) < 1e-12


def test_find_blowup_initial_scaling_keeps_resonance():
    # the resonance identity is homogeneous: scaling (b, c) scales it out
    s = r1.find_blowup_initial(2.0, 1.0, 0.5)
    lam = 0.5
    scaled = RationalState(lam * s.b, lam * s.c, s.p)
    assert abs(r1.resonance_residual(scaled)) < 1e-10


def test_find_blowup_initial_errors():
    with pytest.raises(ValueError, match="0 < Q < 4M"):
        r1.find_blowup_initial(4.0, 1.0, 0.5)
    with pytest.raises(ValueError, match="no resonant phase"):
        r1.find_blowup_initial(2.0, 1.0, 0.01)


# --------------------------------------------------------- turbulence checks

@pytest.fixture(scope="module")
def resonant_run():
    s = r1.find_blowup_initial(2.0, 1.0, 0.5)
    cfg = FlowConfig(dt=2e-4, t_end=5.0, monitor_stride=10)
    return s, r1.evolve_ode(s, cfg)


def test_resonant_run_decays(resonant_run):
    s, traj = resonant_run
    assert not traj.aborted
    ac = traj.abs_c()
    assert ac[-1] < 1e-6 * ac[0]
    assert np.max(np.abs(traj.p)) < 1.0
    # late regime: |p| climbs to 1 monotonically
    ap = traj.abs_p()
    late = traj.t > 2.0
    assert np.all(np.diff(ap[late]) > -1e-12)


def test_growth_diagnostic_rate(resonant_run):
    s, traj = resonant_run
    fit = r1.growth_diagnostic(traj, s=1.0)
    assert abs(fit.rate - 4.0) < 0.08  # (2s-1) * rate at s = 1
    half = r1.growth_diagnostic(traj, s=0.5)
    assert abs(half.rate) < 1e-10


def test_growth_diagnostic_rejects_bounded(geo_state):
    cfg = FlowConfig(dt=1e-3, t_end=3.0, monitor_stride=10)
    traj = r1.evolve_ode(geo_state, cfg)
    with pytest.raises(ValueError, match="no exponential regime"):
        r1.growth_diagnostic(traj, s=1.0)


def test_envelope_identity_along_resonant_run():
    # ((log|c|)')^2 equals P(|c| sqrt(M)) pointwise, via centered differences
    # at full sampling (the difference error scales with the sample spacing
    # squared); asserted before deep collapse, where the coordinate forms
    # stay well conditioned
    s = r1.find_blowup_initial(2.0, 1.0, 0.5)
    cfg = FlowConfig(dt=2e-4, t_end=2.0, monitor_stride=1)
    traj = r1.evolve_ode(s, cfg)
    cons = r1.conserved_quantities(s)
    ac = traj.abs_c()
    t = traj.t
    dlog = (np.log(ac[2:]) - np.log(ac[:-2])) / (t[2:] - t[:-2])
    envelope = np.array([
        r1.envelope_polynomial(x, cons.mass, cons.momentum)
        for x in ac[1:-1] * np.sqrt(cons.momentum)
    ])
    err = np.abs(dlog ** 2 - envelope)
    keep = ac[1:-1] >= 1e-2 * ac[0]
    assert np.max(err[keep]) < 1e-6


def test_re_bcp_identity_along_resonant_run(resonant_run):
    # the resonance constraint in coordinates, pointwise along the flow
    s, traj = resonant_run
    cons = r1.conserved_quantities(s)
    q, m = cons.mass, cons.momentum
    ac = traj.abs_c()
    w = 1.0 / (1.0 - np.abs(traj.p) ** 2)
    rb = (traj.b * np.conj(traj.c) * traj.p).real * w
    lhs = q * (q - ac * np.sqrt(m)) + 2.0 * (q + ac * np.sqrt(m)) * rb
    rhs = 2.0 * ac ** 2 * m - ac * m * np.sqrt(m)
    # the constraint is a difference of O(Q^2) terms, so its evaluation
    # degrades as |c| -> 0; assert it on the first three decades of decay
    keep = ac >= 1e-3 * ac[0]
    assert np.max(np.abs(lhs - rhs)[keep]) < 1e-8


def test_dichotomy_bounded_branch(geo_state):
    # non-resonant: |c| stays away from zero, H^1 stays bounded
    cfg = FlowConfig(dt=1e-3, t_end=10.0, monitor_stride=50)
    traj = r1.evolve_ode(geo_state, cfg)
    ac = traj.abs_c()
    assert np.min(ac) > 0.1
    h1 = np.array([
        np.sqrt(r1.h1_norm_sq(traj.state_at(i))) for i in range(len(traj))
    ])
    assert np.max(h1) < 10.0 * h1[0]


# ------------------------------------------------------------ record bridge

def test_to_trajectory_columns(geo_state):
    cfg = FlowConfig(dt=1e-3, t_end=0.2, monitor_stride=20)
    traj = r1.evolve_ode(geo_state, cfg)
    rec = traj.to_trajectory(spectrum_rank=3, tail_cutoff=64)
    assert rec.rank == 3
    assert np.allclose(rec.h_half ** 2, rec.mass + rec.momentum, rtol=1e-13)
    assert np.allclose(rec.sigmas[:, 0], np.sqrt(rec.momentum), rtol=1e-13)
    assert np.all(rec.sigmas[:, 1:] == 0.0)
    assert abs(rec.bmo[0] - 2.0) < 1e-13  # frozen rank-two value at t=0
    ap = np.abs(traj.p)
    assert np.allclose(rec.tail, np.abs(traj.c) * ap ** 64 / (1 - ap))

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from logdecay.discrete import build_grid
from logdecay.errors import AtSpectrumError, BranchDomainError, DomainError, GridError
from logdecay.models import (
    DeltaRing,
    Free,
    RoundWell,
    delta_ring_presonance,
    robin_disc_presonance,
    round_well_presonance,
)
from logdecay.radial import (
    ModeProblem,
    apply_resolvent,
    find_bound_states,
    presonance_certificate,
    real_axis_solutions,
    resonance_normalization,
    solve_mode,
    threshold_expansion,
    zero_energy_determinant,
)

J01 = 2.404825557695773


def kernel(model, mode, lam):
    return solve_mode(ModeProblem(model, mode, lam))


# -- kernel structure ---------------------------------------------------------


def test_free_kernel_closed_form():
    g = kernel(Free(), 0, 1.0)
    exact = 0.5j * np.pi * special.jv(0, 1.0) * special.hankel1(0, 2.0)
    assert g(1.0, 2.0) == pytest.approx(exact, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 6), st.floats(0.05, 6), st.floats(0.2, 3), st.floats(0.01, 3.0))
def test_kernel_symmetry(r, rp, mod, ang):
    g = kernel(RoundWell(J01, 1.0), 1, mod * np.exp(1j * ang))
    assert abs(g(r, rp) - g(rp, r)) <= 1e-9 * max(abs(g(r, rp)), 1e-300)


@pytest.mark.parametrize("model", [RoundWell(0.9 * J01, 1.0), DeltaRing(-2.0, 1.0)])
@pytest.mark.parametrize("lam", [1.0, 0.3 + 0.4j, 2j, -1 + 0.5j])
def test_wronskian_constant(model, lam):
    g = kernel(model, 1, lam)
    r = np.concatenate([np.linspace(0.05, 0.95, 7), np.linspace(1.05, 8, 7)])
    w = g.wronskian_at(r)
    assert np.max(np.abs(w - g.wronskian)) <= 1e-8 * abs(g.wronskian)


def test_problem_validation():
    with pytest.raises(AtSpectrumError):
        ModeProblem(Free(), 0, 0.0)
    with pytest.raises(BranchDomainError):
        ModeProblem(Free(), 0, -1j)
    with pytest.raises(ValueError):
        ModeProblem(Free(), 5, 1.0)


# -- threshold behaviour ------------------------------------------------------


def test_delta_ring_resonant_growth():
    # at a p-resonance g ~ lam^{-2} / log(lam)
    mdl, _ = delta_ring_presonance(1.0)
    vals = []
    for lam in (1e-3, 1e-4, 1e-5):
        g = kernel(mdl, 1, lam)(1.5, 2.0)
        vals.append(abs(g) * lam**2 * abs(np.log(lam)))
    assert vals[1] / vals[0] == pytest.approx(1.0, rel=0.1)
    assert vals[2] / vals[1] == pytest.approx(1.0, rel=0.1)


def test_off_resonance_kernel_bounded_by_log():
    mdl = RoundWell(0.9 * J01, 1.0)
    for lam in (1e-2, 1e-4, 1e-6):
        for m in (0, 1):
            assert abs(kernel(mdl, m, lam)(1.5, 2.0)) <= 10 * abs(np.log(lam))


def _mp_delta_b(lam0):
    """b for the R = 1 delta ring at resonance, from mpmath Bessel functions."""
    a = mp.mpf(-2)

    def lam_d(lam):
        lam = mp.mpf(lam)
        c = 2 / lam
        u = c * mp.besselj(1, lam)
        du = c * (lam * mp.besselj(1, lam, derivative=1) + a * mp.besselj(1, lam))
        h, dh = mp.hankel1(1, lam), lam * mp.besselj(1, lam, 1) + 1j * lam * mp.bessely(1, lam, 1)
        return lam * (u * dh - du * h)

    with mp.workdps(40):
        y = [lam_d(x) / mp.mpf(x) ** 2 for x in (lam0, 2 * lam0)]
        c1 = (y[1] - y[0]) / mp.log(2)
        c0 = y[0] - c1 * mp.log(lam0)
        return complex(mp.exp(c0 / c1))


def test_threshold_branch_constant_against_mpmath():
    te = threshold_expansion(delta_ring_presonance(1.0)[0], 1)
    assert te.resonant and te.d0 == 0
    assert te.branch_constant == pytest.approx(_mp_delta_b(1e-6), abs=1e-3)


@pytest.mark.parametrize("make", [lambda: round_well_presonance(1.0, 1)[0],
                                  lambda: delta_ring_presonance(1.0)[0],
                                  lambda: robin_disc_presonance(1.0)[0]])
def test_resonance_normalization_is_one(make):
    assert resonance_normalization(make(), 1) == pytest.approx(1.0, abs=1e-4)


def test_threshold_expansion_off_resonance():
    te = threshold_expansion(RoundWell(0.9 * J01, 1.0), 1)
    assert not te.resonant and abs(te.d0) > 1e-3


def test_presonance_certificate():
    for mdl in (round_well_presonance(1.0, 1)[0], delta_ring_presonance(1.0)[0],
                robin_disc_presonance(1.0)[0]):
        cert = presonance_certificate(mdl, 1)
        assert abs(cert["determinant"]) <= 1e-12
        assert abs(cert["slope"]) >= 0.1
    assert abs(zero_energy_determinant(RoundWell(1.1 * J01, 1.0), 1)) >= 1e-3


# -- applying the resolvent ---------------------------------------------------


def _bump(r, c=2.0, s=0.5):
    return np.exp(-((r - c) ** 2) / (2 * s * s))


def test_free_m0_against_modified_bessel_oracle():
    # at lam = i the m = 0 kernel is I0(r<) K0(r>)
    r = np.linspace(0, 20, 8001)
    u = apply_resolvent(ModeProblem(Free(), 0, 1j), r, _bump(r))
    for x in (0.5, 2.0, 4.0):
        left = integrate.quad(lambda s: special.i0(s) * _bump(s) * s, 0, x)[0]
        right = integrate.quad(lambda s: special.k0(s) * _bump(s) * s, x, 20)[0]
        exact = special.k0(x) * left + special.i0(x) * right
        j = int(np.argmin(np.abs(r - x)))
        assert u[j] == pytest.approx(exact, rel=1e-4)


def test_ode_residual():
    mdl = RoundWell(0.9 * J01, 1.0)
    lam = 2 + 0.001j
    h = 5e-4
    r = np.arange(0, 12 + h / 2, h)
    f = _bump(r, 3.0)
    u = apply_resolvent(ModeProblem(mdl, 1, lam), r, f)
    # 5-point stencils away from the origin and the interface kink
    i = np.arange(2, r.size - 2)
    i = i[(np.abs(r[i] - 1.0) > 5 * h) & (r[i] > 0.1)]
    upp = (-u[i + 2] + 16 * u[i + 1] - 30 * u[i] + 16 * u[i - 1] - u[i - 2]) / (12 * h * h)
    up = (-u[i + 2] + 8 * u[i + 1] - 8 * u[i - 1] + u[i - 2]) / (12 * h)
    lhs = -upp - up / r[i] + u[i] / r[i] ** 2 + (mdl.potential(r[i]) - lam**2) * u[i]
    assert np.max(np.abs(lhs - f[i])) <= 1e-6


def test_resolvent_identity():
    mdl = RoundWell(0.9 * J01, 1.0)
    r = np.linspace(0, 30, 6001)
    f = _bump(r)
    l1, l2 = 1j, 2j
    p1, p2 = ModeProblem(mdl, 1, l1), ModeProblem(mdl, 1, l2)
    lhs = apply_resolvent(p1, r, f) - apply_resolvent(p2, r, f)
    rhs = (l1**2 - l2**2) * apply_resolvent(p1, r, apply_resolvent(p2, r, f))
    assert np.max(np.abs(lhs - rhs)) <= 1e-5 * np.max(np.abs(lhs))


def test_limiting_absorption():
    mdl = RoundWell(0.9 * J01, 1.0)
    r = np.linspace(0, 10, 2001)
    f = _bump(r)
    on = apply_resolvent(ModeProblem(mdl, 1, 2.0), r, f)
    near = apply_resolvent(ModeProblem(mdl, 1, 2.0 + 1e-7j), r, f)
    assert np.max(np.abs(on - near)) <= 1e-4 * np.max(np.abs(on))


def test_zero_data_and_interface_grid():
    r = np.linspace(0, 5, 101)
    assert not np.any(apply_resolvent(ModeProblem(Free(), 0, 1j), r, np.zeros_like(r)))
    with pytest.raises(GridError):
        apply_resolvent(ModeProblem(RoundWell(1.5, 1.01), 0, 1j), r, _bump(r))
    with pytest.raises(DomainError):
        solve_mode(ModeProblem(RoundWell(1.0, 1.0), 0, 1j))


def test_real_axis_density_matches_kernel():
    mdl = RoundWell(0.9 * J01, 1.0)
    lam = 1.5
    ureg, D2 = real_axis_solutions(mdl, 1, lam, np.array([0.5, 2.0]))
    density = 2 / np.pi * ureg[0, 0] * ureg[0, 1] / D2[0]
    assert kernel(mdl, 1, lam)(0.5, 2.0).imag == pytest.approx(density, rel=1e-9)


# -- bound states -------------------------------------------------------------


def test_bound_states_against_dense_oracle():
    well = RoundWell(J01, 1.0)
    (s0,) = find_bound_states(well, 0)
    assert find_bound_states(well, 1) == []
    (s1,) = find_bound_states(RoundWell(1.05 * J01, 1.0), 1)
    # the dense finite-volume operator converges at O(h^2)
    for state, mdl in ((s0, well), (s1, RoundWell(1.05 * J01, 1.0))):
        mu = build_grid(mdl, state.mode, 0.005, 40.0).eigh()[0][0]
        assert state.energy == pytest.approx(mu, abs=2e-3 * max(1, abs(mu)))
    assert s1.energy == pytest.approx(-0.17452579, abs=1e-6)
    assert not -0.1 < s1.energy < 0


def test_bound_state_normalised():
    (s,) = find_bound_states(RoundWell(1.05 * J01, 1.0), 1)
    f = lambda x: s.profile(np.array([x]))[0] ** 2 * x  # noqa: E731
    total = integrate.quad(f, 0, 1)[0] + integrate.quad(f, 1, 200, limit=200)[0]
    assert total == pytest.approx(1.0, rel=1e-8)


def test_free_has_no_bound_states():
    assert find_bound_states(Free(), 0) == []

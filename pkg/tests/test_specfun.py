import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logdecay.errors import BranchDomainError, DomainError, SingularityError
from logdecay.specfun import (
    BesselZeroIndex,
    BranchedComplex,
    bessel_ik,
    bessel_j,
    bessel_jp,
    bessel_y,
    bessel_zero,
    branch_arg,
    branch_log,
    hankel1,
    hankel1p,
)

# frozen from mpmath.besseljzero / mpmath.besselj at 30 digits
J01 = 2.404825557695773
J02 = 5.520078110286311
J1_AT_J01 = 0.5191474972894669


def mp_h1(n, z):
    """H^(1)_n on the slit plane, continued through the upper half plane."""
    z = mp.mpc(z)
    if z.real < 0 and z.imag < 0:
        w = -z
        return -((-1) ** n) * mp.hankel2(n, w)
    return mp.hankel1(n, z)


# -- branch convention --------------------------------------------------------


def test_branch_arg_range():
    pts = np.array([1, 1j, -1, -1 - 1e-3j, 1 - 1j, -1 + 1j])
    a = branch_arg(pts)
    assert np.all(a > -np.pi / 2) and np.all(a < 1.5 * np.pi)
    assert branch_arg(-1 - 1e-3j) == pytest.approx(np.pi + 1e-3, rel=1e-6)


def test_excluded_ray_rejected():
    with pytest.raises(BranchDomainError):
        BranchedComplex(-2j)
    with pytest.raises(BranchDomainError):
        branch_arg(np.array([1.0, -0.5j]))
    with pytest.raises(BranchDomainError):
        BranchedComplex.polar(1.0, -np.pi / 2)


@given(st.floats(0.01, 100), st.floats(-math.pi / 2 + 1e-6, 1.5 * math.pi - 1e-6))
def test_polar_roundtrip(r, a):
    z = BranchedComplex.polar(r, a)
    assert z.arg == pytest.approx(a, abs=1e-12)
    assert branch_log(z.value) == pytest.approx(complex(math.log(r), a), abs=1e-12)


# -- J, Y, H ------------------------------------------------------------------


def test_j_examples():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert abs(bessel_j(0, J01)) <= 1e-12
    assert bessel_j(1, J01) == pytest.approx(J1_AT_J01, rel=1e-14)


@pytest.mark.parametrize("x", [0.1, 1.0, 7.3, 25.0, 49.0])
@pytest.mark.parametrize("n", [0, 1])
def test_j_real_axis_against_mpmath(n, x):
    assert bessel_j(n, x) == pytest.approx(float(mp.besselj(n, x)), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("z", [0.3 + 0.2j, 3 - 1j, -4 + 0.5j, -2 - 0.7j, 0.01j, 15 + 2j])
@pytest.mark.parametrize("n", [0, 1, 2])
def test_hankel_and_y_off_axis_against_mpmath(n, z):
    assert hankel1(n, z) == pytest.approx(complex(mp_h1(n, z)), rel=1e-11)
    y = complex((mp_h1(n, z) - mp.besselj(n, z)) / 1j)
    assert bessel_y(n, z) == pytest.approx(y, rel=1e-11)


def test_hankel_continuous_across_negative_real_axis():
    # third-quadrant continuation must join the second quadrant smoothly
    for n in (0, 1):
        above = hankel1(n, -3 + 1e-10j)
        below = hankel1(n, -3 - 1e-10j)
        assert abs(above - below) <= 1e-8 * abs(above)


@pytest.mark.parametrize("x", [0.5, 1.0, 5.0, 20.0])
def test_wronskian(x):
    w = bessel_j(0, x) * hankel1p(0, x) - bessel_jp(0, x) * hankel1(0, x)
    assert w == pytest.approx(2j / (np.pi * x), rel=1e-9)


def test_hankel_is_j_plus_iy():
    assert hankel1(0, 1.0) == pytest.approx(complex(mp.besselj(0, 1), mp.bessely(0, 1)), rel=1e-14)


def test_hankel_decays_off_axis():
    x = np.linspace(1, 20, 60)
    mags = np.abs(hankel1(0, x * (1 + 0.1j)))
    assert np.all(np.diff(mags) < 0)


@pytest.mark.parametrize("z", [0.5, 1.0, 2.4, 10.0])
def test_j1_recurrence_by_finite_differences(z):
    h = 1e-5
    fd = (bessel_j(1, z + h) - bessel_j(1, z - h)) / (2 * h)
    assert fd == pytest.approx(bessel_j(0, z) - bessel_j(1, z) / z, rel=1e-9)


def test_real_in_real_out_and_conjugate_symmetry():
    assert np.isrealobj(bessel_j(0, np.linspace(0, 5, 7)))
    for z in (1 + 0.5j, 3 + 2j, 0.2 + 0.1j):
        for n in (0, 1):
            lhs = hankel1(n, np.conj(z))
            rhs = np.conj(bessel_j(n, z) - 1j * bessel_y(n, z))
            assert lhs == pytest.approx(rhs, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 30), st.floats(-0.95, 2.95))
def test_wronskian_everywhere_on_branch_domain(mod, turns):
    z = mod * np.exp(1j * np.pi * turns / 2)
    for n in (0, 1, 3):
        a = bessel_j(n, z) * hankel1p(n, z)
        b = bessel_jp(n, z) * hankel1(n, z)
        exact = 2j / (np.pi * z)
        # off the real axis both products grow like e^{2|Im z|}; allow for the cancellation
        assert abs(a - b - exact) <= 1e-8 * abs(exact) + 1e-13 * (abs(a) + abs(b))


def test_singular_at_origin():
    with pytest.raises(SingularityError):
        hankel1(0, 0.0)
    with pytest.raises(SingularityError):
        bessel_y(1, 0.0)


# -- modified functions and zeros --------------------------------------------


def test_ik_examples():
    assert bessel_ik(0, "I", 0.0) == 1.0
    assert bessel_ik(1, "I", 0.0) == 0.0
    assert np.all(bessel_ik(0, "I", np.linspace(0, 30, 301)) > 0)
    assert bessel_ik(1, "K", 2.0) == pytest.approx(float(mp.besselk(1, 2)), rel=1e-13)
    with pytest.raises(DomainError):
        bessel_ik(0, "K", 0.0)
    with pytest.raises(DomainError):
        bessel_ik(0, "I", -1.0)


def test_zero_examples():
    assert bessel_zero(BesselZeroIndex(0, 1)) == J01
    assert repr(bessel_zero(0, 1)) == "2.404825557695773"
    assert bessel_zero(0, 2) == pytest.approx(J02, abs=1e-12)


@pytest.mark.parametrize("n", range(1, 11))
@pytest.mark.parametrize("order", [0, 1])
def test_zeros_correctly_rounded(order, n):
    z = bessel_zero(order, n)
    assert z == float(mp.besseljzero(order, n))
    assert abs(bessel_j(order, z)) <= 1e-12


def test_zeros_interlace():
    for n in (1, 2, 3):
        assert bessel_zero(0, n) < bessel_zero(1, n) < bessel_zero(0, n + 1)


def test_zero_index_validation():
    with pytest.raises(ValueError):
        BesselZeroIndex(0, 0)
    with pytest.raises(ValueError):
        BesselZeroIndex(2, 1)

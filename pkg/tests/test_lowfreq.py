import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logdecay.errors import InsufficientDataError
from logdecay.lowfreq import count_presonances, default_lambdas, fit_expansion, sample_lowfreq
from logdecay.models import RoundWell, delta_ring_presonance, robin_disc_presonance, round_well_presonance
from logdecay.radial import threshold_expansion
from logdecay.specfun import branch_log
from logdecay.wave import gaussian_bump

J01 = 2.404825557695773


def _lams(**kw):
    return np.array([z.value for z in default_lambdas(**kw)])


def _synthetic(lam, c, b, tail=0.0):
    L = branch_log(lam)
    y = c[0] / lam**2 + c[1] / (lam**2 * (L + cmath.log(b))) + c[2] * L + c[3]
    return y + tail * lam**2 * L


# -- synthetic round trips ----------------------------------------------------


@settings(max_examples=15, deadline=None)
@given(st.floats(-2.5, 2.5), st.floats(-1.5, 1.5), st.floats(0.3, 3.0))
def test_synthetic_resonant_roundtrip(re_beta, im_beta, amp):
    b = cmath.exp(complex(re_beta, im_beta))
    lam = _lams()
    c = (0.0, amp, 0.2 - 0.1j, 1.0)
    fit = fit_expansion(list(zip(lam, _synthetic(lam, c, b))))
    assert fit.M == 1
    # b enters only through a logarithm, so it is the least well determined value
    assert fit.resonance_b == pytest.approx(b, rel=1e-5)
    assert fit.resonance_term.coeff == pytest.approx(amp, rel=1e-5)
    assert abs(fit.zero_eigen_amp) <= 1e-6 * amp


def test_synthetic_zero_eigenvalue():
    lam = _lams()
    fit = fit_expansion(list(zip(lam, _synthetic(lam, (0.7, 0.0, 0.1, 1.0), 1.0))))
    assert fit.M == 0
    assert fit.zero_eigen_amp == pytest.approx(0.7, rel=1e-8)


def test_synthetic_regular_is_not_resonant():
    lam = _lams()
    y = _synthetic(lam, (0.0, 0.0, 0.3, 1.0), 1.0, tail=0.5)
    fit = fit_expansion(list(zip(lam, y)))
    assert fit.M == 0
    assert fit.contributions["presonance"] <= 1e-3


def test_evaluate_reproduces_samples():
    lam = _lams()
    y = _synthetic(lam, (0.0, 1.0, 0.2, 1.0), -0.5j)
    fit = fit_expansion(list(zip(lam, y)))
    assert np.max(np.abs(fit.evaluate(lam) - y) / np.abs(y)) <= 1e-8
    rep = fit.report()
    assert rep["M"] == 1 and len(rep["terms"]) == 4


def test_insufficient_data():
    lam = _lams()
    y = _synthetic(lam, (0.0, 1.0, 0.2, 1.0), -0.5j)
    with pytest.raises(InsufficientDataError):
        fit_expansion(list(zip(lam[:20], y[:20])))
    narrow = _lams(lo=1e-3, hi=1e-2 * 0.99)
    with pytest.raises(InsufficientDataError):
        fit_expansion(list(zip(narrow, _synthetic(narrow, (0, 1, 0, 1), -0.5j))))
    one_ray = _lams(per_ray=30, rays=(np.pi / 2,))
    with pytest.raises(InsufficientDataError):
        fit_expansion(list(zip(one_ray, _synthetic(one_ray, (0, 1, 0, 1), -0.5j))))


# -- real models --------------------------------------------------------------


F = gaussian_bump(2.5, 0.5)


@pytest.mark.parametrize("make", [lambda: round_well_presonance(1.0, 1)[0],
                                  lambda: delta_ring_presonance(1.0)[0],
                                  lambda: robin_disc_presonance(1.0)[0]])
def test_resonant_models_detected(make):
    mdl = make()
    M, fits, agree = count_presonances(mdl, F)
    assert M == 2 and agree
    b = threshold_expansion(mdl, 1).branch_constant
    for fit in fits.values():
        assert fit.resonance_b == pytest.approx(b, abs=1e-3)
        assert abs(cmath.phase(fit.resonance_b) + np.pi / 2) <= 1e-3


@pytest.mark.parametrize("fac", [0.9, 1.1])
def test_off_resonance_not_detected(fac):
    M, fits, _ = count_presonances(RoundWell(fac * J01, 1.0), F, modes=(1,))
    assert M == 0
    assert fits[1].contributions["presonance"] <= 1e-3


def test_sample_cap():
    with pytest.raises(ValueError):
        sample_lowfreq(RoundWell(J01, 1.0), 1, F, [0.5j])

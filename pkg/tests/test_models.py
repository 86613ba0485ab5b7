import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.ndimage import binary_erosion

from logdecay.errors import ConstructionError
from logdecay.models import (
    DeltaRing,
    Free,
    RobinDisc,
    RoundWell,
    delta_ring_presonance,
    lq_tail_integral,
    matching_residuals,
    model_from_config,
    model_to_config,
    product_cutoff,
    robin_disc_presonance,
    round_well_presonance,
    smooth_step,
    vws_construct,
)
from logdecay.radial import zero_energy_determinant

J01 = 2.404825557695773
J1_AT_J01 = 0.5191474972894669


def test_round_well_examples():
    mdl, st_ = round_well_presonance(1.0, 1)
    assert mdl.a == pytest.approx(J01, abs=1e-14)
    assert st_.inner_coeff == pytest.approx(1 / J1_AT_J01, rel=1e-13)
    mdl2, _ = round_well_presonance(2.0, 1)
    assert mdl2.a == pytest.approx(1.2024127788478865, abs=1e-14)


@pytest.mark.parametrize("R", [0.5, 1.0, 2.0, 3.7])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_round_well_residuals(R, n):
    mdl, st_ = round_well_presonance(R, n)
    res = matching_residuals(mdl, st_)
    assert abs(res["continuity"]) <= 1e-10
    assert abs(res["derivative"]) <= 1e-10
    assert abs(res["existence"]) <= 1e-12
    eps = 1e-9 * R
    assert st_.profile(R - eps) == pytest.approx(1 / R, rel=1e-7)
    assert st_.profile(R + eps) == pytest.approx(1 / R, rel=1e-7)


def test_delta_ring_examples():
    mdl, st_ = delta_ring_presonance(1.0)
    assert mdl.a == -2.0
    # f'(1+) - f'(1-) = -1 - 1 = -2 = a f(1)
    assert st_.derivative(1.0 + 1e-12) - st_.derivative(1.0 - 1e-12) == pytest.approx(-2.0)
    assert delta_ring_presonance(2.0)[0].a == -1.0
    for R in (0.5, 1.0, 2.0):
        mdl, st_ = delta_ring_presonance(R)
        res = matching_residuals(mdl, st_)
        assert res["jump"] == 0.0 and res["continuity"] == 0.0
        assert st_.inner_coeff * R == st_.outer_coeff / R


def test_robin_examples():
    mdl, states = robin_disc_presonance(1.0)
    assert mdl.sigma == 1.0 and len(states) == 2
    assert sorted(s.mode for s in states) == [-1, 1]
    assert robin_disc_presonance(0.5)[0].sigma == 2.0
    for s in states:
        assert s.profile(3.0) == pytest.approx(1 / 3)
        assert matching_residuals(mdl, s)["robin"] == 0.0


def test_q_integrability():
    for mdl, st_ in (round_well_presonance(1.0, 1), delta_ring_presonance(1.0)):
        I2 = [lq_tail_integral(st_, 2.0, c) for c in (1e2, 1e4, 1e6)]
        # q = 2 grows like log(cutoff): 1 : 2 : 3
        assert I2[1] / I2[0] == pytest.approx(2.0, rel=0.05)
        assert I2[2] / I2[0] == pytest.approx(3.0, rel=0.05)
        I3 = [lq_tail_integral(st_, 3.0, c) for c in (1e2, 1e4, 1e6)]
        assert I3[2] - I3[1] < 1e-3 * I3[2]


def test_off_resonance_not_detected():
    for fac in (0.9, 1.1):
        mdl = RoundWell(fac * J01, 1.0)
        assert abs(zero_energy_determinant(mdl, 1)) >= 1e-3


def test_model_validation():
    with pytest.raises(ConstructionError):
        RoundWell(1.0, -1.0)
    with pytest.raises(ConstructionError):
        RobinDisc(0.0, 1.0)
    with pytest.raises(ConstructionError):
        round_well_presonance(1.0, 0)


@given(st.sampled_from(["round-well", "delta-ring", "robin-disc", "free"]),
       st.floats(0.1, 10), st.floats(0.1, 10))
def test_config_roundtrip(variant, x, y):
    mdl = {"round-well": RoundWell(x, y), "delta-ring": DeltaRing(-x, y),
           "robin-disc": RobinDisc(x, y), "free": Free()}[variant]
    assert model_from_config(model_to_config(mdl)) == mdl


def test_config_rejects_unknown_keys():
    with pytest.raises(ConstructionError):
        model_from_config("variant = round-well\na = 1\nR = 1\nsigma = 2\n")
    with pytest.raises(ConstructionError):
        model_from_config("variant = hexagon\n")


# -- variable wave speed construction ----------------------------------------


def _grid(h, half=3.0):
    n = 2 * int(round(half / h)) + 1
    x = (np.arange(n) - n // 2) * h
    return np.meshgrid(x, x, indexing="ij")


def test_smooth_step():
    s = np.linspace(-1, 2, 31)
    v = smooth_step(s)
    assert np.all(v[s <= 0] == 1) and np.all(v[s >= 1] == 0)
    assert np.all(np.diff(v) <= 0)


def test_vws_zero_regions_and_symmetry_line():
    X1, X2 = _grid(0.02)
    chi = product_cutoff(X1, X2)
    g = vws_construct(1.0, chi, 1.0, 0.02)
    assert np.all(np.isfinite(g.V))
    # chi derivatives use a 5-point stencil, so only the eroded flat regions are exact
    inner = binary_erosion(chi == 1.0, iterations=2)
    outer = binary_erosion(chi == 0.0, iterations=2, border_value=1)
    assert inner.any() and outer.any()
    assert np.all(g.V[inner] == 0.0)
    assert np.all(np.abs(g.V[outer]) <= 1e-12)
    mid = X1.shape[0] // 2
    assert np.all(g.u_p[mid] == 0.0)


@pytest.mark.parametrize("variable", [False, True])
def test_vws_second_order(variable):
    res = []
    for h in (0.01, 0.005):
        X1, X2 = _grid(h)
        c = 1.0 + 0.3 * np.exp(-((X1 - 0.5) ** 2 + X2**2)) if variable else 1.0
        res.append(np.abs(vws_construct(c, product_cutoff(X1, X2), 1.0, h).residual()).max())
    assert 3.5 <= res[0] / res[1] <= 4.5


def test_vws_rejects_bad_cutoff():
    h = 0.05
    X1, X2 = _grid(h)
    # the x1 cutoff window slides sideways for |x2| > 0.5, so d chi/d x1 != 0 on x1 = 0
    shift = 0.8 * (1.0 - smooth_step((np.abs(X2) - 0.5) / 0.5))
    chi = product_cutoff(X1 - shift, X2, 0.3, 1.2) * product_cutoff(0 * X1, X2, 2.0, 2.8)
    with pytest.raises(ConstructionError, match="x1 = 0"):
        vws_construct(1.0, chi, 1.0, h)
    with pytest.raises(ConstructionError):
        vws_construct(1.0, product_cutoff(X1, X2), -1.0, h)

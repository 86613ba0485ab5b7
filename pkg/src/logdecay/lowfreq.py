"""Low-frequency structure of the resolvent from scalar samples.

Near lam = 0 the paired resolvent <g, R(lam) f> is fitted to

    c_{-2} / lam^2 + c_p / (lam^2 log(b lam)) + c_l log lam + c_0,

i.e. the zero-eigenvalue term, one reciprocal-log (p-resonance) term and
the regular logarithmic background.  The branch constant enters
nonlinearly through beta = log b; for fixed beta the problem is linear, so
beta is found by variable projection (a coarse grid, then least squares
over Re beta, Im beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import FitDegeneracyError, InsufficientDataError
from .models import RadialModel, RobinDisc
from .radial import ModeProblem, apply_resolvent, pairing
from .specfun import BranchedComplex, branch_log

LAMBDA0 = 1e-1
RAYS = (0.5 * np.pi, 0.25 * np.pi, 0.75 * np.pi)
SIGNIFICANCE = 1e-3
MAX_CONDITION = 1e12
ELIMINATION_RATIO = 2.0


@dataclass(frozen=True)
class ExpansionTerm:
    nu: float
    k: int                 # log power; -1 encodes 1/log(b lam)
    b: complex | None
    coeff: complex


@dataclass
class ExpansionFit:
    terms: list
    M: int
    zero_eigen_amp: complex
    residual: float
    contributions: dict = field(default_factory=dict)
    condition: float = float("nan")

    @property
    def resonance_term(self) -> ExpansionTerm:
        return next(t for t in self.terms if t.k == -1)

    @property
    def resonance_b(self) -> complex:
        return self.resonance_term.b

    def evaluate(self, lam):
        lam = np.asarray(lam, dtype=complex)
        L = branch_log(lam)
        out = np.zeros(lam.shape, dtype=complex)
        for t in self.terms:
            if t.k == -1:
                out += t.coeff / (lam**2 * (L + np.log(t.b)))
            elif t.k == 1:
                out += t.coeff * L
            else:
                out += t.coeff * lam**t.nu
        return out

    def report(self) -> dict:
        return {
            "M": self.M,
            "residual": self.residual,
            "condition": self.condition,
            "terms": [
                {"nu": t.nu, "k": t.k, "b": None if t.b is None else [t.b.real, t.b.imag],
                 "arg_b": None if t.b is None else math.atan2(t.b.imag, t.b.real),
                 "coeff": [t.coeff.real, t.coeff.imag]}
                for t in self.terms
            ],
        }


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def default_lambdas(lo=1e-4, hi=1e-2, per_ray=10, rays=RAYS):
    out = []
    for a in rays:
        for s in np.geomspace(lo, hi, per_ray):
            out.append(BranchedComplex.polar(s, a))
    return out


def _grid(model, data_hi, window_hi, h):
    r0 = model.rho if isinstance(model, RobinDisc) else 0.0
    top = max(data_hi, window_hi)
    n = int(math.ceil((top - r0) / h))
    r = r0 + h * np.arange(n + 1)
    # nudge the spacing so every interface is a node
    for R in model.interfaces:
        if r0 < R < r[-1]:
            j = int(round((R - r0) / h))
            hh = (R - r0) / j
            n = int(math.ceil((top - r0) / hh))
            r = r0 + hh * np.arange(n + 1)
    return r


def sample_lowfreq(model: RadialModel, mode: int, f, lambdas, window=None, h: float = 0.005,
                   lam0: float = LAMBDA0):
    """<g, R(lam) f> for each lam, g a fixed positive window (default: f itself).

    ``f`` and ``window`` are RadialData-like callables with ``lo``/``hi``.
    """
    window = window if window is not None else f
    r = _grid(model, f.hi, window.hi, h)
    fv, gv = f(r), window(r)
    out = []
    for lam in lambdas:
        lam = lam.value if isinstance(lam, BranchedComplex) else complex(lam)
        if abs(lam) > lam0:
            raise ValueError(f"|lambda| = {abs(lam):.3g} above the low-frequency cap {lam0}")
        u = apply_resolvent(ModeProblem(model, mode, lam), r, fv)
        out.append(complex(pairing(r, u, gv, model.interfaces)))
    return out


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------


def _design(lam, L, beta):
    return np.stack([lam**-2, 1.0 / (lam**2 * (L + beta)), L, np.ones_like(lam)], axis=1)


def _solve_linear(lam, L, y, beta, wts, keep=(0, 1, 2, 3)):
    keep = list(keep)
    A = _design(lam, L, beta)[:, keep] * wts[:, None]
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    As = A / scale
    c, *_ = np.linalg.lstsq(As, y * wts, rcond=None)
    resid = As @ c - y * wts
    coef = np.zeros(4, dtype=complex)
    coef[keep] = c / scale
    return coef, resid, np.linalg.cond(As)


def _check_samples(samples):
    if len(samples) < 24:
        raise InsufficientDataError("need at least 24 samples")
    lam = np.array([complex(s[0].value if isinstance(s[0], BranchedComplex) else s[0]) for s in samples])
    mags = np.abs(lam)
    if math.log10(mags.max() / mags.min()) < 2 - 1e-9:
        raise InsufficientDataError("samples must span at least two decades in |lambda|")
    rays = np.unique(np.round(np.angle(lam), 6))
    if rays.size < 2:
        raise InsufficientDataError("samples must lie on at least two rays")
    return lam


def _rms(r):
    return float(np.linalg.norm(r) / math.sqrt(len(r)))


def fit_expansion(samples, *, significance: float = SIGNIFICANCE, max_condition: float = MAX_CONDITION,
                  beta_grid=None, elimination_ratio: float = ELIMINATION_RATIO) -> ExpansionFit:
    """Least-squares fit of the four-term low-frequency model.

    ``samples`` is a sequence of (lambda, value).  The two singular
    columns are then pruned by backward elimination: a column is dropped
    when refitting without it raises the weighted residual by less than
    ``elimination_ratio``.  Off resonance the truncated lam^2 log lam terms
    are otherwise absorbed by a nearly cancelling pair of singular columns.
    M counts the surviving reciprocal-log terms whose largest contribution
    over the samples exceeds ``significance`` times that of the dominant
    term.  ``contributions`` also lists the unpruned values (``*_full``).
    """
    lam = _check_samples(samples)
    y = np.array([complex(s[1]) for s in samples])
    L = branch_log(lam)
    wts = 1.0 / np.maximum(np.abs(y), 1e-300)

    def resid(p):
        _, r, _ = _solve_linear(lam, L, y, p[0] + 1j * p[1], wts)
        return np.concatenate([r.real, r.imag])

    if beta_grid is None:
        beta_grid = [(x, yy) for x in np.linspace(-3, 3, 13) for yy in np.linspace(-3, 3, 13)]
    best = min(beta_grid, key=lambda p: float(np.sum(resid(p) ** 2)))
    sol = least_squares(resid, np.array(best, dtype=float), method="lm", xtol=1e-14, ftol=1e-14)
    beta = sol.x[0] + 1j * sol.x[1]
    coef_full, r_full, cond = _solve_linear(lam, L, y, beta, wts)
    if not np.isfinite(cond) or cond > max_condition:
        raise FitDegeneracyError(f"design matrix condition {cond:.3e}", cond)
    names = ("zero_eigen", "presonance", "log", "const")
    cols = _design(lam, L, beta)

    def shares(coef):
        c = np.abs(cols * coef).max(axis=0)
        return c / c.max()

    keep = [0, 1, 2, 3]
    base = _rms(r_full)
    floor = 1e-13
    while True:
        trials = []
        for j in (0, 1):
            if j in keep:
                _, rj, _ = _solve_linear(lam, L, y, beta, wts, [i for i in keep if i != j])
                trials.append((_rms(rj), j))
        drop = [(rj, j) for rj, j in trials if rj <= elimination_ratio * base + floor]
        if not drop:
            break
        rj, j = min(drop)
        keep.remove(j)
        base = rj
    coef, r, _ = _solve_linear(lam, L, y, beta, wts, keep)
    contributions = {n: float(c) for n, c in zip(names, shares(coef))}
    contributions.update({n + "_full": float(c) for n, c in zip(names, shares(coef_full))})
    M = int(contributions["presonance"] > significance)
    b = complex(np.exp(beta))
    terms = [
        ExpansionTerm(-2.0, 0, None, complex(coef[0])),
        ExpansionTerm(-2.0, -1, b, complex(coef[1])),
        ExpansionTerm(0.0, 1, 1.0 + 0j, complex(coef[2])),
        ExpansionTerm(0.0, 0, None, complex(coef[3])),
    ]
    residual = _rms(r)
    return ExpansionFit(terms, M, complex(coef[0]), residual, contributions, float(cond))


def count_presonances(model: RadialModel, f, modes=(1, -1), lambdas=None, window=None, **kw):
    """Fit each angular mode separately; returns (M_total, {mode: fit}, b_agree).

    Whether the two modes share b is reported, not enforced.
    """
    lambdas = lambdas if lambdas is not None else default_lambdas()
    fits = {}
    for m in modes:
        vals = sample_lowfreq(model, m, f, lambdas, window, **kw)
        fits[m] = fit_expansion(list(zip(lambdas, vals)))
    resonant = [m for m in modes if fits[m].M]
    bs = [fits[m].resonance_b for m in resonant]
    agree = bool(len(bs) < 2 or all(abs(x - bs[0]) <= 1e-3 * abs(bs[0]) for x in bs))
    return sum(fits[m].M for m in modes), fits, agree

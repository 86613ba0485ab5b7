"""Deformed contours and zero-energy time profiles.

The path Gamma_eta runs from -eta - i gamma up to -eta, over the upper
semicircle |lambda| = eta through i eta, and back down to eta - i gamma,
with gamma = gamma(r(t)) = (1/C) exp(-C' log(t)/A).  Along it we integrate

    exp(-i t lam) lam^nu log(b lam)^k,

where k < 0 means the reciprocal power 1/log(b lam)^|k|.  On the
semicircle exp(-i t lam) grows to e^{t eta} at the apex while the integral
stays O(t), so for t eta > ``MP_THRESHOLD`` the semicircle is summed with
mpmath at a working precision that absorbs the cancellation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .errors import ContourSpecError, QuadratureError
from .specfun import branch_arg

MP_THRESHOLD = 2.0
DEFAULT_A, DEFAULT_C, DEFAULT_CPRIME = 4.0, 1.0, 1.0


@dataclass(frozen=True)
class ContourSpec:
    t: float
    eta: float
    A: float = DEFAULT_A
    C: float = DEFAULT_C
    Cprime: float = DEFAULT_CPRIME

    def __post_init__(self):
        for name in ("A", "C", "Cprime", "eta"):
            if not getattr(self, name) > 0:
                raise ContourSpecError(f"{name} must be positive")
        if not self.A > self.Cprime:
            raise ContourSpecError("A must exceed Cprime")
        if not self.t >= 2:
            raise ContourSpecError("t must be >= 2")
        if not self.radius > self.eta:
            raise ContourSpecError(f"r(t) = {self.radius:.4g} must exceed eta = {self.eta:.4g}")

    @property
    def radius(self) -> float:
        """r(t) = log(t)/A."""
        return math.log(self.t) / self.A

    @property
    def gamma(self) -> float:
        """gamma(r(t)) = (1/C) exp(-C' r(t))."""
        return math.exp(-self.Cprime * self.radius) / self.C

    def check_branch(self, b: complex):
        if not self.eta < 1.0 / (2.0 * abs(b)):
            raise ContourSpecError(f"eta = {self.eta} must be below 1/(2|b|) = {1 / (2 * abs(b)):.4g}")

    def with_eta(self, eta):
        return ContourSpec(self.t, eta, self.A, self.C, self.Cprime)


@dataclass(frozen=True)
class Piece:
    name: str
    s0: float
    s1: float
    kind: str            # "vertical" or "arc"
    anchor: float        # x-position for vertical pieces, radius for the arc

    def z(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "vertical":
            return self.anchor + 1j * s
        return self.anchor * np.exp(1j * s)

    def dz(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "vertical":
            return np.full(s.shape, 1j)
        return 1j * self.anchor * np.exp(1j * s)

    @property
    def length(self):
        scale = 1.0 if self.kind == "vertical" else self.anchor
        return abs(self.s1 - self.s0) * scale


@dataclass(frozen=True)
class ContourPath:
    pieces: tuple

    @property
    def start(self):
        p = self.pieces[0]
        return complex(p.z(p.s0))

    @property
    def end(self):
        p = self.pieces[-1]
        return complex(p.z(p.s1))

    @property
    def length(self):
        return sum(p.length for p in self.pieces)

    @property
    def apex(self):
        arc = self.pieces[1]
        return complex(arc.z(0.5 * np.pi))

    def sample(self, n_per_piece=64):
        return np.concatenate([p.z(np.linspace(p.s0, p.s1, n_per_piece)) for p in self.pieces])


def build_contour(spec: ContourSpec) -> ContourPath:
    """Gamma_eta oriented left to right."""
    g, eta = spec.gamma, spec.eta
    return ContourPath((
        Piece("left", -g, 0.0, "vertical", -eta),
        Piece("semicircle", np.pi, 0.0, "arc", eta),
        Piece("right", 0.0, -g, "vertical", eta),
    ))


@dataclass(frozen=True)
class MomentSpec:
    nu: float
    k: int
    b: complex = -1j

    def __post_init__(self):
        object.__setattr__(self, "b", complex(self.b))
        if self.b == 0:
            raise ContourSpecError("b must be nonzero")


def _log_b(b):
    return complex(np.log(b))


def integrand(lam, t, mom: MomentSpec):
    """exp(-i t lam) lam^nu log(b lam)^k with arg lam in (-pi/2, 3pi/2)."""
    lam = np.asarray(lam, dtype=complex)
    loglam = np.log(np.abs(lam)) + 1j * branch_arg(lam)
    val = np.exp(-1j * t * lam + mom.nu * loglam)
    if mom.k:
        val = val * (loglam + _log_b(mom.b)) ** mom.k
    return val


def _cquad(f, a, b, eps, points=None):
    kw = dict(limit=500, epsabs=eps, epsrel=1e-13)
    if points is not None:
        kw["points"] = points
    with warnings.catch_warnings():
        # roundoff warnings are reflected in the returned error estimate
        warnings.simplefilter("ignore", IntegrationWarning)
        re, e1 = quad(lambda s: f(s).real, a, b, **kw)
        im, e2 = quad(lambda s: f(s).imag, a, b, **kw)
    return re + 1j * im, math.hypot(e1, e2)


def _piece_double(piece, t, mom, eps):
    f = lambda s: complex(integrand(piece.z(s), t, mom) * piece.dz(s))  # noqa: E731
    lo, hi = sorted((piece.s0, piece.s1))
    sign = 1.0 if piece.s1 >= piece.s0 else -1.0
    pts = None
    if piece.kind == "vertical" and t * (hi - lo) > 8:
        # exp(t y) decays on the scale 1/t below the real axis
        pts = [y for y in (-1.0 / t, -4.0 / t, -16.0 / t) if lo < y < hi]
    elif piece.kind == "arc":
        n = int(min(200, max(0, math.ceil(t * piece.anchor * np.pi / 2))))
        pts = list(np.linspace(lo, hi, n + 2)[1:-1]) or None
    v, e = _cquad(f, lo, hi, eps, pts)
    return sign * v, e


def _arc_mp(piece, t, mom, panels):
    """Semicircle integral summed in extended precision, with an error estimate."""
    eta = piece.anchor
    dps = 20 + int(math.ceil(t * eta / math.log(10)))
    with mp.workdps(dps):
        tt, e, nu = mp.mpf(t), mp.mpf(eta), mp.mpf(mom.nu)
        logb = mp.log(mp.mpc(mom.b))

        def f(th):
            lam = e * mp.expj(th)
            loglam = mp.log(e) + 1j * th      # th in [0, pi] lies inside the branch domain
            val = mp.exp(-1j * tt * lam + nu * loglam) * 1j * lam
            if mom.k:
                val *= (loglam + logb) ** mom.k
            return val

        edges = mp.linspace(mp.pi, 0, panels + 1)
        v, err = mp.quad(f, edges, method="gauss-legendre", maxdegree=5, error=True)
        return complex(v), float(err)


def moment(spec: ContourSpec, mom: MomentSpec, *, pieces=("left", "semicircle", "right"),
           rtol: float = 1e-10, return_error: bool = False):
    """int over Gamma_eta of exp(-i t lam) lam^nu log(b lam)^k d lam."""
    spec.check_branch(mom.b)
    path = build_contour(spec)
    t = spec.t
    # size of the answer sets the absolute tolerance per piece
    scale = max(1.0, t) ** max(1.0, 1.0 - mom.nu)
    eps = 1e-14
    total, err = 0.0 + 0.0j, 0.0
    for piece in path.pieces:
        if piece.name not in pieces:
            continue
        if piece.kind == "arc" and t * piece.anchor > MP_THRESHOLD:
            panels = max(8, int(math.ceil(t * piece.anchor)))
            v, e = _arc_mp(piece, t, mom, panels)
        else:
            v, e = _piece_double(piece, t, mom, eps)
        total += v
        err += e
    if err > rtol * (1.0 + abs(total)) and err > 1e-14 * scale:
        raise QuadratureError(f"moment error estimate {err:.3e} exceeds tolerance", err)
    return (total, err) if return_error else total


def endpoint_floor(spec: ContourSpec, mom: MomentSpec) -> float:
    """Bound on the bottom-segment difference between eta and eta/2 paths.

    Both paths close through the segment [eta/2, eta] - i gamma (and its
    mirror), where |exp(-i t lam)| = e^{-t gamma}.
    """
    lam = np.linspace(spec.eta / 2, spec.eta, 33) - 1j * spec.gamma
    vals = np.abs(integrand(lam, spec.t, mom))
    vals = np.concatenate([vals, np.abs(integrand(-np.conj(lam) + 0j * lam, spec.t, mom))])
    return float(spec.eta * vals.max())


def path_independent(spec: ContourSpec, mom: MomentSpec, rtol=1e-8):
    """Compare moments for eta and eta/2; returns (ok, value, value_half, floor).

    The two paths differ only by the bottom segments, so the agreement test
    is relative with an absolute floor made of the endpoint bound and the
    two quadrature error estimates.  The floor matters only when the moment
    itself is of the size of those terms (the entire integrand, whose
    moment is 2 e^{-t gamma} sin(t eta)/t).
    """
    a, ea = moment(spec, mom, return_error=True)
    b, eb = moment(spec.with_eta(spec.eta / 2), mom, return_error=True)
    floor = endpoint_floor(spec, mom) + ea + eb
    ok = abs(a - b) <= rtol * max(abs(a), abs(b)) + floor
    return ok, a, b, floor


def jm_profile(t, b=-1j, *, eta=None, A=DEFAULT_A, C=DEFAULT_C, Cprime=DEFAULT_CPRIME,
               rtol=1e-8, max_halvings=12, imag_tol=1e-6):
    """Zero-energy profile J(t) = (1/2 pi) int exp(-i t lam) / (lam^2 log(b lam)).

    The eta -> 0 limit is certified by halving eta until two successive
    values agree to ``rtol``.  The result is real by the reflection
    lam -> -conj(lam); the imaginary residual is checked and dropped.
    """
    b = complex(b)
    if eta is None:
        eta = min(1.0 / t, 0.25 / abs(b), 0.5 * math.log(t) / A)
    mom = MomentSpec(-2.0, -1, b)
    spec = ContourSpec(float(t), float(eta), A, C, Cprime)
    prev, eprev = moment(spec, mom, return_error=True)
    for _ in range(max_halvings):
        spec = spec.with_eta(spec.eta / 2)
        cur, ecur = moment(spec, mom, return_error=True)
        # paths for eta and eta/2 differ by e^{-t gamma}-small bottom segments
        floor = endpoint_floor(spec.with_eta(2 * spec.eta), mom) + eprev + ecur
        if abs(cur - prev) <= rtol * abs(cur) + floor:
            break
        prev, eprev = cur, ecur
    else:
        raise QuadratureError("eta halving did not settle", abs(cur - prev))
    cur = cur / (2 * np.pi)
    if abs(cur.imag) > imag_tol * abs(cur):
        from .errors import BranchDomainError
        raise BranchDomainError(f"J(t) has imaginary part {cur.imag:.3e}; check b and orientation")
    return float(cur.real)


@dataclass(frozen=True)
class RemainderBudget:
    s: float
    p: float
    q: float

    def __post_init__(self):
        if min(self.s, self.p, self.q) < 0:
            raise ValueError("indices must be non-negative")
        if self.s + self.p < self.q:
            raise ValueError("need s + p >= q")
        if not self.exponent > 0:
            raise ValueError("exponent must be positive")

    @property
    def exponent(self) -> float:
        return 2.0 * (self.s + self.p - self.q) + 1.0


def remainder_window(budget: RemainderBudget, t_grid):
    """log(t)^-(2(s+p-q)+1) on the grid."""
    t = np.asarray(t_grid, dtype=float)
    return np.log(t) ** (-budget.exponent)

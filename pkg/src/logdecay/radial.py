"""Per-mode radial resolvent (P - lambda^2)^{-1} for the radial models.

For angular mode m the operator is

    L f = -f'' - f'/r + (m^2/r^2 + V) f,

self-adjoint in L^2(r dr).  The resolvent kernel is

    g(r, r') = -u_reg(r_<) u_out(r_>) / D,    D = r W[u_reg, u_out],

where u_reg is regular at the origin (or satisfies the Robin relation at
rho), u_out is proportional to H^(1)_m(lambda r) outside the scatterer, and
D is the r-weighted Wronskian (r-independent).  Exterior solutions are
expanded in the pair (J_m(lambda r), H^(1)_m(lambda r)); the coefficients
come from Wronskians at the interface, which keeps the p-resonant regime
(D -> 0) free of catastrophic cancellation in the solutions themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special as sp
from scipy.optimize import brentq

from .errors import AtSpectrumError, DomainError, GridError
from .models import DeltaRing, Free, RadialModel, RobinDisc, RoundWell
from .specfun import BranchedComplex, bessel_y, branch_arg, hankel1, hankel1p

M_MAX = 4
AT_SPECTRUM_TOL = 1e-13
_RW_JH = 2j / np.pi      # r W[J_m(lam r), H_m(lam r)]
_RW_JY = 2.0 / np.pi     # r W[J_m(k r), Y_m(k r)]


@dataclass(frozen=True)
class ModeProblem:
    model: RadialModel
    mode: int
    lam: complex
    m_max: int = M_MAX

    def __post_init__(self):
        lam = self.lam.value if isinstance(self.lam, BranchedComplex) else complex(self.lam)
        branch_arg(lam)
        if lam == 0:
            raise AtSpectrumError("lambda = 0 is the threshold; approach it along a ray")
        if abs(self.mode) > self.m_max:
            raise ValueError(f"|mode| must be <= {self.m_max}")
        object.__setattr__(self, "lam", lam)


# ---------------------------------------------------------------------------
# solution coefficients, vectorised over lambda
# ---------------------------------------------------------------------------


def _jp(n, z):
    return sp.jvp(n, z)


def _yp(n, z):
    return sp.yvp(n, z)


class _Solutions:
    """Regular/outgoing solutions for an array of spectral parameters."""

    def __init__(self, model: RadialModel, mode: int, lam):
        self.model = model
        self.n = n = abs(int(mode))
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        self.lam = lam
        if isinstance(model, Free):
            self.R = 0.0
            # u_reg = J, u_out = H, D = 2i/pi
            self.D = np.full(lam.shape, _RW_JH)
            return
        R = model.interfaces[0]
        self.R = R
        x = lam * R
        H, Hp = hankel1(n, x), hankel1p(n, x)
        J, Jp = sp.jv(n, x), _jp(n, x)
        if isinstance(model, RoundWell):
            k = np.sqrt(lam**2 + model.a**2)
            if np.any(k == 0):
                # J(kr), Y(kr) degenerate; the interior basis would be r^{+-m}
                raise DomainError("lam = i a makes the interior wavenumber vanish")
            self.k = k
            kR = k * R
            u, du = sp.jv(n, kR), k * _jp(n, kR)
        elif isinstance(model, DeltaRing):
            # interior J_m(lam r) scaled to behave like r^m as lam -> 0
            self.c_in = math.factorial(n) * (2.0 / lam) ** n
            u, du = self.c_in * J, self.c_in * (lam * Jp + model.a * J)
        elif isinstance(model, RobinDisc):
            u = np.ones_like(lam)
            du = -model.sigma * np.ones_like(lam)
        else:  # pragma: no cover
            raise TypeError(model)
        self.u_R, self.du_R = u, du
        # exterior regular solution p J + q H
        self.D = R * (u * lam * Hp - du * H)
        self.p = self.D / _RW_JH
        self.q = R * (J * du - lam * Jp * u) / _RW_JH
        # interior outgoing solution
        if isinstance(model, RoundWell):
            k = self.k
            kR = k * R
            v, dv = H, lam * Hp
            self.s = R * (v * k * _yp(n, kR) - dv * sp.yv(n, kR)) / _RW_JY
            self.w = R * (sp.jv(n, kR) * dv - k * _jp(n, kR) * v) / _RW_JY
        elif isinstance(model, DeltaRing):
            v, dv = H, lam * Hp - model.a * H
            self.s = R * (v * lam * Hp - dv * H) / _RW_JH
            self.w = R * (J * dv - lam * Jp * v) / _RW_JH

    # the returned arrays have shape (n_lambda, n_r)

    def _split(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if isinstance(self.model, RobinDisc) and np.any(r < self.R - 1e-12):
            raise GridError("radii inside the Robin obstacle")
        return r, r < self.R

    def regular(self, r, derivative=False):
        n, lam = self.n, self.lam[:, None]
        r, inner = self._split(r)
        z = lam * r
        if isinstance(self.model, Free):
            return lam * _jp(n, z) if derivative else sp.jv(n, z)
        out = np.empty(z.shape, dtype=complex)
        zo = z[:, ~inner]
        p, q = self.p[:, None], self.q[:, None]
        if derivative:
            out[:, ~inner] = lam * (p * _jp(n, zo) + q * hankel1p(n, zo))
        else:
            out[:, ~inner] = p * sp.jv(n, zo) + q * hankel1(n, zo)
        if np.any(inner):
            ri = r[inner]
            if isinstance(self.model, RoundWell):
                k = self.k[:, None]
                zi = k * ri
                out[:, inner] = k * _jp(n, zi) if derivative else sp.jv(n, zi)
            else:
                zi = lam * ri
                c = self.c_in[:, None]
                out[:, inner] = c * (lam * _jp(n, zi) if derivative else sp.jv(n, zi))
        return out

    def outgoing(self, r, derivative=False):
        n, lam = self.n, self.lam[:, None]
        r, inner = self._split(r)
        out = np.empty((lam.shape[0], r.size), dtype=complex)
        zo = lam * r[~inner]
        with np.errstate(all="ignore"):
            out[:, ~inner] = lam * hankel1p(n, zo) if derivative else hankel1(n, zo)
            if np.any(inner):
                ri = r[inner]
                s, w = self.s[:, None], self.w[:, None]
                if isinstance(self.model, RoundWell):
                    k = self.k[:, None]
                    zi = k * ri
                    if derivative:
                        out[:, inner] = k * (s * _jp(n, zi) + w * _yp(n, zi))
                    else:
                        out[:, inner] = s * sp.jv(n, zi) + w * sp.yv(n, zi)
                else:
                    zi = lam * ri
                    if derivative:
                        out[:, inner] = lam * (s * _jp(n, zi) + w * hankel1p(n, zi))
                    else:
                        out[:, inner] = s * sp.jv(n, zi) + w * hankel1(n, zi)
        return out


# ---------------------------------------------------------------------------
# public kernel
# ---------------------------------------------------------------------------


class GreensKernel:
    """Variation-of-parameters resolvent kernel for one (model, mode, lambda)."""

    def __init__(self, problem: ModeProblem):
        self.problem = problem
        self._sol = _Solutions(problem.model, problem.mode, problem.lam)
        self.wronskian = complex(self._sol.D[0])

    def regular(self, r):
        return self._sol.regular(r)[0]

    def regular_prime(self, r):
        return self._sol.regular(r, derivative=True)[0]

    def outgoing(self, r):
        return self._sol.outgoing(r)[0]

    def outgoing_prime(self, r):
        return self._sol.outgoing(r, derivative=True)[0]

    def wronskian_at(self, r):
        """r (u_reg u_out' - u_reg' u_out), evaluated pointwise."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return r * (self.regular(r) * self.outgoing_prime(r) - self.regular_prime(r) * self.outgoing(r))

    def __call__(self, r, rp):
        r, rp = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(rp, dtype=float))
        lo, hi = np.minimum(r, rp), np.maximum(r, rp)
        flat_lo, flat_hi = lo.ravel(), hi.ravel()
        val = -self.regular(flat_lo) * self.outgoing(flat_hi) / self.wronskian
        return val.reshape(r.shape)


def solve_mode(problem: ModeProblem) -> GreensKernel:
    """Kernel of (L_m - lambda^2)^{-1}; raises if lambda^2 is at the spectrum."""
    kern = GreensKernel(problem)
    if abs(kern.wronskian) < AT_SPECTRUM_TOL:
        raise AtSpectrumError(f"|D| = {abs(kern.wronskian):.3e} below {AT_SPECTRUM_TOL}")
    return kern


# ---------------------------------------------------------------------------
# quadrature helpers
# ---------------------------------------------------------------------------


def interface_segments(r, interfaces):
    """Split a sorted grid into index ranges whose interior avoids interfaces.

    Every interface inside (r[0], r[-1]) must be a grid node.
    """
    r = np.asarray(r, dtype=float)
    cuts = [0]
    for R in interfaces:
        if r[0] < R < r[-1]:
            j = int(np.argmin(np.abs(r - R)))
            if abs(r[j] - R) > 1e-9 * max(1.0, R):
                raise GridError(f"interface r = {R} is not a grid node")
            cuts.append(j)
    cuts.append(r.size - 1)
    cuts = sorted(set(cuts))
    return list(zip(cuts[:-1], cuts[1:]))


def _cumsimpson(y, r, segments):
    if np.iscomplexobj(y):
        # scipy's cumulative_simpson drops imaginary parts
        return _cumsimpson(y.real, r, segments) + 1j * _cumsimpson(y.imag, r, segments)
    out = np.zeros(y.shape, dtype=y.dtype)
    offset = 0.0
    for i0, i1 in segments:
        seg = integrate.cumulative_simpson(y[..., i0:i1 + 1], x=r[i0:i1 + 1], axis=-1, initial=0.0)
        out[..., i0:i1 + 1] = seg + offset
        offset = out[..., i1:i1 + 1] if y.ndim > 1 else out[i1]
    return out


def _tail_cumsimpson(y, r, segments):
    """int_{r_i}^{r_end} y, accumulated from the right.

    Subtracting a forward cumulative sum from the total cancels badly once the
    regular solution grows like exp(|Im lam| r); summing from the right keeps
    the tail exact where the integrand vanishes.
    """
    n = r.size
    rev = [(n - 1 - i1, n - 1 - i0) for i0, i1 in reversed(segments)]
    return _cumsimpson(y[..., ::-1], (r[-1] - r)[::-1], rev)[..., ::-1]


def simpson_segments(y, r, segments):
    total = 0.0
    for i0, i1 in segments:
        total = total + integrate.simpson(y[..., i0:i1 + 1], x=r[i0:i1 + 1], axis=-1)
    return total


def apply_resolvent(problem: ModeProblem, r, f):
    """u = R(lambda) f on the grid ``r`` (uniform, interfaces on nodes).

    u(r) = -(1/D) [u_out(r) int_0^r u_reg f s ds + u_reg(r) int_r^inf u_out f s ds]
    with f vanishing beyond the grid.
    """
    kern = solve_mode(problem)
    r = np.asarray(r, dtype=float)
    f = np.asarray(f)
    if not np.any(f):
        return np.zeros(r.shape, dtype=complex)
    segs = interface_segments(r, problem.model.interfaces)
    rr = np.where(r > 0, r, 1.0)  # outgoing solution is never needed at r = 0
    ureg = kern.regular(r)
    uout = np.where(r > 0, kern.outgoing(rr), 0.0)
    inner = _cumsimpson(ureg * f * r, r, segs)
    outer = _tail_cumsimpson(uout * f * r, r, segs)
    first = np.where(r > 0, uout * inner, 0.0)
    return -(first + ureg * outer) / kern.wronskian


def pairing(r, a, b, interfaces=()):
    """<a, b> = int a conj(b) r dr on the grid."""
    segs = interface_segments(r, interfaces)
    return simpson_segments(np.asarray(a) * np.conj(b) * r, np.asarray(r), segs)


# ---------------------------------------------------------------------------
# zero energy
# ---------------------------------------------------------------------------


def zero_energy_determinant(model: RadialModel, mode: int) -> float:
    """r W[u_0, r^{-|m|}] at the outer interface, |m| >= 1.

    u_0 is the regular zero-energy solution (J_m(a r) in the well, r^m
    inside the ring, the Robin solution with u(rho) = 1).  It vanishes
    exactly when the exterior continuation of u_0 decays like r^{-|m|}.
    """
    n = abs(int(mode))
    if n == 0:
        raise ValueError("threshold determinant is defined for |m| >= 1")
    if isinstance(model, RoundWell):
        R, a = model.R, model.a
        u, du = sp.jv(n, a * R), a * sp.jvp(n, a * R)
        # normalise so that the determinant is scale free in the J amplitude
        return float(-(n * u + R * du) * R**-n)
    if isinstance(model, DeltaRing):
        return float(-(2 * n + model.a * model.R))
    if isinstance(model, RobinDisc):
        return float(-(n - model.rho * model.sigma) * model.rho**-n)
    raise ValueError("the free model has no threshold determinant")


def presonance_certificate(model: RadialModel, mode: int = 1, rel_step: float = 1e-6) -> dict:
    """Zero-energy determinant and its derivative in the model parameter."""
    det = zero_energy_determinant(model, mode)
    if isinstance(model, RoundWell):
        name, val = "a", model.a
    elif isinstance(model, DeltaRing):
        name, val = "a", model.a
    elif isinstance(model, RobinDisc):
        name, val = "sigma", model.sigma
    else:
        raise ValueError("free model")
    step = rel_step * max(abs(val), 1.0)
    hi = zero_energy_determinant(type(model)(**{**_fields(model), name: val + step}), mode)
    lo = zero_energy_determinant(type(model)(**{**_fields(model), name: val - step}), mode)
    return {"determinant": det, "parameter": name, "slope": (hi - lo) / (2 * step)}


def _fields(model):
    return {k: getattr(model, k) for k in model.__dataclass_fields__}


# ---------------------------------------------------------------------------
# bound states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundState:
    energy: float
    mode: int
    kappa: float
    model: RadialModel
    norm2: float      # int |phi_raw|^2 r dr of the un-normalised profile

    def profile(self, r):
        r = np.asarray(r, dtype=float)
        return _bound_raw(self.model, self.mode, self.kappa, r) / math.sqrt(self.norm2)

    def projection_weight(self, r, f):
        """<f, phi> on a grid (interfaces on nodes)."""
        return float(np.real(pairing(r, f, self.profile(r), self.model.interfaces)))


def _kratio(n, x):
    # K_n'(x) / K_n(x) without under/overflow
    return -(sp.kve(n - 1 if n else 1, x) / sp.kve(n, x)) - (n / x if n else 0.0)


def _bound_det(model, n, kappa):
    if isinstance(model, RoundWell):
        R = model.R
        k = math.sqrt(max(model.a**2 - kappa**2, 0.0))
        return k * sp.jvp(n, k * R) - kappa * _kratio(n, kappa * R) * sp.jv(n, k * R)
    if isinstance(model, DeltaRing):
        x = kappa * model.R
        return -1.0 / model.R - model.a * sp.ive(n, x) * sp.kve(n, x)
    if isinstance(model, RobinDisc):
        return kappa * _kratio(n, kappa * model.rho) + model.sigma
    raise TypeError(model)


def _bound_raw(model, n, kappa, r):
    n = abs(n)
    if isinstance(model, RoundWell):
        R = model.R
        k = math.sqrt(model.a**2 - kappa**2)
        c = sp.jv(n, k * R) / sp.kv(n, kappa * R)
        inside = sp.jv(n, k * np.minimum(r, R))
        outside = c * sp.kv(n, kappa * np.maximum(r, R))
        return np.where(r < R, inside, outside)
    if isinstance(model, DeltaRing):
        R = model.R
        c = sp.iv(n, kappa * R) / sp.kv(n, kappa * R)
        return np.where(r < R, sp.iv(n, kappa * np.minimum(r, R)), c * sp.kv(n, kappa * np.maximum(r, R)))
    if isinstance(model, RobinDisc):
        return np.where(r >= model.rho, sp.kv(n, kappa * np.maximum(r, model.rho)), 0.0)
    raise TypeError(model)


def _kappa_window(model):
    if isinstance(model, RoundWell):
        return model.a
    if isinstance(model, DeltaRing):
        return 2.0 * abs(model.a) + 10.0 / model.R
    if isinstance(model, RobinDisc):
        return 2.0 * abs(model.sigma) + 10.0 / model.rho
    return None


def find_bound_states(model: RadialModel, mode: int, n_grid: int = 64, eps: float = 1e-10):
    """Negative eigenvalues of mode ``mode``, most negative first.

    The matching determinant (divided by the positive exterior amplitude,
    so it has no poles) is bracketed on a log-spaced energy grid and each
    sign change refined with brentq to |dE| <= 1e-10.
    """
    kmax = _kappa_window(model)
    if kmax is None:
        return []
    n = abs(int(mode))
    emax = kmax**2
    energies = -np.logspace(np.log10(emax * eps), np.log10(emax * (1 - 1e-9)), n_grid)
    kap = np.sqrt(-energies)
    vals = np.array([_bound_det(model, n, k) for k in kap])
    states = []
    for i in range(n_grid - 1):
        if vals[i] == 0 or vals[i] * vals[i + 1] < 0:
            g = lambda e: _bound_det(model, n, math.sqrt(-e))  # noqa: E731
            e = brentq(g, energies[i + 1], energies[i], xtol=1e-12, rtol=1e-15, maxiter=500)
            kappa = math.sqrt(-e)
            states.append(BoundState(e, mode, kappa, model, _bound_norm2(model, n, kappa)))
    return sorted(states, key=lambda s: s.energy)


def _bound_norm2(model, n, kappa):
    f = lambda r: float(_bound_raw(model, n, kappa, np.array(r))) ** 2 * r  # noqa: E731
    lo = model.inner_radius
    R = model.interfaces[0]
    tail = R + 60.0 / kappa
    total = 0.0
    for a, b in ((lo, R), (R, tail)):
        if b > a:
            total += integrate.quad(f, a, b, limit=400, epsabs=0, epsrel=1e-12)[0]
    return total


# ---------------------------------------------------------------------------
# real axis: spectral density and threshold expansion
# ---------------------------------------------------------------------------


def _jr(n, x):
    # real-argument J_n; the Cephes j0/j1 kernels are much faster than jv
    if n == 0:
        return sp.j0(x)
    if n == 1:
        return sp.j1(x)
    return sp.jv(n, x)


def _yr(n, x):
    if n == 0:
        return sp.y0(x)
    if n == 1:
        return sp.y1(x)
    return sp.yn(n, x)


def _jrp(n, x):
    return -sp.j1(x) if n == 0 else _jr(n - 1, x) - n / x * _jr(n, x)


def _yrp(n, x):
    return -sp.y1(x) if n == 0 else _yr(n - 1, x) - n / x * _yr(n, x)


def real_axis_solutions(model: RadialModel, mode: int, lam, r):
    """Real regular solution and |D|^2 for real lam > 0.

    Outside the scatterer u_reg = alpha J_m(lam r) + beta Y_m(lam r) with
    real alpha, beta, and D = (2/pi)(i alpha - beta).  The jump of the
    kernel across the real axis is Im g(r, r') = (2/pi) u_reg(r) u_reg(r') / |D|^2.
    Returns (u_reg of shape (n_lam, n_r), |D|^2 of shape (n_lam,)).
    """
    n = abs(int(mode))
    lam = np.atleast_1d(np.asarray(lam, dtype=float))[:, None]
    r = np.atleast_1d(np.asarray(r, dtype=float))[None, :]
    if isinstance(model, Free):
        return _jr(n, lam * r), np.full(lam.shape[0], (2 / np.pi) ** 2)
    R = model.interfaces[0]
    x = lam * R
    J, Jp, Y, Yp = _jr(n, x), _jrp(n, x), _yr(n, x), _yrp(n, x)
    c = 1.0
    if isinstance(model, RoundWell):
        k = np.sqrt(lam**2 + model.a**2)
        u, du = _jr(n, k * R), k * _jrp(n, k * R)
    elif isinstance(model, DeltaRing):
        c = math.factorial(n) * (2.0 / lam) ** n
        u, du = c * J, c * (lam * Jp + model.a * J)
    else:
        u, du = np.ones_like(lam), -model.sigma * np.ones_like(lam)
    alpha = 0.5 * np.pi * R * (u * lam * Yp - du * Y)
    beta = 0.5 * np.pi * R * (J * du - lam * Jp * u)
    z = lam * r
    with np.errstate(all="ignore"):
        outer = alpha * _jr(n, z) + beta * _yr(n, np.where(z > 0, z, 1.0))
    if isinstance(model, RoundWell):
        inner = _jr(n, k * r)
    elif isinstance(model, DeltaRing):
        inner = c * _jr(n, z)
    else:
        inner = np.zeros(z.shape)          # no domain inside the Robin obstacle
    ureg = np.where(r < R, inner, outer)
    D2 = (2 / np.pi) ** 2 * (alpha**2 + beta**2)
    return ureg, D2[:, 0]


@dataclass(frozen=True)
class ThresholdExpansion:
    """lam D(lam) ~ d0 + lam^2 (c1 log lam + c0) on the real axis, |m| = 1."""

    d0: complex
    c1: complex
    c0: complex
    resonant: bool

    def lam_d(self, lam):
        lam = np.asarray(lam, dtype=float)
        return self.d0 + lam**2 * (self.c1 * np.log(lam) + self.c0)

    @property
    def branch_constant(self):
        """b with c1 log lam + c0 = c1 log(b lam)."""
        return complex(np.exp(self.c0 / self.c1))


def threshold_expansion(model: RadialModel, mode: int, lam0: float = 1e-4, snap: float = 1e-12):
    """Fit the small-lam structure of lam D from D(lam0), D(2 lam0).

    d0 comes from the exact zero-energy determinant (|m| = 1:
    lam D -> -(2i/pi) r W[u_0, 1/r]) and is snapped to 0 below ``snap``.
    """
    n = abs(int(mode))
    if n != 1:
        raise ValueError("threshold expansion is implemented for |m| = 1")
    if isinstance(model, Free):
        d0 = 0.0
        resonant = False
    else:
        D0 = zero_energy_determinant(model, n)
        resonant = abs(D0) < snap
        d0 = 0.0 if resonant else -2j / np.pi * D0
    lams = np.array([lam0, 2 * lam0])
    D = _Solutions(model, n, lams.astype(complex)).D
    y = (lams * D - d0) / lams**2
    c1 = (y[1] - y[0]) / np.log(2.0)
    c0 = y[0] - c1 * np.log(lam0)
    return ThresholdExpansion(complex(d0), complex(c1), complex(c0), resonant)


def resonance_normalization(model: RadialModel, mode: int = 1, lam0: float = 1e-4) -> complex:
    """kappa with g(r, r') ~ kappa U(r) U(r') / (lam^2 log(b lam)), U ~ 1/r.

    At a p-resonance u_out ~ -(2i/pi) lam^{-1} u_0 / B', where u_0 ~ B'/r
    is the zero-energy regular solution, and D ~ lam c1 log(b lam); so
    kappa = 2 i B' / (pi c1).  It is 1 up to the fit error for every model
    here; the value is measured rather than assumed.
    """
    te = threshold_expansion(model, mode, lam0)
    if isinstance(model, RoundWell):
        B = model.R * sp.jv(1, model.a * model.R)
    elif isinstance(model, DeltaRing):
        B = model.R**2
    elif isinstance(model, RobinDisc):
        B = model.rho
    else:
        raise ValueError("free model has no resonance")
    return complex(2j * B / (np.pi * te.c1))

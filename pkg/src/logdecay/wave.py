"""Per-mode wave evolution u(t) = sin(t sqrt(P)) / sqrt(P) f and its splitting.

Two independent solvers:

* :func:`evolve_fd` steps the finite-volume radial operator of
  :mod:`logdecay.discrete` with a fourth-order (modified equation) leapfrog;
* :func:`evolve_spectral` assembles the continuum solution from bound states
  plus Stone's formula,

      u_cont(r, t) = (2/pi) int_0^inf sin(t lam) Im[R(lam + i0) f](r) d lam,

  with Im g(r, r') = (2/pi) u_reg(r) u_reg(r') / |D|^2.

A third, :func:`evolve_eigen`, diagonalizes the discrete operator and is
the brute-force oracle for small instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numba import njit
from scipy import integrate
from scipy.interpolate import CubicSpline

from .contour import jm_profile
from .discrete import build_grid, calibrate_threshold
from .errors import (
    GridError,
    IncompleteSplitError,
    InsufficientDataError,
    QuadratureError,
    StabilityError,
)
from .models import DeltaRing, Free, RadialModel, ResonantState, RobinDisc, RoundWell
from .radial import (
    find_bound_states,
    real_axis_solutions,
    resonance_normalization,
    threshold_expansion,
)

MAX_CFL = 0.9
SPECTRAL_CUT = 1e-6


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialData:
    """Initial velocity f(r), supported in [lo, hi], with a resolution scale."""

    profile: Callable = field(repr=False, compare=False)
    lo: float
    hi: float
    feature: float
    label: str = ""

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape)
        inside = (r >= self.lo) & (r <= self.hi)
        out[inside] = self.profile(r[inside])
        return out

    def scaled(self, c):
        return RadialData(lambda r: c * self.profile(r), self.lo, self.hi, self.feature, self.label)


def gaussian_bump(center: float, width: float, cutoff: float = 6.0) -> RadialData:
    """exp(-(r - c)^2 / (2 w^2)) truncated at |r - c| = cutoff * w."""
    lo, hi = max(0.0, center - cutoff * width), center + cutoff * width
    prof = lambda r: np.exp(-0.5 * ((r - center) / width) ** 2)  # noqa: E731
    # feature size: the full width 2w of the central lobe
    return RadialData(prof, lo, hi, 2 * width, f"gaussian({center},{width})")


def smooth_bump(lo: float, hi: float) -> RadialData:
    """C-infinity bump exp(1 - 1/(1 - x^2)) on [lo, hi]."""
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def prof(r):
        x = (r - mid) / half
        out = np.zeros_like(x)
        m = np.abs(x) < 1
        out[m] = np.exp(1.0 - 1.0 / (1.0 - x[m] ** 2))
        return out

    return RadialData(prof, lo, hi, half, f"bump({lo},{hi})")


def combine(a: RadialData, b: RadialData, ca: float, cb: float) -> RadialData:
    lo, hi = min(a.lo, b.lo), max(a.hi, b.hi)
    prof = lambda r: ca * a(r) + cb * b(r)  # noqa: E731
    return RadialData(prof, lo, hi, min(a.feature, b.feature), f"{ca:+.4g}*{a.label}{cb:+.4g}*{b.label}")


def data_quadrature(data: RadialData, interfaces=(), panel: float = 0.1, order: int = 12):
    """Gauss-Legendre nodes/weights (including the r measure) over supp f."""
    cuts = {data.lo, data.hi, *[R for R in interfaces if data.lo < R < data.hi]}
    cuts = sorted(cuts)
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        n = max(1, int(math.ceil((b - a) / panel)))
        edges = np.linspace(a, b, n + 1)
        for e0, e1 in zip(edges[:-1], edges[1:]):
            m, hw = 0.5 * (e0 + e1), 0.5 * (e1 - e0)
            nodes.append(m + hw * x)
            weights.append(hw * w)
    r = np.concatenate(nodes)
    return r, np.concatenate(weights) * r


def pair(data: RadialData, g: Callable, interfaces=()) -> float:
    """<f, g> = int f conj(g) r dr by panel Gauss-Legendre over supp f."""
    r, w = data_quadrature(data, interfaces)
    return float(np.sum(w * data(r) * np.conj(g(r))).real)


def norm(data: RadialData, interfaces=()) -> float:
    return math.sqrt(pair(data, data, interfaces))


def project_out(data: RadialData, state: ResonantState, window: RadialData, interfaces=()) -> RadialData:
    """f - (<f,U>/<w,U>) w, rescaled to the norm of f, so that <., U> = 0."""
    fu = pair(data, state.profile, interfaces)
    wu = pair(window, state.profile, interfaces)
    out = combine(data, window, 1.0, -fu / wu)
    return out.scaled(norm(data, interfaces) / norm(out, interfaces))


# ---------------------------------------------------------------------------
# wave field containers
# ---------------------------------------------------------------------------


@dataclass
class WaveField:
    mode: int
    times: np.ndarray
    observers: np.ndarray
    values: np.ndarray          # shape (n_times, n_observers)
    method: str
    model: RadialModel
    data: RadialData
    h: float | None = None
    L: float | None = None
    cfl: float | None = None
    r_grid: np.ndarray | None = None
    energy: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.cfl is not None and self.cfl > MAX_CFL:
            raise StabilityError(f"cfl {self.cfl} exceeds {MAX_CFL}")

    def series(self, observer_index: int = 0):
        return self.times, self.values[:, observer_index]


# ---------------------------------------------------------------------------
# finite differences in time
# ---------------------------------------------------------------------------


@njit(cache=True)
def _tri(d, o, v, out):
    n = v.size
    for i in range(n):
        s = d[i] * v[i]
        if i > 0:
            s += o[i - 1] * v[i - 1]
        if i < n - 1:
            s += o[i] * v[i + 1]
        out[i] = s


@njit(cache=True)
def _march(d, o, v_prev, v_cur, dt, nsteps, stride, obs_idx, obs_wts, rec, erec):
    """Modified-equation leapfrog: v+ = 2v - v- - dt^2 S v + dt^4/12 S^2 v."""
    n = v_cur.size
    sv = np.empty(n)
    ssv = np.empty(n)
    c2, c4 = dt * dt, dt ** 4 / 12.0
    k = 0
    for step in range(nsteps + 1):
        if step % stride == 0:
            for j in range(obs_idx.shape[0]):
                acc = 0.0
                for q in range(obs_idx.shape[1]):
                    acc += obs_wts[j, q] * v_cur[obs_idx[j, q]]
                rec[k, j] = acc
            if erec.size > 0:
                # E = |v - v-|^2/(2 dt^2) + <v, S~ v->/2, S~ = S - dt^2 S^2/12
                _tri(d, o, v_prev, sv)
                _tri(d, o, sv, ssv)
                kin, pot = 0.0, 0.0
                for i in range(n):
                    dv = v_cur[i] - v_prev[i]
                    kin += dv * dv
                    pot += v_cur[i] * (sv[i] - c2 / 12.0 * ssv[i])
                erec[k] = 0.5 * kin / c2 + 0.5 * pot
            k += 1
        if step == nsteps:
            break
        _tri(d, o, v_cur, sv)
        _tri(d, o, sv, ssv)
        for i in range(n):
            nxt = 2.0 * v_cur[i] - v_prev[i] - c2 * sv[i] + c4 * ssv[i]
            v_prev[i] = v_cur[i]
            v_cur[i] = nxt


def _observer_stencil(r, observers):
    """Cubic Lagrange weights from the four nearest nodes."""
    idx = np.empty((len(observers), 4), dtype=np.int64)
    wts = np.empty((len(observers), 4))
    h = r[1] - r[0]
    for j, x in enumerate(observers):
        i0 = int(np.clip(np.floor((x - r[0]) / h) - 1, 0, r.size - 4))
        pts = r[i0:i0 + 4]
        idx[j] = np.arange(i0, i0 + 4)
        for q in range(4):
            others = [pts[p] for p in range(4) if p != q]
            wts[j, q] = np.prod([(x - o) / (pts[q] - o) for o in others])
    return idx, wts


def evolve_fd(model: RadialModel, mode: int, data: RadialData, T: float, observers,
              *, h: float = 0.02, cfl: float = 0.9, L: float | None = None,
              record_dt: float | None = None, calibrate: bool = False,
              track_energy: bool = False, causal: bool = True) -> WaveField:
    """Time-domain solution with a causally invisible Dirichlet wall at L.

    ``calibrate=True`` replaces the threshold parameter of a p-resonant
    model by its discrete counterpart (see :func:`discrete.calibrate_threshold`).
    """
    if cfl > MAX_CFL:
        raise StabilityError(f"cfl {cfl} exceeds {MAX_CFL}")
    observers = np.atleast_1d(np.asarray(observers, dtype=float))
    need = data.hi + observers.max() + T + 2.0
    if L is None:
        L = need
    elif causal and L < need:
        raise GridError(f"L = {L} below the causality bound {need}")
    r0 = model.rho if isinstance(model, RobinDisc) else 0.0
    L = r0 + h * math.ceil((L - r0) / h)
    run_model = calibrate_threshold(model, mode, h) if calibrate else model
    grid = build_grid(run_model, mode, h, L)
    record_dt = record_dt or max(h, T / 2000)
    stride = max(1, int(math.ceil(record_dt / (cfl * h))))
    nrec = int(math.ceil(T / (stride * cfl * h)))
    nsteps = nrec * stride
    dt = T / nsteps
    if dt * math.sqrt(abs(grid.diag).max() + 2 * abs(grid.off).max()) > math.sqrt(12.0):
        raise StabilityError("time step outside the stability region")
    s = np.sqrt(grid.w)
    f = data(grid.r)
    # u(dt) from the Taylor series of sin(t sqrt(A))/sqrt(A)
    Sf = _apply_sym(grid, s * f)
    SSf = _apply_sym(grid, Sf)
    v1 = dt * (s * f) - dt**3 / 6 * Sf + dt**5 / 120 * SSf
    idx, wts = _observer_stencil(grid.r, observers)
    rec = np.zeros((nrec + 1, observers.size))
    erec = np.zeros(nrec + 1) if track_energy else np.zeros(0)
    # u is odd in t, so (u(-dt), u(0)) = (-v1, 0) starts the recurrence exactly
    v_prev, v_cur = -v1, np.zeros_like(v1)
    _march(grid.diag, grid.off, v_prev, v_cur, dt, nsteps, stride, idx, wts / s[idx], rec, erec)
    times = np.arange(nrec + 1) * stride * dt
    values = rec
    fld = WaveField(mode, times, observers, values, "fd", run_model, data, h=h, L=L,
                    cfl=dt / h, r_grid=grid.r,
                    energy=erec if track_energy else None,
                    meta={"dt": dt, "stride": stride, "nodes": grid.size,
                          "model_parameter_used": run_model})
    return fld


def _apply_sym(grid, v):
    out = grid.diag * v
    out[:-1] += grid.off * v[1:]
    out[1:] += grid.off * v[:-1]
    return out


def evolve_eigen(model: RadialModel, mode: int, data: RadialData, times, observers,
                 *, h: float = 0.05, L: float = 40.0) -> WaveField:
    """sum_j s_j(t) <f, e_j> e_j(r) for the discrete operator, s_j = sin(t sqrt(mu))/sqrt(mu).

    Negative mu give sinh; mu = 0 gives t.
    """
    grid = build_grid(model, mode, h, L)
    mu, vec = grid.eigh()
    f = data(grid.r)
    coef = vec.T @ (grid.w * f)
    times = np.asarray(times, dtype=float)
    observers = np.atleast_1d(np.asarray(observers, dtype=float))
    idx, wts = _observer_stencil(grid.r, observers)
    at_obs = np.stack([wts[j] @ vec[idx[j]] for j in range(observers.size)])
    sq = np.sqrt(np.abs(mu))
    tt = times[:, None]
    with np.errstate(all="ignore"):
        s = np.where(mu > 0, np.sin(tt * sq) / sq, np.where(mu < 0, np.sinh(tt * sq) / sq, tt))
    values = (s * coef) @ at_obs.T
    return WaveField(mode, times, observers, values, "eigen", model, data, h=h, L=L,
                     r_grid=grid.r, meta={"n_negative": int(np.sum(mu < 0))})


# ---------------------------------------------------------------------------
# spectral (Stone's formula)
# ---------------------------------------------------------------------------


def _panels(lam_tail, lam_split, lam_max, width, t_max, base=12):
    """Gauss-Legendre nodes: geometric panels to lam_split, then uniform."""
    edges = [lam_tail]
    while edges[-1] * 2 < lam_split:
        edges.append(edges[-1] * 2)
    edges.append(lam_split)
    n_uni = max(1, int(math.ceil((lam_max - lam_split) / width)))
    edges.extend(np.linspace(lam_split, lam_max, n_uni + 1)[1:])
    nodes, wts = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        n = base + int(math.ceil(0.6 * t_max * (b - a)))
        x, w = np.polynomial.legendre.leggauss(n)
        nodes.append(0.5 * (a + b) + 0.5 * (b - a) * x)
        wts.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(wts)


def spectral_density(model, mode, data, lam, observers, chunk=1024):
    """(4/pi^2) u_reg(lam, r_obs) <f, u_reg(lam)> / |D|^2, shape (n_lam, n_obs)."""
    rq, wq = data_quadrature(data, model.interfaces)
    fq = data(rq) * wq
    out = np.empty((lam.size, len(observers)))
    r_all = np.concatenate([rq, observers])
    for i in range(0, lam.size, chunk):
        u, D2 = real_axis_solutions(model, mode, lam[i:i + chunk], r_all)
        F = u[:, :rq.size] @ fq
        out[i:i + chunk] = (4 / np.pi**2) * u[:, rq.size:] * (F / D2)[:, None]
    return out


def _sinc_m1(x):
    """sin(x)/x - 1 without cancellation."""
    if abs(x) < 1e-2:
        x2 = x * x
        return -x2 / 6 * (1 - x2 / 20 * (1 - x2 / 42))
    return math.sin(x) / x - 1.0


def _tail_contribution(model, mode, data, observers, times, lam_tail):
    """int_0^lam_tail sin(t lam) rho(lam) d lam from the threshold expansion."""
    if abs(mode) != 1 or isinstance(model, Free):
        return np.zeros((len(times), len(observers)))
    te = threshold_expansion(model, mode, lam_tail)
    rho = spectral_density(model, mode, data, np.array([lam_tail]), observers)[0]
    lamd = te.lam_d(lam_tail)
    K = rho * abs(lamd) ** 2 / lam_tail**2
    Lt = math.log(lam_tail)
    c1, c0, d0 = te.c1, te.c0, te.d0
    out = np.zeros((len(times), len(observers)))
    for i, t in enumerate(times):
        if t == 0:
            continue
        if d0 == 0:
            z = -c0 / c1
            x, y = z.real, abs(z.imag)
            closed = t / (abs(c1) ** 2 * y) * (math.atan((Lt - x) / y) + 0.5 * math.pi)
            g = lambda L: t * _sinc_m1(t * math.exp(L)) / abs(c1 * L + c0) ** 2  # noqa: E731
            val = closed + integrate.quad(g, Lt - 40.0, Lt, limit=200, epsabs=0, epsrel=1e-11)[0]
        else:
            g = lambda L: (math.sin(t * math.exp(L)) * math.exp(3 * L)  # noqa: E731
                           / abs(d0 + math.exp(2 * L) * (c1 * L + c0)) ** 2)
            val = integrate.quad(g, Lt - 60.0, Lt, limit=200, epsabs=0, epsrel=1e-11)[0]
        out[i] = K * val
    return out


def evolve_spectral(model: RadialModel, mode: int, data: RadialData, times, observers,
                    *, lam_max: float | None = None, lam_tail: float = 1e-4,
                    lam_split: float = 0.05, width: float = 0.02) -> WaveField:
    """Bound-state sum plus the Stone's-formula integral over lam > 0."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    observers = np.atleast_1d(np.asarray(observers, dtype=float))
    if isinstance(model, RobinDisc) and np.any(observers < model.rho):
        raise GridError("observer inside the obstacle")
    if lam_max is None:
        lam_max = 8 * np.pi / data.feature
    t_max = float(times.max()) if times.size else 0.0
    lam, w = _panels(lam_tail, lam_split, lam_max, width, t_max)
    rho = spectral_density(model, mode, data, lam, observers)
    values = np.sin(np.outer(times, lam)) @ (w[:, None] * rho)
    tail = _tail_contribution(model, mode, data, observers, times, lam_tail)
    values = values + tail
    bound = find_bound_states(model, mode) if not isinstance(model, Free) else []
    for st in bound:
        amp = pair(data, st.profile, model.interfaces)
        values = values + np.outer(np.sinh(st.kappa * times) / st.kappa, amp * st.profile(observers))
    # envelope of the oscillating integrand near lam_max relative to its peak;
    # data truncated at a finite support leave a small plateau, so one node is not enough
    top = lam >= lam_max - 0.05 * (lam_max - lam_split)
    cut = float(np.abs(rho[top]).max() / max(np.abs(rho).max(), 1e-300))
    if cut > SPECTRAL_CUT:
        raise QuadratureError(f"spectral density not resolved at lam_max = {lam_max}", cut)
    return WaveField(mode, times, observers, values, "spectral", model, data,
                     meta={"n_lambda": lam.size, "lam_max": lam_max, "lam_tail": lam_tail,
                           "tail_max": float(np.abs(tail).max()) if tail.size else 0.0,
                           "bound_energies": [b.energy for b in bound]})


# ---------------------------------------------------------------------------
# splitting and decay laws
# ---------------------------------------------------------------------------


@dataclass
class DecaySplit:
    times: np.ndarray
    u: np.ndarray
    u_d: np.ndarray
    u_z: np.ndarray
    u_r: np.ndarray
    u_d_amp: list
    u_z_amp: complex
    fit_alpha: float | None
    kappa: complex | None = None


def jm_table(b, t_min=2.0, t_max=1e4, n=48):
    """Spline of J(t) log(t)/t on a log grid, for cheap evaluation at many times."""
    ts = np.geomspace(max(t_min, 2.0), t_max, n)
    vals = np.array([jm_profile(t, b) * math.log(t) / t for t in ts])
    spl = CubicSpline(np.log(ts), vals)

    def J(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        m = t >= ts[0]
        out[m] = spl(np.log(t[m])) * t[m] / np.log(t[m])
        return out

    return J


def decompose(field: WaveField, model: RadialModel, fit=None, bound=None, state: ResonantState | None = None,
              observer_index: int = 0, jm: Callable | None = None, zero_mode: Callable | None = None,
              significance: float = 1e-3) -> DecaySplit:
    """u = u_d + u_z + u_r at one observer.

    u_d is the closed-form bound-state growth, u_z = kappa <f, U> J(t) U(r)
    for a detected p-resonance (U normalized to 1/r at infinity) plus
    t (Pi_0 f)(r) when the fit carries a zero-eigenvalue term, and u_r is
    what remains.  ``zero_mode`` is the (unnormalized) zero-energy
    eigenfunction needed for Pi_0.
    """
    t, u = field.series(observer_index)
    r_obs = field.observers[observer_index]
    bound = bound if bound is not None else (find_bound_states(model, field.mode)
                                             if not isinstance(model, Free) else [])
    u_d = np.zeros_like(u)
    amps = []
    for st in bound:
        amp = pair(field.data, st.profile, model.interfaces)
        amps.append(amp)
        u_d += np.sinh(st.kappa * t) / st.kappa * amp * float(st.profile(np.array([r_obs]))[0])
    u_z = np.zeros_like(u)
    zamp, kappa, alpha = 0.0, None, None
    M = getattr(fit, "M", 0) if fit is not None else 0
    if M:
        if state is None:
            raise IncompleteSplitError("p-resonance detected but no resonant state / J profile supplied")
        b = fit.resonance_b
        U = lambda r: state.profile(r) / state.outer_coeff  # noqa: E731
        kappa = resonance_normalization(model, field.mode)
        zamp = kappa.real * pair(field.data, U, model.interfaces)
        J = jm if jm is not None else jm_table(b, t_max=max(10.0, float(t.max()) * 1.1))
        u_z = zamp * J(t) * float(U(np.array([r_obs]))[0])
        alpha = zamp * float(U(np.array([r_obs]))[0])
    if fit is not None and getattr(fit, "contributions", {}).get("zero_eigen", 0.0) > significance:
        if zero_mode is None:
            raise IncompleteSplitError("zero-eigenvalue term detected but no zero mode supplied")
        u_z = u_z + t * _pi0(field.data, zero_mode, model.interfaces, r_obs)
    return DecaySplit(t, u, u_d, u_z, u - u_d - u_z, amps, zamp, alpha, kappa)


def _pi0(data, phi, interfaces, r_obs):
    """(Pi_0 f)(r_obs) = <f, phi> phi(r_obs) / |phi|^2."""
    lo = 0.0
    edges = [lo, *sorted(interfaces), np.inf]
    n2 = sum(integrate.quad(lambda r: phi(np.array([r]))[0] ** 2 * r, a, b, limit=200)[0]
             for a, b in zip(edges[:-1], edges[1:]) if b > a)
    return pair(data, phi, interfaces) * float(phi(np.array([r_obs]))[0]) / n2


def delta_ring_zero_mode(R: float, mode: int = 2):
    """DeltaRing carrying an L^2 zero-energy eigenfunction in the given mode (|m| >= 2).

    The profile r^n inside and R^{2n} r^{-n} outside satisfies the jump
    condition when a = -2n/R.
    """
    n = abs(int(mode))
    if n < 2:
        raise ValueError("a square-integrable zero mode needs |m| >= 2")
    model = DeltaRing(-2.0 * n / R, R)

    def phi(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < R, r**n, R ** (2 * n) / np.maximum(r, 1e-300) ** n)

    return model, phi


def zero_mode_calibration(R: float = 1.0, mode: int = 2, data: RadialData | None = None,
                          r_obs: float = 2.0, T: float = 200.0, h: float = 0.02) -> dict:
    """Ratio of the measured growth rate to the one predicted from the lam^-2 coefficient.

    The low-frequency fit (with the data as its own window) gives
    c_{-2} = -<f, phi>^2/|phi|^2, so (Pi_0 f)(r_obs) = -c_{-2} phi(r_obs)/<f, phi>.
    The slope of the time-domain solution over [T/2, T] divided by that
    value is the calibration factor of the zero-eigenvalue term.
    """
    from .lowfreq import default_lambdas, fit_expansion, sample_lowfreq

    model, phi = delta_ring_zero_mode(R, mode)
    data = data if data is not None else gaussian_bump(2.5 * R, 0.5 * R)
    lams = default_lambdas()
    fit = fit_expansion(list(zip(lams, sample_lowfreq(model, mode, data, lams))))
    pf = pair(data, phi, model.interfaces)
    predicted = -fit.zero_eigen_amp.real * float(phi(np.array([r_obs]))[0]) / pf
    fld = evolve_fd(model, mode, data, T, [r_obs], h=h, calibrate=True)
    t, u = fld.series(0)
    m = t >= T / 2
    slope, _ = np.linalg.lstsq(np.stack([t[m], np.ones(m.sum())], 1), u[m], rcond=None)[0]
    return {"factor": float(slope / predicted), "slope": float(slope), "predicted": float(predicted),
            "closed_form": float(_pi0(data, phi, model.interfaces, r_obs)),
            "zero_eigen_amp": fit.zero_eigen_amp, "M": fit.M}


@dataclass
class DecayFit:
    law: str
    alpha: float | None
    residual: float
    window_values: list
    windows: list
    passed: bool


def dyadic_windows(t0, t1):
    edges = [t0]
    while edges[-1] * 2 <= t1 * (1 + 1e-12):
        edges.append(edges[-1] * 2)
    return list(zip(edges[:-1], edges[1:]))


def fit_decay(times, series, law: str = "t_over_log", M: int = 1, window=None,
              min_decades: float = 1.5) -> DecayFit:
    """Fit alpha t/log t, or test that sup |u| log(t)^M falls across dyadic windows.

    The series must span ``min_decades`` decades; ``window`` (default: the
    whole series) selects where the law is assessed.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(series, dtype=float)
    pos = t > 1.0
    t, y = t[pos], y[pos]
    if t.size < 8 or math.log10(t.max() / t.min()) < min_decades - 1e-9:
        raise InsufficientDataError("series must cover at least %.1f decades in t" % min_decades)
    t0, t1 = window if window is not None else (t.min(), t.max())
    wins = dyadic_windows(t0, t1)
    if not wins:
        raise InsufficientDataError("window shorter than one dyadic interval")
    if law == "t_over_log":
        sel = (t >= t0) & (t <= t1)
        g = t[sel] / np.log(t[sel])
        alpha = float(g @ y[sel] / (g @ g))
        res = float(np.linalg.norm(y[sel] - alpha * g) / max(np.linalg.norm(y[sel]), 1e-300))
        per = []
        for a, b in wins:
            m = (t >= a) & (t <= b)
            gm = t[m] / np.log(t[m])
            per.append(float(gm @ y[m] / (gm @ gm)))
        spread = (max(per) - min(per)) / abs(np.mean(per)) if np.mean(per) != 0 else np.inf
        return DecayFit(law, alpha, res, per, wins, bool(spread <= 0.10))
    if law == "log_power":
        sups = []
        for a, b in wins:
            m = (t >= a) & (t <= b)
            sups.append(float(np.max(np.abs(y[m]) * np.log(t[m]) ** M)))
        ok = all(s1 < s0 for s0, s1 in zip(sups[:-1], sups[1:]))
        return DecayFit(f"log_power({M})", None, 0.0, sups, wins, ok)
    raise ValueError(f"unknown law {law!r}")

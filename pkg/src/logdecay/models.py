"""Radial operator families with zero-energy p-resonances.

Four radially symmetric models are supported:

``RoundWell(a, R)``
    -Delta - a^2 1_{r<R}
``DeltaRing(a, R)``
    -Delta + a delta(r - R)
``RobinDisc(rho, sigma)``
    -Delta outside the disc r < rho, with f'(rho) + sigma f(rho) = 0 per mode
``Free()``
    -Delta on the plane

plus a static, non-radial construction (``vws_construct``) of a smooth
potential V for which -c^2 Delta + V annihilates a prescribed p-resonant
state on a Cartesian grid.

Robin orientation: the boundary relation is stored in the residual form
``f'(rho) + sigma f(rho) = 0``, which reproduces sigma = 1/rho for f = 1/r.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy import integrate

from .errors import ConstructionError
from .specfun import bessel_j, bessel_jp, bessel_zero

# ---------------------------------------------------------------------------
# operator families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RoundWell:
    a: float
    R: float
    variant = "round-well"

    def __post_init__(self):
        if not self.R > 0:
            raise ConstructionError("well radius R must be positive")
        if not self.a > 0:
            raise ConstructionError("well amplitude a must be positive")

    @property
    def interfaces(self):
        return (self.R,)

    @property
    def inner_radius(self):
        return 0.0

    @property
    def support_radius(self):
        return self.R

    def potential(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < self.R, -self.a**2, 0.0)


@dataclass(frozen=True)
class DeltaRing:
    a: float
    R: float
    variant = "delta-ring"

    def __post_init__(self):
        if not self.R > 0:
            raise ConstructionError("ring radius R must be positive")

    @property
    def interfaces(self):
        return (self.R,)

    @property
    def inner_radius(self):
        return 0.0

    @property
    def support_radius(self):
        return self.R


@dataclass(frozen=True)
class RobinDisc:
    rho: float
    sigma: float
    variant = "robin-disc"

    def __post_init__(self):
        if not self.rho > 0:
            raise ConstructionError("obstacle radius rho must be positive")

    @property
    def interfaces(self):
        return (self.rho,)

    @property
    def inner_radius(self):
        return self.rho

    @property
    def support_radius(self):
        return self.rho


@dataclass(frozen=True)
class Free:
    variant = "free"

    @property
    def interfaces(self):
        return ()

    @property
    def inner_radius(self):
        return 0.0

    @property
    def support_radius(self):
        return 0.0


RadialModel = Union[RoundWell, DeltaRing, RobinDisc, Free]

_VARIANTS = {"round-well": RoundWell, "delta-ring": DeltaRing, "robin-disc": RobinDisc, "free": Free}
_FIELDS = {"round-well": ("a", "R"), "delta-ring": ("a", "R"), "robin-disc": ("rho", "sigma"), "free": ()}


def model_to_config(model: RadialModel) -> str:
    """Serialize a model to ``key = value`` lines (floats via repr, exact)."""
    lines = [f"variant = {model.variant}"]
    for key in _FIELDS[model.variant]:
        lines.append(f"{key} = {getattr(model, key)!r}")
    return "\n".join(lines) + "\n"


def model_from_config(text_or_mapping) -> RadialModel:
    """Inverse of :func:`model_to_config`; also accepts a dict of strings."""
    if isinstance(text_or_mapping, str):
        kv = {}
        for lineno, raw in enumerate(text_or_mapping.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConstructionError(f"line {lineno}: expected 'key = value'")
            k, v = (s.strip() for s in line.split("=", 1))
            kv[k] = v
    else:
        kv = {k: str(v) for k, v in text_or_mapping.items()}
    variant = kv.pop("variant", None)
    if variant not in _VARIANTS:
        raise ConstructionError(f"unknown variant {variant!r}")
    allowed = _FIELDS[variant]
    extra = set(kv) - set(allowed)
    if extra:
        raise ConstructionError(f"unknown keys for {variant}: {sorted(extra)}")
    missing = set(allowed) - set(kv)
    if missing:
        raise ConstructionError(f"missing keys for {variant}: {sorted(missing)}")
    return _VARIANTS[variant](**{k: float(kv[k]) for k in allowed})


# ---------------------------------------------------------------------------
# p-resonant states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResonantState:
    """A zero-energy state f(r) e^{i m theta} decaying like r^{-decay}.

    ``inner_coeff`` and ``outer_coeff`` are the coefficients of the interior
    and exterior closed forms (C and B for the well, A and B for the ring).
    """

    mode: int
    inner_coeff: float
    outer_coeff: float
    decay: int
    interface: float
    _profile: Callable = field(repr=False, compare=False)
    _derivative: Callable = field(repr=False, compare=False)

    def profile(self, r):
        return self._profile(np.asarray(r, dtype=float))

    def derivative(self, r):
        return self._derivative(np.asarray(r, dtype=float))


def round_well_presonance(R: float, n: int = 1):
    """Well depth a = j_{0,n}/R and its state C J_1(a r) | 1/r, C = 1/(R J_1(aR))."""
    if not R > 0 or n < 1:
        raise ConstructionError("need R > 0 and n >= 1")
    a = bessel_zero(0, n) / R
    model = RoundWell(a=a, R=R)
    C = float(1.0 / (R * bessel_j(1, a * R)))

    def prof(r):
        inside = C * bessel_j(1, a * np.minimum(r, R))
        return np.where(r < R, inside, 1.0 / np.maximum(r, R))

    def dprof(r):
        inside = C * a * bessel_jp(1, a * np.minimum(r, R))
        return np.where(r < R, inside, -1.0 / np.maximum(r, R) ** 2)

    state = ResonantState(1, C, 1.0, 1, R, prof, dprof)
    return model, state


def delta_ring_presonance(R: float):
    """Coupling a = -2/R with state r | R^2/r."""
    if not R > 0:
        raise ConstructionError("need R > 0")
    model = DeltaRing(a=-2.0 / R, R=R)
    B = R * R

    def prof(r):
        return np.where(r < R, r, B / np.maximum(r, R))

    def dprof(r):
        return np.where(r < R, 1.0, -B / np.maximum(r, R) ** 2)

    return model, ResonantState(1, 1.0, B, 1, R, prof, dprof)


def robin_disc_presonance(rho: float):
    """sigma = 1/rho; two states cos(theta)/r (m=+1) and sin(theta)/r (m=-1)."""
    if not rho > 0:
        raise ConstructionError("need rho > 0")
    model = RobinDisc(rho=rho, sigma=1.0 / rho)

    def prof(r):
        return 1.0 / r

    def dprof(r):
        return -1.0 / r**2

    states = [ResonantState(m, 0.0, 1.0, 1, rho, prof, dprof) for m in (1, -1)]
    return model, states


def matching_residuals(model: RadialModel, state: ResonantState) -> dict:
    """Interface residuals of a resonant state, in closed form.

    Keys: ``continuity`` (f(R-) - f(R+)), and one of ``derivative``
    (f'(R-) - f'(R+), well), ``jump`` (f'(R+) - f'(R-) - a f(R), ring),
    ``robin`` (f'(rho) + sigma f(rho)).
    """
    if isinstance(model, RoundWell):
        R, a, C = model.R, model.a, state.inner_coeff
        fin, fout = C * bessel_j(1, a * R), state.outer_coeff / R
        din, dout = C * a * bessel_jp(1, a * R), -state.outer_coeff / R**2
        return {"continuity": float(fin - fout), "derivative": float(din - dout),
                "existence": float(bessel_j(0, a * R))}
    if isinstance(model, DeltaRing):
        R, a = model.R, model.a
        A, B = state.inner_coeff, state.outer_coeff
        fin, fout = A * R, B / R
        din, dout = A, -B / R**2
        return {"continuity": fin - fout, "jump": dout - din - a * fin}
    if isinstance(model, RobinDisc):
        rho = model.rho
        return {"robin": float(state.derivative(rho) + model.sigma * state.profile(rho))}
    raise ConstructionError("the free model has no resonant state")


def lq_tail_integral(state: ResonantState, q: float, cutoff: float, start: float = 1.0) -> float:
    """integral_start^cutoff |f(r)|^q r dr, split at the interface radius."""
    pts = sorted({start, cutoff, *[x for x in (state.interface,) if start < x < cutoff]})
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        # log-variable substitution keeps long tails well conditioned
        val, _ = integrate.quad(
            lambda s: abs(float(state.profile(np.exp(s)))) ** q * np.exp(2.0 * s),
            np.log(lo), np.log(hi), limit=200, epsabs=0.0, epsrel=1e-12,
        )
        total += val
    return total


# ---------------------------------------------------------------------------
# variable wave speed construction on a Cartesian grid
# ---------------------------------------------------------------------------


def smooth_step(s):
    """C-infinity step: 1 for s <= 0, 0 for s >= 1."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(s < 1.0, np.exp(-1.0 / np.where(s < 1.0, 1.0 - s, 1.0)), 0.0)
        b = np.where(s > 0.0, np.exp(-1.0 / np.where(s > 0.0, s, 1.0)), 0.0)
    return a / (a + b)


def product_cutoff(x1, x2, inner: float = 1.0, outer: float = 2.0):
    """chi = psi(|x1|) psi(|x2|); depends on x2 alone in the strip |x1| < inner."""
    psi = lambda s: smooth_step((np.abs(s) - inner) / (outer - inner))  # noqa: E731
    return psi(x1) * psi(x2)


@dataclass
class VwsGrid:
    x: np.ndarray          # 1D node coordinates, shared by both axes
    h: float
    c: np.ndarray
    chi: np.ndarray
    a0: float
    u_p: np.ndarray
    V: np.ndarray

    def residual(self) -> np.ndarray:
        """(-c^2 Delta_h + V) u_p on interior nodes (5-point Laplacian)."""
        u = self.u_p
        lap = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2] - 4.0 * u[1:-1, 1:-1]) / self.h**2
        return -self.c[1:-1, 1:-1] ** 2 * lap + self.V[1:-1, 1:-1] * u[1:-1, 1:-1]


def _d1(f, h, axis):
    # fourth-order central first derivative, zero padding (chi is compactly supported)
    p = np.pad(f, [(2, 2) if ax == axis else (0, 0) for ax in range(2)])
    s = lambda k: np.take(p, np.arange(2 + k, 2 + k + f.shape[axis]), axis=axis)  # noqa: E731
    return (-s(2) + 8 * s(1) - 8 * s(-1) + s(-2)) / (12 * h)


def _d2(f, h, axis):
    p = np.pad(f, [(2, 2) if ax == axis else (0, 0) for ax in range(2)])
    s = lambda k: np.take(p, np.arange(2 + k, 2 + k + f.shape[axis]), axis=axis)  # noqa: E731
    return (-s(2) + 16 * s(1) - 30 * s(0) + 16 * s(-1) - s(-2)) / (12 * h**2)


def vws_construct(c, chi, a0: float, h: float, guard: float = 1e-8) -> VwsGrid:
    """Build u_p = (1-chi) x1/|x|^2 + chi a0 x1 and V = c^2 Delta u_p / u_p.

    ``c`` and ``chi`` are (n, n) samples on the square grid with spacing ``h``
    centred at the origin (n odd, so x1 = 0 is a grid line; index order
    [x1, x2]). Derivatives of chi come from fourth-order differences, so the
    only O(h^2) error left in the discrete residual is the 5-point Laplacian.
    On the zero line of u_p the quotient is replaced by its limit.
    """
    chi = np.asarray(chi, dtype=float)
    c = np.broadcast_to(np.asarray(c, dtype=float), chi.shape)
    n = chi.shape[0]
    if chi.ndim != 2 or chi.shape[1] != n or n % 2 == 0:
        raise ConstructionError("chi must be an (n, n) array with n odd")
    if not a0 > 0:
        raise ConstructionError("a0 must be positive")
    if np.any(c <= 0):
        raise ConstructionError("wave speed must be positive")
    if np.any(chi < -1e-12) or np.any(chi > 1 + 1e-12):
        raise ConstructionError("cutoff must satisfy 0 <= chi <= 1")
    border = np.concatenate([chi[:2].ravel(), chi[-2:].ravel(), chi[:, :2].ravel(), chi[:, -2:].ravel()])
    if np.any(border != 0):
        raise ConstructionError("cutoff must vanish near the grid boundary")
    mid = n // 2
    if not np.all(chi[mid - 1:mid + 2, mid - 1:mid + 2] == 1.0):
        raise ConstructionError("cutoff must equal 1 near the origin")

    x = (np.arange(n) - mid) * h
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    r2 = X1**2 + X2**2
    safe_r2 = np.where(r2 > 0, r2, 1.0)

    c1, c2 = _d1(chi, h, 0), _d1(chi, h, 1)
    c11, c22 = _d2(chi, h, 0), _d2(chi, h, 1)
    lap_chi = c11 + c22

    scale = max(np.abs(c1).max(), np.abs(c2).max(), 1.0)
    if np.abs(c1[mid]).max() > 1e-8 * scale:
        raise ConstructionError("d chi / d x1 must vanish on the line x1 = 0")

    outer = np.where(r2 > 0, X1 / safe_r2, 0.0)
    u_p = (1.0 - chi) * outer + chi * a0 * X1
    lap_u = (lap_chi * (a0 * X1 - outer)
             + 2.0 * c1 * (a0 - (X2**2 - X1**2) / safe_r2**2)
             + 2.0 * c2 * (2.0 * X1 * X2 / safe_r2**2))
    lap_u = np.where(r2 > 0, lap_u, 0.0)

    slope = np.abs((1.0 - chi) / safe_r2 + chi * a0)
    small = np.abs(u_p) < guard * h * slope
    with np.errstate(divide="ignore", invalid="ignore"):
        V = np.where(small, 0.0, c**2 * lap_u / np.where(small, 1.0, u_p))
    # limit on x1 = 0: numerator and denominator both vanish to first order
    x2 = X2[small]
    ok = x2 != 0
    num = np.zeros_like(x2)
    den = np.ones_like(x2)
    num[ok] = ((lap_chi[small][ok] + 2.0 * c11[small][ok]) * (a0 - 1.0 / x2[ok] ** 2)
               + 4.0 * c2[small][ok] / x2[ok] ** 3)
    den[ok] = (1.0 - chi[small][ok]) / x2[ok] ** 2 + chi[small][ok] * a0
    V[small] = c[small] ** 2 * num / den
    return VwsGrid(x=x, h=h, c=np.array(c), chi=chi, a0=a0, u_p=u_p, V=V)

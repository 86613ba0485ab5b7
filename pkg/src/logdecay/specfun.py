"""Cylinder functions on the slit plane arg z in (-pi/2, 3pi/2).

Everything here is a thin layer over :mod:`scipy.special` that

* enforces the branch convention used throughout the package (the cut runs
  along the negative imaginary axis, so ``arg z`` lives in ``(-pi/2, 3pi/2)``),
* analytically continues the second-kind functions from the principal sheet
  into the third quadrant ``arg z in (pi, 3pi/2)``,
* locates positive zeros of J_0 and J_1.

All functions accept scalars or numpy arrays and are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy import special as sp
from scipy.optimize import brentq

from .errors import BranchDomainError, DomainError, SingularityError

__all__ = [
    "BranchedComplex",
    "BesselZeroIndex",
    "branch_arg",
    "branch_log",
    "bessel_j",
    "bessel_jp",
    "bessel_y",
    "hankel1",
    "hankel1p",
    "bessel_ik",
    "bessel_zero",
]

_HALF_PI = 0.5 * np.pi


def branch_arg(z):
    """Argument of ``z`` in the interval (-pi/2, 3pi/2].

    Points on the negative imaginary axis are rejected; the origin is
    returned with argument 0.
    """
    z = np.asarray(z, dtype=complex)
    bad = (z.real == 0.0) & (z.imag < 0.0)
    if np.any(bad):
        raise BranchDomainError("argument on the excluded ray arg z = -pi/2")
    a = np.angle(z)
    a = np.where(a < -_HALF_PI, a + 2.0 * np.pi, a)
    return a if a.ndim else float(a)


def branch_log(z):
    """log z with the branch cut on the negative imaginary axis."""
    z = np.asarray(z, dtype=complex)
    out = np.log(np.abs(z)) + 1j * branch_arg(z)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class BranchedComplex:
    """A complex number carried together with its (-pi/2, 3pi/2) argument."""

    value: complex

    def __post_init__(self):
        z = complex(self.value)
        if z.real == 0.0 and z.imag < 0.0:
            raise BranchDomainError(f"{z} lies on the excluded ray")
        object.__setattr__(self, "value", z)

    @classmethod
    def polar(cls, modulus: float, arg: float) -> "BranchedComplex":
        if not -_HALF_PI < arg < 1.5 * np.pi:
            raise BranchDomainError(f"arg {arg} outside (-pi/2, 3pi/2)")
        return cls(modulus * np.exp(1j * arg))

    @property
    def arg(self) -> float:
        return branch_arg(self.value)

    def log(self) -> complex:
        return branch_log(self.value)

    def __complex__(self):
        return self.value


@dataclass(frozen=True)
class BesselZeroIndex:
    order: int
    index: int

    def __post_init__(self):
        if self.order not in (0, 1):
            raise ValueError("only orders 0 and 1 are supported")
        if self.index < 1:
            raise ValueError("zero index must be >= 1")


def _as_z(z):
    if isinstance(z, BranchedComplex):
        z = z.value
    return np.asarray(z)


def _third_quadrant(z):
    # arg z in (pi, 3pi/2) on our sheet  <=>  principal arg in (-pi, -pi/2)
    return (z.real < 0.0) & (z.imag < 0.0)


def bessel_j(order: int, z):
    """J_order(z). Entire, so only the excluded ray is checked."""
    z = _as_z(z)
    if np.iscomplexobj(z):
        branch_arg(z)
        out = sp.jv(order, z.astype(complex))
    else:
        out = sp.jv(order, z.astype(float))
    return out if np.ndim(out) else out[()]


def bessel_jp(order: int, z):
    """Derivative J_order'(z)."""
    z = _as_z(z)
    if np.iscomplexobj(z):
        branch_arg(z)
        out = sp.jvp(order, z.astype(complex))
    else:
        out = sp.jvp(order, z.astype(float))
    return out if np.ndim(out) else out[()]


def bessel_y(order: int, z):
    """Y_order(z) continued to arg z in (pi, 3pi/2).

    Uses Y_n(w e^{i pi}) = (-1)^n (Y_n(w) + 2i J_n(w)) with w = -z.
    """
    z = np.asarray(_as_z(z), dtype=complex)
    branch_arg(z)
    if np.any(z == 0):
        raise SingularityError("Y_n is singular at z = 0")
    q3 = _third_quadrant(z)
    w = np.where(q3, -z, z)
    y = sp.yv(order, w)
    if np.any(q3):
        sign = -1.0 if order % 2 else 1.0
        y = np.where(q3, sign * (y + 2j * sp.jv(order, w)), y)
    return y if y.ndim else y[()]


def hankel1(order: int, z):
    """H^(1)_order(z) on the slit plane.

    In the third quadrant the principal-sheet value is replaced by
    H^(1)_n(w e^{i pi}) = -(-1)^n H^(2)_n(w), w = -z.
    """
    z = np.asarray(_as_z(z), dtype=complex)
    branch_arg(z)
    if np.any(z == 0):
        raise SingularityError("H^(1)_n is singular at z = 0")
    q3 = _third_quadrant(z)
    if not np.any(q3):
        out = sp.hankel1(order, z)
    else:
        w = np.where(q3, -z, z)
        sign = -1.0 if order % 2 else 1.0
        out = np.where(q3, -sign * sp.hankel2(order, w), sp.hankel1(order, w))
    return out if out.ndim else out[()]


def hankel1p(order: int, z):
    """d/dz H^(1)_order(z) from the recurrence H_n' = H_{n-1} - (n/z) H_n."""
    z = np.asarray(_as_z(z), dtype=complex)
    n = abs(order)
    if n == 0:
        return -hankel1(1, z)
    return hankel1(n - 1, z) - n / z * hankel1(n, z)


def bessel_ik(order: int, kind: str, x):
    """Modified Bessel I_order(x) (x >= 0) or K_order(x) (x > 0)."""
    x = np.asarray(x, dtype=float)
    if kind == "I":
        if np.any(x < 0):
            raise DomainError("I_n is evaluated for x >= 0 only")
        out = sp.iv(order, x)
    elif kind == "K":
        if np.any(x <= 0):
            raise DomainError("K_n requires x > 0")
        out = sp.kv(order, x)
    else:
        raise ValueError(f"kind must be 'I' or 'K', got {kind!r}")
    return out if out.ndim else out[()]


def bessel_zero(idx, n: int | None = None) -> float:
    """n-th positive zero of J_0 or J_1.

    Accepts a :class:`BesselZeroIndex` or ``(order, n)``.
    McMahon's leading term gives the start; a +-0.5 bracket around it holds
    exactly one zero, which brentq then resolves.  The final Newton step
    takes its residual from mpmath, since double-precision J is only
    accurate to about one ulp of the root near a zero.
    """
    if not isinstance(idx, BesselZeroIndex):
        idx = BesselZeroIndex(int(idx), int(n))
    order, k = idx.order, idx.index
    guess = (k + 0.5 * order - 0.25) * np.pi
    f = (lambda x: sp.j0(x)) if order == 0 else (lambda x: sp.j1(x))
    lo, hi = guess - 0.5, guess + 0.5
    if f(lo) * f(hi) > 0:  # pragma: no cover - bracket always holds for n >= 1
        raise RuntimeError("zero bracket failed")
    root = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    # one Newton polish step; J_0' = -J_1, J_1' = J_0 - J_1/x
    d = -sp.j1(root) if order == 0 else sp.j0(root) - sp.j1(root) / root
    with mp.workdps(30):
        return float(mp.mpf(root) - mp.besselj(order, root) / d)

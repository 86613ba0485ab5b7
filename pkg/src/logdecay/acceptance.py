"""The acceptance matrix as callable checks.

Each ``criterion_N`` returns a :class:`CheckResult`; ``run_all`` runs the
selected ones in order.  Used by ``logdecay verify-all`` and the
acceptance test module.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import contour, lowfreq, models, wave
from .specfun import bessel_j, bessel_zero

J01 = bessel_zero(0, 1)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        summary = ", ".join(f"{k}={_fmt(v)}" for k, v in self.detail.items())
        return f"[{status}] criterion {self.number} ({self.name}, {self.seconds:.1f}s): {summary}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _timed(number, name, fn):
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(number, name, bool(passed), detail, time.perf_counter() - t0)


# ---------------------------------------------------------------------------


def criterion_1() -> CheckResult:
    def run():
        worst_iface, worst_j0, worst_jump, worst_robin = 0.0, 0.0, 0.0, 0.0
        for R in (0.5, 1.0, 2.0):
            mdl, st = models.round_well_presonance(R, 1)
            res = models.matching_residuals(mdl, st)
            worst_iface = max(worst_iface, abs(res["continuity"]), abs(res["derivative"]))
            worst_j0 = max(worst_j0, abs(float(bessel_j(0, mdl.a * R))))
            mdl, st = models.delta_ring_presonance(R)
            res = models.matching_residuals(mdl, st)
            worst_jump = max(worst_jump, abs(res["continuity"]), abs(res["jump"]))
            mdl, states = models.robin_disc_presonance(R)
            worst_robin = max(worst_robin, *(abs(models.matching_residuals(mdl, s)["robin"]) for s in states))
        ok = worst_iface <= 1e-10 and worst_j0 <= 1e-12 and worst_jump == 0.0 and worst_robin <= 1e-12
        return ok, {"interface": worst_iface, "J0(aR)": worst_j0, "jump": worst_jump, "robin": worst_robin}

    return _timed(1, "resonance conditions", run)


def criterion_2() -> CheckResult:
    def run():
        ts = [math.exp(k) for k in (6, 8, 10, 12)]
        norm = [contour.jm_profile(t, -1j) * math.log(t) / t for t in ts]
        dev = [abs(x - 1.0) for x in norm]
        ok = 0.8 <= norm[2] <= 1.2 and all(b < a for a, b in zip(dev[:-1], dev[1:]))
        return ok, {"J_norm(e6..e12)": norm}

    return _timed(2, "J asymptotics", run)


def moment_matrix():
    return [contour.MomentSpec(nu, k, b) for nu in (0.0, -2.0) for k in (0, 1, -1) for b in (-1j, -2j)]


def criterion_3(t: float = 1e3, eta: float = 0.05) -> CheckResult:
    def run():
        spec = contour.ContourSpec(t, eta)
        worst, ok = 0.0, True
        for mom in moment_matrix():
            good, a, b, floor = contour.path_independent(spec, mom, rtol=1e-8)
            ok &= good
            tol = 1e-8 * max(abs(a), abs(b)) + floor
            worst = max(worst, abs(a - b) / tol)
        return ok, {"moments": len(moment_matrix()), "worst_diff_over_tol": worst}

    return _timed(3, "path independence", run)


def oracle_matrix():
    return [
        ("free m=0", models.Free(), 0, False),
        ("free m=1", models.Free(), 1, False),
        ("well on m=1", models.RoundWell(J01, 1.0), 1, True),
        ("well off m=1", models.RoundWell(0.5 * J01, 1.0), 1, False),
        ("delta m=1", models.DeltaRing(-2.0, 1.0), 1, True),
    ]


def criterion_4() -> CheckResult:
    def run():
        data = wave.gaussian_bump(2.5, 0.5)
        obs = [2.0, 5.0]
        big, small = {}, {}
        for name, mdl, m, resonant in oracle_matrix():
            fd = wave.evolve_fd(mdl, m, data, 200.0, obs, h=0.02, record_dt=0.5, calibrate=resonant)
            sp = wave.evolve_spectral(mdl, m, data, fd.times, obs)
            big[name] = float(np.abs(fd.values - sp.values).max() / np.abs(sp.values).max())
            fd = wave.evolve_fd(mdl, m, data, 50.0, obs, h=0.05, L=40.0, cfl=0.3, record_dt=0.5, causal=False)
            ei = wave.evolve_eigen(mdl, m, data, fd.times, obs, h=0.05, L=40.0)
            small[name] = float(np.abs(fd.values - ei.values).max() / np.abs(ei.values).max())
        ok = max(big.values()) <= 1e-3 and max(small.values()) <= 1e-4
        return ok, {"fd_vs_spectral": max(big.values()), "fd_vs_eigen_small": max(small.values())}

    return _timed(4, "oracle equivalence", run)


def criterion_5(T: float = 4000.0, h: float = 0.05) -> CheckResult:
    def run():
        mdl, st = models.round_well_presonance(1.0, 1)
        f = wave.gaussian_bump(2.5, 0.5)
        fp = wave.project_out(f, st, wave.gaussian_bump(4.5, 0.5), mdl.interfaces)
        fits = []
        for data in (f, fp):
            fld = wave.evolve_fd(mdl, 1, data, T, [2.0], h=h, record_dt=1.0, calibrate=True)
            t, u = fld.series(0)
            fits.append(wave.fit_decay(t, u, "t_over_log", window=(500.0, T)))
        gen, proj = fits
        spread = (max(gen.window_values) - min(gen.window_values)) / abs(np.mean(gen.window_values))
        collapse = abs(gen.alpha) / max(abs(proj.alpha), 1e-300)
        ok = gen.passed and collapse >= 20.0
        return ok, {"alpha_windows": gen.window_values, "spread": float(spread),
                    "alpha_projected": proj.alpha, "collapse": float(collapse)}

    return _timed(5, "threshold growth", run)


def criterion_6() -> CheckResult:
    def run():
        mdl = models.RoundWell(J01, 1.0)
        f = wave.gaussian_bump(2.5, 0.5)
        fld = wave.evolve_fd(mdl, 0, f, 40.0, [2.0], h=0.02, record_dt=0.1)
        (st,) = wave.find_bound_states(mdl, 0)
        t, u = fld.series(0)
        amp = wave.pair(f, st.profile, mdl.interfaces) * float(st.profile(np.array([2.0]))[0])
        law = np.sinh(st.kappa * t) / st.kappa * amp
        m = t >= 10.0
        err = float(np.max(np.abs(u[m] - law[m]) / np.abs(law[m])))
        return err <= 1e-2, {"energy": st.energy, "max_rel_err": err}

    return _timed(6, "bound-state term", run)


def criterion_7() -> CheckResult:
    def run():
        f = wave.gaussian_bump(2.5, 0.5)
        lams = lowfreq.default_lambdas()
        detail, ok = {}, True
        for m in (1, -1):
            vals = lowfreq.sample_lowfreq(models.RoundWell(J01, 1.0), m, f, lams)
            fit = lowfreq.fit_expansion(list(zip(lams, vals)))
            arg = math.atan2(fit.resonance_b.imag, fit.resonance_b.real)
            ok &= fit.M == 1 and abs(arg + math.pi / 2) <= 0.1
            detail[f"on m={m}: M, arg b"] = [fit.M, arg]
        for fac in (0.5, 0.8):
            vals = lowfreq.sample_lowfreq(models.RoundWell(fac * J01, 1.0), 1, f, lams)
            fit = lowfreq.fit_expansion(list(zip(lams, vals)))
            sing = max(fit.contributions["zero_eigen"], fit.contributions["presonance"])
            full = max(fit.contributions["zero_eigen_full"], fit.contributions["presonance_full"])
            ok &= fit.M == 0 and sing <= 1e-3
            detail[f"off {fac}: M, singular, unpruned"] = [fit.M, sing, full]
        return ok, detail

    return _timed(7, "low-frequency fit", run)


def _vws_residual(h, variable, half_width=3.0):
    n = 2 * int(round(half_width / h)) + 1
    x = (np.arange(n) - n // 2) * h
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    chi = models.product_cutoff(X1, X2, 1.0, 2.0)
    c = 1.0 + 0.3 * np.exp(-((X1 - 0.5) ** 2 + X2**2)) if variable else 1.0
    return float(np.abs(models.vws_construct(c, chi, 1.0, h).residual()).max())


def criterion_8(h: float = 0.01) -> CheckResult:
    def run():
        ratios = [_vws_residual(h, v) / _vws_residual(h / 2, v) for v in (False, True)]
        return all(3.5 <= q <= 4.5 for q in ratios), {"ratio_const_c": ratios[0], "ratio_variable_c": ratios[1]}

    return _timed(8, "VWS construction", run)


def criterion_9() -> CheckResult:
    def run():
        f = wave.gaussian_bump(2.5, 0.5)
        cases = [("free m=0", models.Free(), 0), ("free m=1", models.Free(), 1),
                 ("well 0.5 m=1", models.RoundWell(0.5 * J01, 1.0), 1),
                 ("well 0.8 m=1", models.RoundWell(0.8 * J01, 1.0), 1)]
        detail, ok = {}, True
        for name, mdl, m in cases:
            fld = wave.evolve_fd(mdl, m, f, 800.0, [2.0], h=0.05, record_dt=0.5)
            split = wave.decompose(fld, mdl)
            passes = [wave.fit_decay(split.times, split.u_r, "log_power", M=M, window=(50.0, 800.0)).passed
                      for M in (1, 2)]
            ok &= all(passes)
            detail[name] = passes
        return ok, detail

    return _timed(9, "remainder envelope", run)


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 10)}


def run_all(selected=None, echo=None):
    out = []
    for i in selected or sorted(CRITERIA):
        res = CRITERIA[i]()
        if echo:
            echo(res.line())
        out.append(res)
    return out

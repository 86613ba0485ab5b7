"""Command-line front end: ``logdecay <command> [options]``.

Commands: resonance, resolvent, contour, simulate, fit, verify-all.

Options can also come from ``--config FILE`` holding ``key = value`` lines
(keys are the long option names, dashes or underscores); flags given on the
command line win.  Exit status: 0 when every requested check passes, 1 when
a check fails, 2 for an invalid configuration, 3 for a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, acceptance, contour, lowfreq, models, radial, wave
from .errors import LogDecayError
from .specfun import BranchedComplex, bessel_j, bessel_zero

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("resonance", "resolvent", "contour", "simulate", "fit", "verify-all")
MODEL_NAMES = ("free", "round-well", "delta-ring", "robin-disc")


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return v


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()]


def parse_t_grid(text: str) -> list:
    """``e6:e12:4`` (exponents, n points), ``100:1000:5`` (geometric) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("t-grid needs start:stop:count")
        lo, hi, n = parts
        n = int(n)
        if lo.startswith("e") and hi.startswith("e"):
            return [math.exp(x) for x in np.linspace(float(lo[1:]), float(hi[1:]), n)]
        return list(np.geomspace(float(lo), float(hi), n))
    return _floats(text)


def _model_args(p):
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=MODEL_NAMES, default="round-well")
    g.add_argument("--a", type=float, help="well amplitude or ring coupling (default: resonant value)")
    g.add_argument("--a-factor", type=float, default=1.0, help="multiplies the resonant a or sigma")
    g.add_argument("--R", type=_positive, default=1.0)
    g.add_argument("--n", type=int, default=1, help="zero index j_{0,n} for the round well")
    g.add_argument("--rho", type=_positive, default=1.0)
    g.add_argument("--sigma", type=float, help="Robin coefficient (default: 1/rho)")


def _data_args(p):
    g = p.add_argument_group("initial data")
    g.add_argument("--data", choices=("gaussian", "random"), default="gaussian")
    g.add_argument("--center", type=float, default=2.5)
    g.add_argument("--width", type=_positive, default=0.5)


def _common(p):
    p.add_argument("--config", type=Path, help="key = value file with the same keys as the flags")
    p.add_argument("--output", type=Path, help="output file (CSV for series, JSON for reports)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, help="worker processes (env LOGDECAY_WORKERS, else CPU count)")
    p.add_argument("--plot-script", type=Path, help="also write a matplotlib script for the CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logdecay", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"logdecay {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resonance", help="closed-form p-resonance and its residuals")
    _model_args(p)
    _common(p)
    p.add_argument("--tol", type=_positive, default=1e-10)

    p = sub.add_parser("resolvent", help="sample <f, R(lam) f> near lam = 0 and fit the expansion")
    _model_args(p)
    _data_args(p)
    _common(p)
    p.add_argument("--mode", type=int, default=1)
    p.add_argument("--lam-min", type=_positive, default=1e-4)
    p.add_argument("--lam-max", type=_positive, default=1e-2)
    p.add_argument("--per-ray", type=int, default=10)
    p.add_argument("--rays", type=_floats, default=[0.5, 0.25, 0.75], help="ray angles in units of pi")
    p.add_argument("--h", type=_positive, default=0.005)

    p = sub.add_parser("contour", help="zero-energy profile J(t) on a time grid")
    _common(p)
    p.add_argument("--b", type=_complex, default=-1j)
    p.add_argument("--t-grid", type=parse_t_grid, default=parse_t_grid("e6:e12:4"))
    p.add_argument("--eta", type=_positive)
    p.add_argument("--A", type=_positive, default=contour.DEFAULT_A)
    p.add_argument("--C", type=_positive, default=contour.DEFAULT_C)
    p.add_argument("--Cprime", type=_positive, default=contour.DEFAULT_CPRIME)
    p.add_argument("--rtol", type=_positive, default=1e-8)

    p = sub.add_parser("simulate", help="wave evolution with the u_d / u_z / u_r split")
    _model_args(p)
    _data_args(p)
    _common(p)
    p.add_argument("--mode", type=int, default=1)
    p.add_argument("--T", type=_positive, default=200.0)
    p.add_argument("--observers", type=_floats, default=[2.0])
    p.add_argument("--h", type=_positive, default=0.02)
    p.add_argument("--cfl", type=_positive, default=0.9)
    p.add_argument("--record-dt", type=_positive, default=0.5)
    p.add_argument("--method", choices=("fd", "spectral"), default="fd")
    p.add_argument("--calibrate", choices=("auto", "yes", "no"), default="auto",
                   help="shift the threshold parameter onto the discrete resonance")

    p = sub.add_parser("fit", help="fit the low-frequency expansion or a decay law to a CSV")
    _common(p)
    p.add_argument("--input", type=Path, required=False)
    p.add_argument("--law", choices=("expansion", "t_over_log", "log_power"), default="t_over_log")
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--column", default="u")
    p.add_argument("--observer", type=float, help="select rows with this r_obs")
    p.add_argument("--window", type=_floats, help="lo,hi in t")

    p = sub.add_parser("verify-all", help="run the acceptance matrix")
    _common(p)
    p.add_argument("--criteria", type=lambda s: [int(x) for x in s.split(",")], default=list(range(1, 10)))
    return parser


def read_config(path: Path) -> list:
    """[(lineno, key, value)] from ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        out.append((lineno, k.replace("-", "_"), v))
    return out


_NEG_VALUE = re.compile(r"^-[0-9.][0-9.eE+\-]*[ij]?$|^-[ij]$")


def _join_negative_values(argv):
    """``--b -1i`` -> ``--b=-1i``; argparse would read -1i as an option."""
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEG_VALUE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def parse_args(argv):
    parser = build_parser()
    argv = _join_negative_values(argv)
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    flags = {tok.split("=", 1)[0] for tok in argv}
    given = {a.dest for a in sub._actions for opt in a.option_strings if opt in flags}
    for lineno, key, raw in read_config(args.config):
        if key == "command":
            if raw != args.command:
                raise ConfigError(f"{args.config}:{lineno}: command {raw!r} does not match {args.command!r}")
            continue
        if key not in actions:
            raise ConfigError(f"{args.config}:{lineno}: unknown key {key!r} for {args.command}")
        if key in given:
            continue
        act = actions[key]
        try:
            if act.choices is not None and raw not in act.choices:
                raise ValueError(f"must be one of {sorted(act.choices)}")
            val = act.type(raw) if act.type is not None else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{args.config}:{lineno}: bad value for {key}: {exc}") from exc
        setattr(args, key, val)
    return args


def validate(args):
    """Schema checks done before any computation."""
    for key in ("tol", "rtol", "h", "T", "cfl", "record_dt", "width", "eta", "lam_min", "lam_max"):
        v = getattr(args, key, None)
        if v is not None and not v > 0:
            raise ConfigError(f"{key} must be positive")
    if getattr(args, "cfl", None) is not None and args.cfl > wave.MAX_CFL:
        raise ConfigError(f"cfl must not exceed {wave.MAX_CFL}")
    if getattr(args, "lam_min", None) is not None and args.lam_min >= args.lam_max:
        raise ConfigError("lam-min must be below lam-max")
    if args.output is not None:
        parent = args.output.resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise ConfigError(f"output directory {parent} is not writable")
    if args.command == "fit" and args.input is None:
        raise ConfigError("fit needs --input")
    if args.command == "verify-all" and any(c not in acceptance.CRITERIA for c in args.criteria):
        raise ConfigError("criteria must be among 1..9")


def workers(args) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    env = os.environ.get("LOGDECAY_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"LOGDECAY_WORKERS={env!r} is not an integer") from exc
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def model_from_args(args) -> models.RadialModel:
    if args.model == "free":
        return models.Free()
    if args.model == "round-well":
        a = args.a if args.a is not None else bessel_zero(0, args.n) / args.R
        return models.RoundWell(a * args.a_factor, args.R)
    if args.model == "delta-ring":
        a = args.a if args.a is not None else -2.0 / args.R
        return models.DeltaRing(a * args.a_factor, args.R)
    sigma = args.sigma if args.sigma is not None else 1.0 / args.rho
    return models.RobinDisc(args.rho, sigma * args.a_factor)


def data_from_args(args) -> wave.RadialData:
    if args.data == "gaussian":
        return wave.gaussian_bump(args.center, args.width)
    rng = np.random.default_rng(args.seed)
    out = None
    for _ in range(3):
        bump = wave.gaussian_bump(args.center + rng.uniform(-1, 1) * args.width, args.width)
        out = bump.scaled(rng.normal()) if out is None else wave.combine(out, bump, 1.0, rng.normal())
    return out


def resonant_state(model, mode):
    """Closed-form p-resonant state when the model sits on its resonance, else None."""
    if abs(mode) != 1:
        return None
    if isinstance(model, models.RoundWell):
        n = max(1, int(round(model.a * model.R / math.pi + 0.25)))
        mdl, st = models.round_well_presonance(model.R, n)
        return st if abs(mdl.a - model.a) <= 1e-9 * mdl.a else None
    if isinstance(model, models.DeltaRing):
        mdl, st = models.delta_ring_presonance(model.R)
        return st if abs(mdl.a - model.a) <= 1e-12 * abs(mdl.a) else None
    if isinstance(model, models.RobinDisc):
        mdl, states = models.robin_disc_presonance(model.rho)
        return states[0] if abs(mdl.sigma - model.sigma) <= 1e-12 * abs(mdl.sigma) else None
    return None


def zero_mode(model, mode):
    if isinstance(model, models.DeltaRing) and abs(mode) >= 2:
        mdl, phi = wave.delta_ring_zero_mode(model.R, mode)
        if abs(mdl.a - model.a) <= 1e-12 * abs(mdl.a):
            return phi
    return None


def metadata_lines(args) -> list:
    keys = sorted(k for k in vars(args) if k not in ("config", "plot_script"))
    lines = [f"# logdecay {__version__}"]
    for k in keys:
        v = getattr(args, k)
        if isinstance(v, Path):
            v = str(v)
        lines.append(f"# {k} = {json.dumps(v, default=str)}")
    return lines


def write_csv(args, header, rows, extra_meta=()):
    buf = io.StringIO()
    for line in metadata_lines(args):
        buf.write(line + "\n")
    for k, v in extra_meta:
        buf.write(f"# {k} = {json.dumps(v, default=str)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) for x in row])
    text = buf.getvalue()
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)
    if args.plot_script is not None and args.output is not None:
        args.plot_script.write_text(PLOT_STUB.format(csv=str(args.output), x=header[0], ys=header[1:]))


def read_csv(path: Path) -> dict:
    """Columns of a CSV written by this tool (``#`` metadata lines skipped)."""
    try:
        lines = [ln for ln in path.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    rows = list(csv.reader(lines))
    if len(rows) < 2:
        raise ConfigError(f"{path}: no data rows")
    header, body = rows[0], rows[1:]
    try:
        cols = np.array(body, dtype=float).T
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric or ragged data ({exc})") from exc
    if cols.shape[0] != len(header):
        raise ConfigError(f"{path}: header has {len(header)} columns, data {cols.shape[0]}")
    return dict(zip(header, cols))


def write_report(args, record: dict):
    text = json.dumps(record, indent=2, sort_keys=True, default=str) + "\n"
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text)


PLOT_STUB = '''"""Plot {csv} (generated by logdecay; needs matplotlib)."""
import numpy as np
import matplotlib.pyplot as plt

data = np.genfromtxt("{csv}", delimiter=",", names=True, comments="#")
for name in {ys!r}:
    plt.plot(data["{x}"], data[name], label=name)
plt.xlabel("{x}")
plt.legend()
plt.show()
'''


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_resonance(args) -> int:
    if args.model == "free":
        raise ConfigError("the free model has no p-resonance")
    if args.model == "round-well":
        mdl, st = models.round_well_presonance(args.R, args.n)
        states = [st]
    elif args.model == "delta-ring":
        mdl, st = models.delta_ring_presonance(args.R)
        states = [st]
    else:
        mdl, states = models.robin_disc_presonance(args.rho)
    record = {"model": models.model_to_config(mdl).strip().replace("\n", "; ")}
    ok = True
    for st in states:
        res = models.matching_residuals(mdl, st)
        ok &= all(abs(v) <= args.tol for k, v in res.items() if k != "existence")
        record[f"mode {st.mode}"] = {"residuals": res, "inner_coeff": st.inner_coeff,
                                     "outer_coeff": st.outer_coeff, "decay": st.decay}
    if isinstance(mdl, models.RoundWell):
        j0 = abs(float(bessel_j(0, mdl.a * mdl.R)))
        record["|J0(aR)|"] = j0
        ok &= j0 <= 1e-12
    cert = radial.presonance_certificate(mdl, 1)
    record["certificate"] = cert
    ok &= abs(cert["determinant"]) <= args.tol
    for k, v in (("a", getattr(mdl, "a", None)), ("sigma", getattr(mdl, "sigma", None))):
        if v is not None:
            print(f"{k} = {v!r}")
    if "|J0(aR)|" in record:
        print(f"|J0(aR)| = {record['|J0(aR)|']:.3e}")
    for st in states:
        for k, v in record[f"mode {st.mode}"]["residuals"].items():
            print(f"mode {st.mode} {k} residual = {v:.3e}")
        print(f"mode {st.mode} inner_coeff = {st.inner_coeff!r} outer_coeff = {st.outer_coeff!r}")
    print(f"zero-energy determinant = {cert['determinant'] + 0.0:.3e}, d/d{cert['parameter']} = {cert['slope']:.6g}")
    if args.output is not None:
        write_report(args, record)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_resolvent(args) -> int:
    mdl = model_from_args(args)
    data = data_from_args(args)
    lams = lowfreq.default_lambdas(args.lam_min, args.lam_max, args.per_ray,
                                   tuple(x * math.pi for x in args.rays))
    vals = lowfreq.sample_lowfreq(mdl, args.mode, data, lams, h=args.h)
    fit = lowfreq.fit_expansion(list(zip(lams, vals)))
    rows = [(lam.value.real, lam.value.imag, abs(lam.value), lam.arg, v.real, v.imag)
            for lam, v in zip(lams, vals)]
    b = fit.resonance_b
    write_csv(args, ["lam_re", "lam_im", "abs_lam", "arg_lam", "value_re", "value_im"], rows,
              extra_meta=[("fit_M", fit.M), ("fit_b", [b.real, b.imag]), ("fit_residual", fit.residual)])
    print(f"M = {fit.M}, b = {b:.6g}, arg b = {math.atan2(b.imag, b.real):.6f}, residual = {fit.residual:.3e}",
          file=sys.stderr)
    return EXIT_OK


def _jm_point(job):
    t, b, eta, A, C, Cp, rtol = job
    return contour.jm_profile(t, b, eta=eta, A=A, C=C, Cprime=Cp, rtol=rtol)


def cmd_contour(args) -> int:
    jobs = [(t, args.b, args.eta, args.A, args.C, args.Cprime, args.rtol) for t in args.t_grid]
    nw = min(workers(args), len(jobs))
    if nw > 1:
        with ProcessPoolExecutor(nw) as ex:
            J = list(ex.map(_jm_point, jobs))
    else:
        J = [_jm_point(j) for j in jobs]
    rows = [(t, j, j * math.log(t) / t) for t, j in zip(args.t_grid, J)]
    write_csv(args, ["t", "J", "J_norm"], rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    mdl = model_from_args(args)
    data = data_from_args(args)
    state = resonant_state(mdl, args.mode)
    phi = zero_mode(mdl, args.mode)
    calibrate = {"yes": True, "no": False}.get(args.calibrate, state is not None or phi is not None)
    if args.method == "fd":
        fld = wave.evolve_fd(mdl, args.mode, data, args.T, args.observers, h=args.h, cfl=args.cfl,
                             record_dt=args.record_dt, calibrate=calibrate)
    else:
        times = np.arange(0.0, args.T + 0.5 * args.record_dt, args.record_dt)
        fld = wave.evolve_spectral(mdl, args.mode, data, times, args.observers)
    fit = None
    if not isinstance(mdl, models.Free):
        lams = lowfreq.default_lambdas()
        fit = lowfreq.fit_expansion(list(zip(lams, lowfreq.sample_lowfreq(mdl, args.mode, data, lams))))
    rows = []
    for j, r in enumerate(fld.observers):
        split = wave.decompose(fld, mdl, fit, state=state, observer_index=j, zero_mode=phi)
        rows.extend((t, r, u, d, z, q) for t, u, d, z, q in
                    zip(split.times, split.u, split.u_d, split.u_z, split.u_r))
    meta = [("method", fld.method), ("nodes", fld.meta.get("nodes")), ("dt", fld.meta.get("dt")),
            ("calibrated_model", models.model_to_config(fld.model).strip().replace("\n", "; ")),
            ("fit_M", None if fit is None else fit.M)]
    write_csv(args, ["t", "r_obs", "u", "u_d", "u_z", "u_r"], rows, extra_meta=meta)
    return EXIT_OK


def cmd_fit(args) -> int:
    tab = read_csv(args.input)
    names = tuple(tab)
    if args.law == "expansion":
        need = ("lam_re", "lam_im", "value_re", "value_im")
        if not all(n in names for n in need):
            raise ConfigError(f"{args.input}: expansion fit needs columns {need}")
        lam = tab["lam_re"] + 1j * tab["lam_im"]
        samples = [(BranchedComplex(complex(z)), complex(v)) for z, v in
                   zip(lam, tab["value_re"] + 1j * tab["value_im"])]
        fit = lowfreq.fit_expansion(samples)
        write_report(args, {"law": "expansion", **fit.report(), "contributions": fit.contributions})
        return EXIT_OK
    if "t" not in names or args.column not in names:
        raise ConfigError(f"{args.input}: needs columns 't' and {args.column!r}")
    sel = np.ones(tab["t"].shape, dtype=bool)
    if args.observer is not None and "r_obs" in names:
        sel = np.isclose(tab["r_obs"], args.observer)
    window = tuple(args.window) if args.window else None
    res = wave.fit_decay(tab["t"][sel], tab[args.column][sel], args.law, M=args.M, window=window)
    write_report(args, {"law": res.law, "alpha": res.alpha, "residual": res.residual,
                        "windows": res.windows, "window_values": res.window_values, "passed": res.passed})
    return EXIT_OK if res.passed else EXIT_FAIL


def _criterion(i):
    return acceptance.CRITERIA[i]()


def cmd_verify_all(args) -> int:
    nw = min(workers(args), len(args.criteria))
    if nw > 1:
        with ProcessPoolExecutor(nw) as ex:
            results = list(ex.map(_criterion, args.criteria))
    else:
        results = [_criterion(i) for i in args.criteria]
    for r in results:
        print(r.line())
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    if args.output is not None:
        write_report(args, {str(r.number): {"name": r.name, "passed": r.passed, "seconds": r.seconds,
                                            "detail": r.detail} for r in results})
    return EXIT_OK if n_pass == len(results) else EXIT_FAIL


HANDLERS = {"resonance": cmd_resonance, "resolvent": cmd_resolvent, "contour": cmd_contour,
            "simulate": cmd_simulate, "fit": cmd_fit, "verify-all": cmd_verify_all}


def _failing_module(exc) -> str:
    mod = "logdecay"
    tb = exc.__traceback__
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("logdecay.") and name != __name__:
            mod = name
        tb = tb.tb_next
    return mod


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        validate(args)
        return HANDLERS[args.command](args)
    except SystemExit as exc:       # argparse usage errors already printed
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    except ConfigError as exc:
        print(f"logdecay: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LogDecayError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"logdecay: {_failing_module(exc)}: {type(exc).__name__}: {exc}", file=sys.stderr)
        if os.environ.get("LOGDECAY_DEBUG"):
            traceback.print_exc()
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

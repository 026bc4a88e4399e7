"""Command line front end.

    mckean3 <command> [--config run.toml] [--out path] [--n-max N] [--steps S] [--tol-*]

Commands: trace, monodromy, ramifications, three-point, schrodinger, verify,
winding.  Reports are JSON (sorted keys, "schema": 1); traces are CSV.  All
numbers are written in scientific notation with 17 significant digits.

Exit codes: 0 success (for verify: every identity passed), 1 usage or
configuration error, 2 numeric regime error (the failing module is named
on stderr).  A verify run that completes with a failed identity also exits
with 2.

Config file (TOML, or JSON when the name ends in .json); every key is
optional and unknown keys are rejected::

    n_max = 3
    steps = 2048          # third-order ODE steps; default per-disk rule
    threshold = 0.25      # smallness threshold on norm_h1
    samples = 64          # contour samples

    [coefficients.p]
    constant = 0.0
    cos = [0.05]
    sin = []
    [coefficients.q]
    sin = [0.03]

    [tolerances]          # verify only
    correspondence = 1e-5

    [trace]
    what = "rho"          # rho | bdet | lyapunov | potential
    start = 1.0
    stop = 500.0
    points = 1000
    imag = 0.0            # constant imaginary part of the grid
    energy = 9.0          # potential only
    which = "direct"      # bdet only

    [monodromy]
    lam = [10.0, 0.0]

    [winding]
    n = 1
    steps = 256

    [output]
    path = "report.json"
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .coefficients import CoefficientPair
from .errors import ConfigError, McKeanError
from .verify import DEFAULT_TOLERANCES, SCHEMA

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

COMMANDS = ("trace", "monodromy", "ramifications", "three-point", "schrodinger", "verify",
            "winding")

_TRACE_DEFAULTS = {"what": "rho", "start": 1.0, "stop": 500.0, "points": 1000, "imag": 0.0,
                   "energy": 9.0, "which": "direct"}
_SECTIONS = {
    "trace": _TRACE_DEFAULTS,
    "monodromy": {"lam": [10.0, 0.0]},
    "winding": {"n": 1, "steps": 256},
    "output": {"path": None},
}
_TOP_KEYS = {"coefficients", "n_max", "steps", "threshold", "samples", "tolerances"} | set(_SECTIONS)


@dataclass
class RunConfig:
    """Validated run configuration.  Defaults: psi = 0, n_max = 3."""
    coefficients: CoefficientPair = field(default_factory=CoefficientPair)
    n_max: int = 3
    steps: int | None = None
    threshold: float | None = 0.25
    samples: int = 64
    tolerances: dict = field(default_factory=dict)
    trace: dict = field(default_factory=lambda: dict(_TRACE_DEFAULTS))
    monodromy: dict = field(default_factory=lambda: dict(_SECTIONS["monodromy"]))
    winding: dict = field(default_factory=lambda: dict(_SECTIONS["winding"]))
    output: dict = field(default_factory=lambda: dict(_SECTIONS["output"]))

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        unknown = set(d) - _TOP_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls()
        try:
            if "coefficients" in d:
                cfg.coefficients = CoefficientPair.from_dict(d["coefficients"])
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"coefficients: {exc}") from None
        if "n_max" in d:
            cfg.n_max = _int(d["n_max"], "n_max", 1)
        if "steps" in d:
            cfg.steps = _int(d["steps"], "steps", 64)
        if "threshold" in d:
            cfg.threshold = _float(d["threshold"], "threshold")
        if "samples" in d:
            cfg.samples = _int(d["samples"], "samples", 8)
        if "tolerances" in d:
            cfg.set_tolerances(d["tolerances"])
        for name, defaults in _SECTIONS.items():
            sec = d.get(name, {})
            if not isinstance(sec, dict):
                raise ConfigError(f"[{name}] must be a table")
            bad = set(sec) - set(defaults)
            if bad:
                raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
            getattr(cfg, name).update(sec)
        return cfg

    def set_tolerances(self, tol: dict):
        bad = set(tol) - set(DEFAULT_TOLERANCES)
        if bad:
            raise ConfigError(f"unknown tolerance keys: {sorted(bad)}")
        for k, v in tol.items():
            self.tolerances[k] = _float(v, f"tolerances.{k}")


def _int(v, name, lo):
    if isinstance(v, bool) or not isinstance(v, int) or v < lo:
        raise ConfigError(f"{name} must be an integer >= {lo}, got {v!r}")
    return v


def _float(v, name):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{name} must be a finite number, got {v!r}")
    return float(v)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        if path.endswith(".json"):
            d = json.loads(raw.decode("utf-8"))
        else:
            d = tomllib.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(d, dict):
        raise ConfigError("config must be a table")
    return RunConfig.from_dict(d)


# ---------------------------------------------------------------------------
# locale-independent output

def fmt_float(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.16e}"


def _json(obj, indent=0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(obj, (complex, np.complexfloating)):
        return _json([obj.real, obj.imag], indent)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _json(obj.tolist(), indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(obj[k], indent + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(x, (int, float, np.number)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_json(x) for x in obj) + "]"
        return "[\n" + ",\n".join(pad + _json(x, indent + 1) for x in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _json(obj) + "\n"


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt_float(v) for v in r])
    return buf.getvalue()


def _c(v):
    v = complex(v)
    return [v.real, v.imag]


# ---------------------------------------------------------------------------
# commands; each returns (payload text, exit code)

def cmd_trace(cfg: RunConfig):
    from .monodromy import rho_batch
    from .ode_core import default_steps
    from .three_point import bdet_batch

    tr = cfg.trace
    what = tr["what"]
    if what not in ("rho", "bdet", "lyapunov", "potential"):
        raise ConfigError(f"trace.what must be rho, bdet, lyapunov or potential, got {what!r}")
    psi = cfg.coefficients
    if what == "potential":
        from .mckean import potential_direct
        ep = potential_direct(psi, complex(_float(tr["energy"], "trace.energy")))
        rows = [(x, v.real, v.imag) for x, v in zip(ep.x_grid, ep.V)]
        return write_csv(["x", "V_re", "V_im"], rows), 0
    n = _int(tr["points"], "trace.points", 2)
    grid = (np.linspace(_float(tr["start"], "trace.start"), _float(tr["stop"], "trace.stop"), n)
            + 1j * _float(tr["imag"], "trace.imag"))
    if what == "lyapunov":
        from ._parallel import pmap
        from .schrodinger import lyapunov
        vals = pmap(lambda E: lyapunov(psi, E), grid)
        rows = [(E.real, E.imag, v.real, v.imag) for E, v in zip(grid, vals)]
        return write_csv(["E_re", "E_im", "f_re", "f_im"], rows), 0
    zmax = max(abs(complex(l)) ** (1 / 3) for l in grid)
    steps = cfg.steps or default_steps(zmax)
    if what == "rho":
        vals = rho_batch(psi, grid, steps)
    else:
        which = tr["which"]
        if which not in ("direct", "transpose"):
            raise ConfigError("trace.which must be direct or transpose")
        vals = bdet_batch(psi, grid, steps, which)
    rows = [(l.real, l.imag, v.real, v.imag) for l, v in zip(grid, vals)]
    return write_csv(["lam_re", "lam_im", "f_re", "f_im"], rows), 0


def cmd_monodromy(cfg: RunConfig):
    from .monodromy import monodromy_matrix, select_tau3
    from .ode_core import SpectralPoint

    lam = cfg.monodromy["lam"]
    if isinstance(lam, (list, tuple)):
        if len(lam) != 2:
            raise ConfigError("monodromy.lam is a number or [re, im]")
        lam = complex(_float(lam[0], "lam"), _float(lam[1], "lam"))
    else:
        lam = complex(_float(lam, "monodromy.lam"))
    pt = SpectralPoint.from_lambda(lam)
    md = monodromy_matrix(cfg.coefficients, pt, cfg.steps)
    out = {"schema": SCHEMA, "psi": cfg.coefficients.to_dict(), "lam": _c(pt.lam), "z": _c(pt.z),
           "E": _c(pt.E), "steps": md.steps, "M": [[_c(v) for v in row] for row in md.M],
           "multipliers": [_c(t) for t in md.multipliers], "rho": _c(md.rho),
           "det": _c(md.det), "trace": _c(np.trace(md.M))}
    try:
        tau3, idx = select_tau3(md)
        out["tau3"] = _c(tau3)
        out["tau3_index"] = idx
    except McKeanError as exc:
        out["tau3"] = None
        out["tau3_error"] = str(exc)
    return dumps(out), 0


def _ns(cfg):
    return [n for n in range(-cfg.n_max, cfg.n_max + 1) if n != 0]


def cmd_ramifications(cfg: RunConfig):
    from .ramifications import find_ramifications

    rs = find_ramifications(cfg.coefficients, cfg.n_max, steps=cfg.steps, samples=cfg.samples,
                            threshold=cfg.threshold, include_zero=True)
    out = {"schema": SCHEMA, "psi": cfg.coefficients.to_dict(), "n_max": cfg.n_max,
           "ramifications": {str(n): {"r_minus": _c(e.r_minus), "r_plus": _c(e.r_plus),
                                      "flag": e.multiplicity_flag, "count": e.count}
                             for n, e in sorted(rs.entries.items())}}
    return dumps(out), 0


def cmd_three_point(cfg: RunConfig):
    from .three_point import find_three_point_eigs, norming_constants_h

    psi = cfg.coefficients
    direct = find_three_point_eigs(psi, cfg.n_max, "direct", steps=cfg.steps,
                                   samples=cfg.samples, threshold=cfg.threshold)
    trans = find_three_point_eigs(psi, cfg.n_max, "transpose", steps=cfg.steps,
                                  samples=cfg.samples, threshold=cfg.threshold)
    h = {}
    if psi.is_real():
        h = {str(e.n): norming_constants_h(psi, e.n, e) for e in trans if e.n > 0}
    out = {"schema": SCHEMA, "psi": psi.to_dict(), "n_max": cfg.n_max,
           "mu": {str(e.n): _c(e.mu) for e in direct},
           "mu_transpose": {str(e.n): _c(e.mu) for e in trans},
           "floquet_A": {str(e.n): _c(e.floquet_A) for e in trans},
           "h_sn": h}
    return dumps(out), 0


def cmd_schrodinger(cfg: RunConfig):
    from .schrodinger import hill_spectrum

    hs = hill_spectrum(cfg.coefficients, cfg.n_max, samples=cfg.samples,
                       threshold=cfg.threshold)
    out = {"schema": SCHEMA, "psi": cfg.coefficients.to_dict(), "n_max": cfg.n_max,
           "E": {str(n): [_c(a), _c(b)] for n, (a, b) in sorted(hs.periodic_eigs.items())},
           "gamma": {str(n): _c(g) for n, g in sorted(hs.dirichlet_eigs.items())},
           "g_sn": {str(n): g for n, g in sorted(hs.norming.items())}}
    return dumps(out), 0


def cmd_verify(cfg: RunConfig):
    from .verify import verify_all

    rep = verify_all(cfg.coefficients, cfg.n_max, cfg.tolerances or None,
                     threshold=cfg.threshold)
    code = 0 if rep.all_passed else 2
    if code:
        failed = sorted(k for k, ok in rep.passed.items() if not ok)
        print("verify: identities failed: " + "; ".join(failed), file=sys.stderr)
    return dumps(rep.to_dict()), code


def cmd_winding(cfg: RunConfig):
    from .verify import winding_trace

    n = _int(cfg.winding["n"], "winding.n", 1)
    steps = _int(cfg.winding["steps"], "winding.steps", 64 * n)
    wt = winding_trace(cfg.coefficients, n, steps, ode_steps=cfg.steps)
    out = {"schema": SCHEMA, "psi": cfg.coefficients.to_dict(), "n": n, "steps": steps,
           "winding": abs(wt.winding), "signed_winding": wt.winding,
           "r_minus": wt.r_minus, "r_plus": wt.r_plus,
           "mu_min": float(wt.mu.min()), "mu_max": float(wt.mu.max())}
    return dumps(out), 0


_HANDLERS = {"trace": cmd_trace, "monodromy": cmd_monodromy,
             "ramifications": cmd_ramifications, "three-point": cmd_three_point,
             "schrodinger": cmd_schrodinger, "verify": cmd_verify, "winding": cmd_winding}


# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mckean3", description="Spectral data of the third-order periodic "
                 "operator and its energy-dependent Hill counterpart.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="TOML (or .json) run configuration")
    ap.add_argument("--out", help="output file (default: [output].path or stdout)")
    ap.add_argument("--n-max", type=int, help="largest disk index")
    ap.add_argument("--steps", type=int, help="third-order ODE steps per unit length")
    ap.add_argument("--threshold", type=float, help="smallness threshold on norm_h1")
    for k in DEFAULT_TOLERANCES:
        ap.add_argument(f"--tol-{k}", type=float, dest=f"tol_{k}", metavar="TOL",
                        help=f"tolerance for {k} identities (default {DEFAULT_TOLERANCES[k]:g})")
    tr = ap.add_argument_group("trace")
    tr.add_argument("--what", choices=("rho", "bdet", "lyapunov", "potential"))
    tr.add_argument("--start", type=float)
    tr.add_argument("--stop", type=float)
    tr.add_argument("--points", type=int)
    tr.add_argument("--imag", type=float)
    tr.add_argument("--energy", type=float)
    tr.add_argument("--which", choices=("direct", "transpose"))
    ap.add_argument("--lam", type=float, nargs=2, metavar=("RE", "IM"),
                    help="spectral parameter for monodromy")
    ap.add_argument("--n", type=int, help="gap index for winding")
    ap.add_argument("--translation-steps", type=int, help="translation samples for winding")
    return ap


def _apply_flags(cfg: RunConfig, a) -> RunConfig:
    if a.n_max is not None:
        cfg.n_max = _int(a.n_max, "--n-max", 1)
    if a.steps is not None:
        cfg.steps = _int(a.steps, "--steps", 64)
    if a.threshold is not None:
        cfg.threshold = a.threshold
    tol = {k: getattr(a, f"tol_{k}") for k in DEFAULT_TOLERANCES
           if getattr(a, f"tol_{k}") is not None}
    cfg.set_tolerances(tol)
    for k in _TRACE_DEFAULTS:
        v = getattr(a, k)
        if v is not None:
            cfg.trace[k] = v
    if a.lam is not None:
        cfg.monodromy["lam"] = list(a.lam)
    if a.n is not None:
        cfg.winding["n"] = a.n
    if a.translation_steps is not None:
        cfg.winding["steps"] = a.translation_steps
    return cfg


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        cfg = _apply_flags(load_config(a.config), a)
    except ConfigError as exc:
        print(f"mckean3: config error: {exc}", file=sys.stderr)
        return 1
    try:
        text, code = _HANDLERS[a.command](cfg)
    except ConfigError as exc:
        print(f"mckean3: config error: {exc}", file=sys.stderr)
        return 1
    except McKeanError as exc:
        print(f"mckean3: {type(exc).__name__} in module {exc.module}: {exc}", file=sys.stderr)
        return 2
    out = a.out or cfg.output.get("path")
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"mckean3: cannot write {out}: {exc}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Full pipelines: spectral report and eigenvalue winding under translation.

verify_all computes both spectral pictures for psi and the transformed
coefficients psi^- (reflection), psi_* = (p, -q) and psi_*^-, then
evaluates every correspondence identity between them.  Each residual is
recomputable from the tables in the report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import contour
from ._parallel import pmap
from .coefficients import CoefficientPair, norm_h1
from .errors import DegenerateGap, LostTracking, McKeanError
from .monodromy import cubic_roots, select_tau3, MonodromyData, symmetric_functions
from .ode_core import SpectralPoint, terminal_third_order
from .ramifications import DiskSpec, find_ramifications
from .schrodinger import find_dirichlet_eigs, find_periodic_eigs, norming_constants_g
from .three_point import (bdet_normalizer, _bdet_from_phi, find_three_point_eigs,
                          norming_constants_h)

SCHEMA = 1
GAP_NOISE = 1e-7

DEFAULT_TOLERANCES = {
    "correspondence": 1e-5,
    "symmetry": 1e-6,
    "inclusion": 1e-7,
    "reality": 1e-7,
    "norming": 1e-5,
}

# identity name -> tolerance key
IDENTITY_KIND = {
    "E(psi) = 3/4 r(psi)^(2/3)": "correspondence",
    "E(psi^-) = E(psi)": "correspondence",
    "E(psi_*) = 3/4 (-r_{-n}^{-+}(psi))^(2/3)": "correspondence",
    "E(psi_*^-) = E(psi_*)": "correspondence",
    "gamma(psi^-) = 3/4 mu(psi)^(2/3)": "correspondence",
    "gamma(psi) = 3/4 mu~(psi)^(2/3)": "correspondence",
    "gamma(psi) = 3/4 (-mu_{-n}(psi_*))^(2/3)": "correspondence",
    "g_sn = h_sn / (4 pi n)": "norming",
    "mu in [r-, r+]": "inclusion",
    "gamma in [E-, E+]": "inclusion",
    "r(psi) = -r_{-n}^{-+}(psi_*)": "symmetry",
    "r(psi) = -r_{-n}^{-+}(psi_*^-)": "symmetry",
    "r(psi) = r(psi^-)": "symmetry",
    "mu(psi) = -mu_{-n}(psi_*^-)": "symmetry",
    "mu(psi) = -mu~_{-n}(psi_*)": "symmetry",
    "mu(psi) = mu~(psi^-)": "symmetry",
    "reality": "reality",
    "ordering": "reality",
}


def _pow23(v):
    return 0.75 * complex(v) ** (2.0 / 3.0)


def _rel(a, b):
    a, b = complex(a), complex(b)
    return abs(a - b) / max(abs(a), 1e-300)


def _excess(v, lo, hi):
    v, lo, hi = complex(v).real, complex(lo).real, complex(hi).real
    return max(0.0, lo - v, v - hi)


@dataclass
class SpectralReport:
    psi: CoefficientPair
    n_max: int
    tables: dict
    residuals: dict
    passed: dict
    tolerances: dict
    norm_h1: float = 0.0
    errors: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return not self.errors and all(self.passed.values())

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "psi": self.psi.to_dict(),
            "psi_description": self.psi.describe(),
            "norm_h1": self.norm_h1,
            "n_max": self.n_max,
            "tables": self.tables,
            "residuals": self.residuals,
            "pass": self.passed,
            "all_pass": self.all_passed,
            "tolerances": self.tolerances,
            "errors": self.errors,
        }


def _c(v):
    v = complex(v)
    return [v.real, v.imag]


def _spectral_tables(psi: CoefficientPair, n_max: int, threshold):
    """Everything verify_all needs, computed per coefficient variant."""
    pos = list(range(1, n_max + 1))
    neg = [-n for n in pos]
    psi_r, psi_s, psi_sr = psi.reflect(), psi.star(), psi.star().reflect()

    jobs = {
        "r": lambda: find_ramifications(psi, n_max, threshold=threshold),
        "r_star": lambda: find_ramifications(psi_s, 0, ns=neg, threshold=threshold),
        "r_star_ref": lambda: find_ramifications(psi_sr, 0, ns=neg, threshold=threshold),
        "r_ref": lambda: find_ramifications(psi_r, 0, ns=pos, threshold=threshold),
        "mu": lambda: find_three_point_eigs(psi, n_max, "direct", threshold=threshold),
        "mut": lambda: find_three_point_eigs(psi, 0, "transpose", ns=pos, threshold=threshold),
        "mu_star": lambda: find_three_point_eigs(psi_s, 0, "direct", ns=neg, threshold=threshold),
        "mu_star_ref": lambda: find_three_point_eigs(psi_sr, 0, "direct", ns=neg,
                                                     threshold=threshold),
        "mut_star": lambda: find_three_point_eigs(psi_s, 0, "transpose", ns=neg,
                                                  threshold=threshold),
        "mut_ref": lambda: find_three_point_eigs(psi_r, 0, "transpose", ns=pos,
                                                 threshold=threshold),
        "E": lambda: find_periodic_eigs(psi, n_max, threshold=threshold),
        "E_ref": lambda: find_periodic_eigs(psi_r, n_max, threshold=threshold),
        "E_star": lambda: find_periodic_eigs(psi_s, n_max, threshold=threshold),
        "E_star_ref": lambda: find_periodic_eigs(psi_sr, n_max, threshold=threshold),
        "gamma": lambda: find_dirichlet_eigs(psi, n_max, threshold=threshold),
        "gamma_ref": lambda: find_dirichlet_eigs(psi_r, n_max, threshold=threshold),
    }
    names = list(jobs)

    def run(name):
        try:
            return name, jobs[name](), None
        except McKeanError as exc:
            return name, None, exc

    out, errs = {}, []
    for name, val, exc in pmap(run, names):
        if exc is not None:
            errs.append((name, exc))
        out[name] = val
    return out, errs


def verify_all(psi: CoefficientPair, n_max: int = 3, tolerances: dict | None = None,
               threshold: float | None = 0.25) -> SpectralReport:
    """Compute both spectral pictures and the residual of every identity."""
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        unknown = set(tolerances) - set(tol)
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        tol.update(tolerances)
    d, errs = _spectral_tables(psi, n_max, threshold)
    if errs:
        name, exc = errs[0]
        raise type(exc)(f"[{name}] {exc}", module=exc.module)

    pos = list(range(1, n_max + 1))
    r, rs, rsr, rr = d["r"], d["r_star"], d["r_star_ref"], d["r_ref"]
    mu = {e.n: e for e in d["mu"]}
    mut = {e.n: e for e in d["mut"]}
    mus = {e.n: e.mu for e in d["mu_star"]}
    musr = {e.n: e.mu for e in d["mu_star_ref"]}
    muts = {e.n: e.mu for e in d["mut_star"]}
    mutr = {e.n: e.mu for e in d["mut_ref"]}
    E, Er, Es, Esr = d["E"], d["E_ref"], d["E_star"], d["E_star_ref"]
    gam, gamr = d["gamma"], d["gamma_ref"]

    h = {n: norming_constants_h(psi, n, mut[n]) for n in pos}
    g = {n: norming_constants_g(psi, n, gam[n]) for n in pos}

    res = {k: 0.0 for k in IDENTITY_KIND}
    sgn = {"-": -1, "+": 1}
    for n in pos:
        for s, i in (("-", 0), ("+", 1)):
            rn = r.r(n, sgn[s])
            res["E(psi) = 3/4 r(psi)^(2/3)"] = max(res["E(psi) = 3/4 r(psi)^(2/3)"],
                                                   _rel(E[n][i], _pow23(rn)))
            res["E(psi^-) = E(psi)"] = max(res["E(psi^-) = E(psi)"], _rel(Er[n][i], E[n][i]))
            key = "E(psi_*) = 3/4 (-r_{-n}^{-+}(psi))^(2/3)"
            res[key] = max(res[key], _rel(Es[n][i], _pow23(-r.r(-n, -sgn[s]))))
            res["E(psi_*^-) = E(psi_*)"] = max(res["E(psi_*^-) = E(psi_*)"],
                                               _rel(Esr[n][i], Es[n][i]))
            sc = 1 + abs(rn)
            for key, other in (("r(psi) = -r_{-n}^{-+}(psi_*)", -rs.r(-n, -sgn[s])),
                               ("r(psi) = -r_{-n}^{-+}(psi_*^-)", -rsr.r(-n, -sgn[s])),
                               ("r(psi) = r(psi^-)", rr.r(n, sgn[s]))):
                res[key] = max(res[key], abs(rn - other) / sc)
        m = mu[n].mu
        res["gamma(psi^-) = 3/4 mu(psi)^(2/3)"] = max(
            res["gamma(psi^-) = 3/4 mu(psi)^(2/3)"], _rel(gamr[n], _pow23(m)))
        res["gamma(psi) = 3/4 mu~(psi)^(2/3)"] = max(
            res["gamma(psi) = 3/4 mu~(psi)^(2/3)"], _rel(gam[n], _pow23(mut[n].mu)))
        res["gamma(psi) = 3/4 (-mu_{-n}(psi_*))^(2/3)"] = max(
            res["gamma(psi) = 3/4 (-mu_{-n}(psi_*))^(2/3)"], _rel(gam[n], _pow23(-mus[-n])))
        res["g_sn = h_sn / (4 pi n)"] = max(res["g_sn = h_sn / (4 pi n)"],
                                            abs(g[n] - h[n] / (4 * np.pi * n)) / (1 + abs(g[n])))
        res["mu in [r-, r+]"] = max(res["mu in [r-, r+]"],
                                    _excess(m, r.r(n, -1), r.r(n, 1)) / (1 + abs(m)))
        res["gamma in [E-, E+]"] = max(res["gamma in [E-, E+]"],
                                       _excess(gam[n], E[n][0], E[n][1]) / (1 + abs(gam[n])))
        sc = 1 + abs(m)
        for key, other in (("mu(psi) = -mu_{-n}(psi_*^-)", -musr[-n]),
                           ("mu(psi) = -mu~_{-n}(psi_*)", -muts[-n]),
                           ("mu(psi) = mu~(psi^-)", mutr[n])):
            res[key] = max(res[key], abs(m - other) / sc)
    # negative-n 3-point eigenvalues join the reality check
    vals = [r.r(n, s) for n in r.entries for s in (1, -1)]
    vals += [e.mu for e in d["mu"]] + [mut[n].mu for n in pos]
    vals += [e for n in pos for e in E[n]] + [gam[n] for n in pos]
    res["reality"] = max(abs(complex(v).imag) for v in vals)
    res["ordering"] = 0.0 if _ordered(psi, r, E, n_max) else 1.0

    passed = {k: bool(v < tol[IDENTITY_KIND[k]]) for k, v in res.items()}
    passed["ordering"] = res["ordering"] == 0.0

    tables = {
        "r": {str(n): [_c(e.r_minus), _c(e.r_plus)] for n, e in sorted(r.entries.items())},
        "r_flag": {str(n): e.multiplicity_flag for n, e in sorted(r.entries.items())},
        "mu": {str(n): _c(e.mu) for n, e in sorted(mu.items())},
        "mu_transpose": {str(n): _c(mut[n].mu) for n in pos},
        "mu_transpose_by_symmetry": {str(n): _c(mutr[n]) for n in pos},
        "h_sn": {str(n): h[n] for n in pos},
        "E": {str(n): [_c(E[n][0]), _c(E[n][1])] for n in pos},
        "gamma": {str(n): _c(gam[n]) for n in pos},
        "g_sn": {str(n): g[n] for n in pos},
        "E_reflect": {str(n): [_c(Er[n][0]), _c(Er[n][1])] for n in pos},
        "E_star": {str(n): [_c(Es[n][0]), _c(Es[n][1])] for n in pos},
        "E_star_reflect": {str(n): [_c(Esr[n][0]), _c(Esr[n][1])] for n in pos},
        "gamma_reflect": {str(n): _c(gamr[n]) for n in pos},
        "mu_star": {str(n): _c(v) for n, v in sorted(mus.items())},
        "mu_star_reflect": {str(n): _c(v) for n, v in sorted(musr.items())},
        "mu_transpose_star": {str(n): _c(v) for n, v in sorted(muts.items())},
        "r_star": {str(n): [_c(e.r_minus), _c(e.r_plus)] for n, e in sorted(rs.entries.items())},
        "r_star_reflect": {str(n): [_c(e.r_minus), _c(e.r_plus)]
                           for n, e in sorted(rsr.entries.items())},
        "r_reflect": {str(n): [_c(e.r_minus), _c(e.r_plus)] for n, e in sorted(rr.entries.items())},
    }
    return SpectralReport(psi, n_max, tables, res, passed, tol, norm_h1(psi))


def _ordered(psi, r, E, n_max) -> bool:
    """2 < E_1^- <= E_1^+ < E_2^- ... and ... < r_1^- <= r_1^+ < r_2^- ..."""
    seq = [2.0]
    for n in range(1, n_max + 1):
        seq += [complex(E[n][0]).real, complex(E[n][1]).real]
    ok = all(seq[i] < seq[i + 1] if i % 2 == 0 else seq[i] <= seq[i + 1]
             for i in range(len(seq) - 1))
    rseq = []
    for n in sorted(r.entries):
        if n == 0:
            continue
        rseq += [complex(r.r(n, -1)).real, complex(r.r(n, 1)).real]
    ok_r = all(rseq[i] <= rseq[i + 1] if i % 2 == 0 else rseq[i] < rseq[i + 1]
               for i in range(len(rseq) - 1))
    return ok and ok_r


# ---------------------------------------------------------------------------
# winding

@dataclass
class WindingTrace:
    n: int
    t: np.ndarray
    mu: np.ndarray
    ell: np.ndarray
    u: np.ndarray
    angle: np.ndarray
    r_minus: float
    r_plus: float
    winding: int


def _mu_and_sheet(psi, disk, steps, a, b):
    """Direct 3-point eigenvalue in the chart bracket (a, b) plus log|A tau3^{1/2}|."""
    def fr(w):
        term = terminal_third_order(psi, disk.lam_of(np.array([w])), steps, with_inverse=False)
        return float((_bdet_from_phi(term.Phi) / bdet_normalizer(np.array([w])))[0].real)

    w = contour.real_single(fr, a, b).real
    mu = float(disk.lam_of(w).real)
    term = terminal_third_order(psi, [mu], steps)
    Phi1 = term.Phi[0]
    Phi2 = Phi1 @ Phi1
    c = Phi2[0, 1] / Phi2[0, 2]
    A = Phi1[1, 1] - c * Phi1[1, 2]
    e1, e2, e3 = (complex(v[0]) for v in symmetric_functions(term))
    taus = cubic_roots(e1, e2, e3)
    data = MonodromyData(SpectralPoint.from_lambda(mu), Phi1.T, taus, 0j, Phi1, term.Phi_inv[0],
                         e3, (e1, e2, e3), steps)
    tau3, _ = select_tau3(data)
    return mu, float(np.log(abs(A) * math.sqrt(abs(tau3))))


def winding_trace(psi: CoefficientPair, n: int, steps: int = 256,
                  ode_steps: int | None = None) -> WindingTrace:
    """Track mu_n(psi(. + t)) for t = j/steps and lift it to the gap circle.

    The lift places mu on the circle over [r_n^-, r_n^+]: the horizontal
    coordinate is u = (2 mu - r^+ - r^-)/(r^+ - r^-) and the vertical one
    is l = log|A tau_3^{1/2}(mu)|, where A = y'(1)/y'(0) for the 3-point
    eigenfunction.  l vanishes exactly when mu sits at a gap edge (the two
    small multipliers meet there) and its sign tells the sheet.  The winding
    number of (u, l) around the origin is the number of rounds.
    """
    if n <= 0:
        raise ValueError("winding is tracked for n >= 1")
    if steps < 64 * n:
        raise ValueError("steps must be at least 64 n")
    rset = find_ramifications(psi, 0, ns=[n], threshold=None)
    e = rset[n]
    rm, rp = complex(e.r_minus).real, complex(e.r_plus).real
    gap = rp - rm
    # the report's double flag (1e-6 relative) is coarser than some genuine
    # gaps, so only a gap at the noise level counts as closed here
    if e.kind == "double" or gap <= GAP_NOISE * (1 + abs(rp)):
        raise DegenerateGap(f"gap {n} is closed (r+ - r- = {gap:.3e})")
    disk = DiskSpec(n)
    ode_steps = disk.steps() if ode_steps is None else ode_steps
    # chart bracket a little wider than the gap; fall back to the full disk
    wm, wp = disk.w_of(rm).real, disk.w_of(rp).real
    pad = max(wp - wm, 1e-9)
    ts = np.arange(steps + 1) / steps
    mus, ells = [], []
    for t in ts:
        pt_psi = psi.translate(float(t))
        try:
            m, l = _mu_and_sheet(pt_psi, disk, ode_steps, wm - pad, wp + pad)
        except ValueError:
            m, l = _mu_and_sheet(pt_psi, disk, ode_steps, disk.center - 0.999,
                                 disk.center + 0.999)
        if mus and abs(m - mus[-1]) > 0.5 * gap:
            raise LostTracking(f"mu jumped by {abs(m - mus[-1]):.3e} at t={t:.4f} "
                               f"(half gap {0.5 * gap:.3e})")
        mus.append(m)
        ells.append(l)
    mus, ells = np.array(mus), np.array(ells)
    u = (2 * mus - rp - rm) / gap
    lscale = max(np.max(np.abs(ells)), 1e-300)
    ang = np.unwrap(np.arctan2(ells / lscale, u))
    wind = int(round((ang[-1] - ang[0]) / (2 * np.pi)))
    return WindingTrace(n, ts, mus, ells, u, ang, rm, rp, wind)


def track_winding(psi: CoefficientPair, n: int, steps: int = 256) -> int:
    """Number of rounds mu_n(psi(. + t)) makes around the gap as t runs over [0, 1]."""
    return abs(winding_trace(psi, n, steps).winding)

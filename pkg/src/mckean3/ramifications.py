"""Ramifications: zeros of the discriminant rho inside the disks D_n.

D_n (n > 0) is |z - 2 pi n / sqrt 3| < 1 in the cube-root chart lam = z^3,
D_{-n} its mirror lam -> -lam, and D_0 the unit disk in lam.  In each
D_n, n != 0, rho is divided by the zero-free factor
-64 sin^2(s w z) sin^2(s w^2 z), s = sqrt(3)/2, which leaves a function
close to sin^2(s z): two zeros near the centre and O(1) size on the
boundary.  In D_0 rho is divided by its leading coefficient -27.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import contour
from ._parallel import pmap
from .coefficients import CoefficientPair, norm_h1
from .errors import WrongCount
from .monodromy import rho_batch
from .ode_core import OMEGA, SQRT3

SMALLNESS = 0.25
SPECTRAL_STEPS = 2048
_S = SQRT3 / 2


@dataclass(frozen=True)
class DiskSpec:
    """Disk D_n described in its chart w (z for n != 0, lam for n = 0)."""
    n: int

    @property
    def center(self) -> float:
        return 0.0 if self.n == 0 else 2 * np.pi * abs(self.n) / SQRT3

    @property
    def radius(self) -> float:
        return 1.0

    def lam_of(self, w):
        w = np.asarray(w, dtype=complex)
        if self.n == 0:
            return w
        return w ** 3 if self.n > 0 else -w ** 3

    def w_of(self, lam):
        lam = complex(lam)
        if self.n == 0:
            return lam
        v = lam if self.n > 0 else -lam
        r, a = abs(v), np.angle(v)
        return r ** (1 / 3) * np.exp(1j * a / 3)

    def contains(self, lam) -> bool:
        return abs(self.w_of(lam) - self.center) < self.radius

    def steps(self) -> int:
        return max(SPECTRAL_STEPS, 64 * int(math.ceil(self.center + self.radius)))


def rho_normalizer(disk: DiskSpec, w):
    w = np.asarray(w, dtype=complex)
    if disk.n == 0:
        return np.full(w.shape, -27.0 + 0j)
    return -64.0 * (np.sin(_S * OMEGA * w) * np.sin(_S * OMEGA ** 2 * w)) ** 2


@dataclass
class RamificationEntry:
    r_minus: complex
    r_plus: complex
    multiplicity_flag: str        # "simple_pair" or "double"
    count: int
    kind: str = ""                # how the pair was refined

    def as_tuple(self):
        return (self.r_minus, self.r_plus, self.multiplicity_flag)


@dataclass
class RamificationSet:
    entries: dict = field(default_factory=dict)
    psi: CoefficientPair | None = None

    def __getitem__(self, n):
        return self.entries[n]

    def __contains__(self, n):
        return n in self.entries

    def r(self, n, sign):
        e = self.entries[n]
        return e.r_plus if sign > 0 else e.r_minus


def count_zeros_in_disk(f, disk: DiskSpec, samples: int = 64) -> int:
    """Argument-principle count of zeros of f(lam) inside the disk."""
    return contour.count_zeros_on_circle(lambda w: f(disk.lam_of(w)), disk.center,
                                         disk.radius, samples)


def _order(lams):
    a, b = lams
    return (a, b) if (a.real, a.imag) <= (b.real, b.imag) else (b, a)


def _clean_real(v, tol=1e-13):
    v = complex(v)
    return complex(v.real, 0.0) if abs(v.imag) <= tol * (1 + abs(v)) else v


def ramifications_in_disk(psi: CoefficientPair, n: int, steps: int | None = None,
                          samples: int = 64) -> RamificationEntry:
    disk = DiskSpec(n)
    steps = disk.steps() if steps is None else steps

    def f(w):
        w = np.atleast_1d(w)
        return rho_batch(psi, disk.lam_of(w), steps) / rho_normalizer(disk, w)

    cs = contour.CircleSamples(f, disk.center, disk.radius, samples)
    if cs.count != 2:
        raise WrongCount(f"disk D_{n} holds {cs.count} zeros of rho, expected 2")
    f1 = lambda w: complex(f(np.array([w]))[0])
    kind = ""
    ws = None
    if psi.is_real():
        fr = lambda x: float(f1(x).real)
        a = disk.center - 0.999 * disk.radius
        b = disk.center + 0.999 * disk.radius
        lo, hi, kind = contour.real_pair(fr, a, b)
        if kind != "complex_pair":
            ws = (lo, hi)
    if ws is None:
        est = cs.zero_estimates(2)
        ws = tuple(contour.refine_pair(f1, est))
        kind = kind or "complex_refine"
    lams = [_clean_real(disk.lam_of(w)[()]) for w in ws]
    rm, rp = _order(lams)
    flag = "double" if abs(rp - rm) < 1e-6 * (1 + abs(rm)) else "simple_pair"
    return RamificationEntry(complex(rm), complex(rp), flag, cs.count, kind)


def _check_regime(psi, threshold):
    if threshold is not None and norm_h1(psi) > threshold:
        raise WrongCount(f"norm_h1(psi) = {norm_h1(psi):.4g} exceeds the smallness "
                         f"threshold {threshold}; disk counts are not guaranteed")


def find_ramifications(psi: CoefficientPair, n_max: int, ns=None, steps: int | None = None,
                       samples: int = 64, threshold: float | None = SMALLNESS,
                       include_zero: bool = False) -> RamificationSet:
    """Ramifications r_n^- <= r_n^+ for 1 <= |n| <= n_max.

    ``ns`` overrides the list of disks; ``include_zero`` adds D_0.
    """
    _check_regime(psi, threshold)
    if ns is None:
        ns = [n for n in range(-n_max, n_max + 1) if n != 0 or include_zero]
    ns = sorted(ns)
    entries = pmap(lambda n: ramifications_in_disk(psi, n, steps, samples), ns)
    return RamificationSet(dict(zip(ns, entries)), psi)


def check_ramification_symmetries(psi: CoefficientPair, rset: RamificationSet,
                                  steps: int | None = None, samples: int = 64) -> dict:
    """Residuals of r_n^+-(psi) = -r_{-n}^-+(psi_*) = -r_{-n}^-+(psi_*^-) = r_n^+-(psi^-).

    Each residual is max over n, sign of |lhs - rhs| / (1 + |r_n|).  The
    three transformed sets are computed from scratch.
    """
    ns = sorted(rset.entries)
    neg = sorted({-n for n in ns})
    star = find_ramifications(psi.star(), 0, ns=neg, steps=steps, samples=samples, threshold=None)
    star_ref = find_ramifications(psi.star().reflect(), 0, ns=neg, steps=steps,
                                  samples=samples, threshold=None)
    ref = find_ramifications(psi.reflect(), 0, ns=ns, steps=steps, samples=samples,
                             threshold=None)
    out = {"star": 0.0, "star_reflect": 0.0, "reflect": 0.0}
    detail = []
    for n in ns:
        for sgn in (1, -1):
            r = rset.r(n, sgn)
            sc = 1 + abs(r)
            a = abs(r + star.r(-n, -sgn)) / sc
            b = abs(r + star_ref.r(-n, -sgn)) / sc
            c = abs(r - ref.r(n, sgn)) / sc
            out["star"] = max(out["star"], a)
            out["star_reflect"] = max(out["star_reflect"], b)
            out["reflect"] = max(out["reflect"], c)
            detail.append({"n": n, "sign": sgn, "r": r, "star": a, "star_reflect": b,
                           "reflect": c})
    out["detail"] = detail
    out["max"] = max(out["star"], out["star_reflect"], out["reflect"])
    return out

"""3-point Dirichlet problem y(0) = y(1) = y(2) = 0.

The spectrum of the direct operator is the zero set of

    B(lam) = phi_2(1) phi_3(2) - phi_3(1) phi_2(2),

and the transpose operator uses the same formula with the transpose
fundamental solutions.  Values at x = 2 come from the square of the state
map, Phi(2) = Phi(1)^2, which holds because the coefficients are
1-periodic.

For root finding in D_n the determinant is divided by the zero-free
factor 8 / (3 sqrt3 w^3) sin(s w w) sin(s w^2 w), s = sqrt(3)/2, leaving a
function close to sin(s w) in the cube-root chart.  (For psi = 0 the
quotient is exactly sin(s z).)
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import contour
from ._parallel import pmap
from .coefficients import CoefficientPair
from .errors import BranchError, WrongCount
from .monodromy import monodromy_matrix, select_tau3
from .ode_core import (OMEGA, SQRT3, SpectralPoint, default_steps, prefix_products,
                       terminal_third_order, third_order_step_matrices)
from .ramifications import SMALLNESS, DiskSpec, _check_regime, _clean_real

_S = SQRT3 / 2
EIG_SAMPLES = 2048


def _bdet_from_phi(Phi1):
    Phi2 = Phi1 @ Phi1
    return Phi1[..., 0, 1] * Phi2[..., 0, 2] - Phi1[..., 0, 2] * Phi2[..., 0, 1]


def bdet_batch(psi: CoefficientPair, lams, steps: int, which: str = "direct"):
    term = terminal_third_order(psi, lams, steps, transpose=(which == "transpose"),
                                with_inverse=False)
    return _bdet_from_phi(term.Phi)


def three_point_determinant(psi: CoefficientPair, pt: SpectralPoint, which: str = "direct",
                            steps: int | None = None) -> complex:
    """B(lam) for the direct or transpose operator."""
    if which not in ("direct", "transpose"):
        raise ValueError("which must be 'direct' or 'transpose'")
    steps = default_steps(pt.z) if steps is None else steps
    return complex(bdet_batch(psi, [pt.lam], steps, which)[0])


def bdet_unperturbed(z):
    """B for psi = 0: 8 / (3 sqrt3 lam) sin(s z) sin(s w z) sin(s w^2 z), lam = z^3."""
    z = np.asarray(z, dtype=complex)
    return (8.0 / (3.0 * SQRT3 * z ** 3) * np.sin(_S * z) * np.sin(_S * OMEGA * z)
            * np.sin(_S * OMEGA ** 2 * z))


def bdet_normalizer(w):
    w = np.asarray(w, dtype=complex)
    return 8.0 / (3.0 * SQRT3 * w ** 3) * np.sin(_S * OMEGA * w) * np.sin(_S * OMEGA ** 2 * w)


@dataclass
class ThreePointEig:
    n: int
    mu: complex
    which: str
    x_grid: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    y1: np.ndarray = field(repr=False)
    y2: np.ndarray = field(repr=False)
    floquet_A: complex = 0j
    count: int = 1
    bdet: complex = 0j
    steps: int = 0


def eigenfunction(psi: CoefficientPair, mu: complex, which: str, steps: int,
                  samples: int = EIG_SAMPLES):
    """3-point eigenfunction on [0, 2] with y'(0) = 1, and A = y'(1).

    Returns (x, y, y', y^[2], A, B(mu)).
    """
    transpose = which == "transpose"
    P = third_order_step_matrices(psi, [mu], steps, transpose=transpose)[0]
    S = prefix_products(P)
    Phi1 = S[-1]
    Phi2 = Phi1 @ Phi1
    if abs(Phi2[0, 2]) < 1e-8:
        raise BranchError(f"y'(0) normalization fails at mu={mu}: phi_3(2) = {Phi2[0, 2]:.3e}")
    c = Phi2[0, 1] / Phi2[0, 2]
    v = np.array([0.0, 1.0, -c], dtype=complex)
    # trajectory over [0, 2]: second period is Phi(x) Phi(1)
    Phis = np.concatenate([np.eye(3, dtype=complex)[None], S, S @ Phi1])
    Y = Phis @ v
    x = np.linspace(0.0, 2.0, 2 * steps + 1)
    stride = max(1, (2 * steps) // samples)
    sel = slice(None, None, stride)
    A = complex(Y[steps, 1])
    return x[sel], Y[sel, 0], Y[sel, 1], Y[sel, 2], A, complex(_bdet_from_phi(Phi1))


def _eig_in_disk(psi, n, which, steps, samples):
    disk = DiskSpec(n)
    steps = disk.steps() if steps is None else steps

    def f(w):
        w = np.atleast_1d(w)
        return bdet_batch(psi, disk.lam_of(w), steps, which) / bdet_normalizer(w)

    cs = contour.CircleSamples(f, disk.center, disk.radius, samples, module="three_point")
    if cs.count != 1:
        raise WrongCount(f"disk D_{n} holds {cs.count} 3-point eigenvalues ({which}), "
                         "expected 1", module="three_point")
    f1 = lambda w: complex(f(np.array([w]))[0])
    w = None
    if psi.is_real():
        fr = lambda x: float(f1(x).real)
        a, b = disk.center - 0.999, disk.center + 0.999
        if fr(a) * fr(b) < 0:
            w = contour.real_single(fr, a, b)
    if w is None:
        w = contour.newton_refine(f1, cs.zero_estimates(1)[0])
    mu = _clean_real(disk.lam_of(w)[()])
    x, y, y1, y2, A, B = eigenfunction(psi, mu, which, steps)
    return ThreePointEig(n, mu, which, x, y, y1, y2, A, cs.count, B, steps)


def find_three_point_eigs(psi: CoefficientPair, n_max: int, which: str = "direct",
                          ns=None, steps: int | None = None, samples: int = 64,
                          threshold: float | None = SMALLNESS) -> list:
    """One eigenvalue per disk D_n for 1 <= |n| <= n_max (or the given ns)."""
    if which not in ("direct", "transpose"):
        raise ValueError("which must be 'direct' or 'transpose'")
    _check_regime(psi, threshold)
    if ns is None:
        ns = [n for n in range(-n_max, n_max + 1) if n != 0]
    ns = sorted(ns)
    return pmap(lambda n: _eig_in_disk(psi, n, which, steps, samples), ns)


def positive_sqrt_tau3(psi: CoefficientPair, lam, steps: int) -> tuple:
    """(tau3, tau3^{1/2}) at real lam with the positive root.

    Raises BranchError when tau3 is not on the positive real axis.
    """
    data = monodromy_matrix(psi, SpectralPoint.from_lambda(lam), steps)
    tau3, _ = select_tau3(data)
    if not (tau3.real > 0 and abs(tau3.imag) <= 1e-8 * abs(tau3)):
        raise BranchError(f"tau3({lam}) = {tau3} is not positive real")
    return tau3, np.sqrt(tau3.real)


def norming_constants_h(psi: CoefficientPair, n: int, eig: ThreePointEig | None = None,
                        steps: int | None = None) -> float:
    """h_sn = 8 (pi n)^2 log|y~'(1) tau3^{-1/2}(mu~_n)| with y~'(0) = 1."""
    if eig is None:
        eig = find_three_point_eigs(psi, 0, "transpose", ns=[n], steps=steps, threshold=None)[0]
    if eig.which != "transpose":
        raise ValueError("norming constants use the transpose eigenfunction")
    mu = complex(eig.mu)
    if abs(mu.imag) > 1e-8 * (1 + abs(mu)):
        raise BranchError(f"mu~_{n} = {mu} is not real")
    _, s = positive_sqrt_tau3(psi, mu.real, eig.steps)
    return float(8 * (np.pi * n) ** 2 * np.log(abs(eig.floquet_A / s)))

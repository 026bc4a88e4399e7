"""Spectral data of -f'' + V(x, E) f = E f for the McKean potential.

Every evaluation rebuilds V(., E) at that E.  Root searches run in the
chart k = sqrt(E) on the disks |k - pi n| < sqrt(3)/2 (the images S_n of
the third-order disks D_n): Delta^2 - 1 has two zeros there and phi(1, E)
one.  For real coefficients the zeros are found on the real segment.

Band edges are located as zeros of ((theta - phi')/2)^2 + theta' phi,
which is Delta^2 - 1 rewritten through the Wronskian.  The rewritten form
is the discriminant of the period map, so it stays accurate when a gap is
much narrower than the integration error of Delta itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import contour
from ._parallel import pmap
from .coefficients import CoefficientPair
from .errors import WrongCount
from .mckean import GRID, EnergyPotential, potential_direct, potential_fixed_point
from .ode_core import SQRT3, terminal_schrodinger
from .ramifications import SMALLNESS, _check_regime, _clean_real

K_RADIUS = SQRT3 / 2


@dataclass
class HillPointData:
    E: complex
    theta1: complex
    theta1p: complex
    phi1: complex
    phi1p: complex
    Delta: complex
    potential: EnergyPotential | None = field(default=None, repr=False)

    @property
    def wronskian(self) -> complex:
        return self.theta1 * self.phi1p - self.theta1p * self.phi1

    @property
    def disc(self) -> complex:
        """((theta - phi')/2)^2 + theta' phi, equal to Delta^2 - 1 when W = 1.

        Near a narrow gap every term is small, so this form keeps full
        relative accuracy where Delta^2 - 1 loses it to cancellation.
        """
        return ((self.theta1 - self.phi1p) / 2) ** 2 + self.theta1p * self.phi1

    @property
    def d2_residual(self) -> complex:
        """Delta^2 - ((theta - phi')/2)^2 - theta' phi - 1."""
        return (self.Delta ** 2 - ((self.theta1 - self.phi1p) / 2) ** 2
                - self.theta1p * self.phi1 - 1.0)


def hill_from_potential(ep: EnergyPotential, E) -> HillPointData:
    """Propagate theta, phi through one period of a sampled potential.

    The potential grid j/N supplies every RK stage point of N/2 steps.
    """
    V = ep.V  # j/N for j = 0..N, periodic endpoint included
    Psi = terminal_schrodinger(V[None], [complex(E)])[0]
    th, thp, ph, php = Psi[0, 0], Psi[1, 0], Psi[0, 1], Psi[1, 1]
    return HillPointData(complex(E), th, thp, ph, php, 0.5 * (th + php), ep)


def hill_point(psi: CoefficientPair, E, E_potential=None, route: str = "direct",
               grid: int = GRID) -> HillPointData:
    """Hill data at energy E.

    ``E_potential`` freezes the energy argument of V at a different value;
    by default V(., E) is used.
    """
    Ep = E if E_potential is None else E_potential
    if route == "direct":
        ep = potential_direct(psi, Ep, grid)
    elif route == "fixed_point":
        ep = potential_fixed_point(psi, Ep, grid=grid)
    else:
        raise ValueError("route must be 'direct' or 'fixed_point'")
    return hill_from_potential(ep, E)


def lyapunov(psi: CoefficientPair, E, route: str = "direct", grid: int = GRID) -> complex:
    return hill_point(psi, E, route=route, grid=grid).Delta


@dataclass
class HillSpectrum:
    periodic_eigs: dict = field(default_factory=dict)    # n -> (E-, E+)
    dirichlet_eigs: dict = field(default_factory=dict)   # n -> gamma_n
    norming: dict = field(default_factory=dict)          # n -> g_sn
    flags: dict = field(default_factory=dict)


def _k_batch(fn):
    return lambda ks: np.array([fn(complex(k)) for k in np.atleast_1d(ks)])


def _band_edges(psi, n, route, grid, samples):
    disc = lambda k: hill_point(psi, k * k, route=route, grid=grid).disc
    f = _k_batch(disc)
    cs = contour.CircleSamples(f, np.pi * n, K_RADIUS, samples, module="schrodinger")
    if cs.count != 2:
        raise WrongCount(f"S_{n} holds {cs.count} periodic/antiperiodic eigenvalues, expected 2",
                         module="schrodinger")
    ks = None
    kind = ""
    if psi.is_real():
        fr = lambda k: float(-disc(k).real)
        lo, hi, kind = contour.real_pair(fr, np.pi * n - 0.999 * K_RADIUS,
                                         np.pi * n + 0.999 * K_RADIUS)
        if kind != "complex_pair":
            ks = (lo, hi)
    if ks is None:
        f1 = lambda k: complex(f(np.array([k]))[0])
        ks = tuple(contour.refine_pair(f1, cs.zero_estimates(2)))
        kind = kind or "complex_refine"
    Es = sorted((_clean_real(k * k) for k in ks), key=lambda e: (e.real, e.imag))
    flag = "double" if abs(Es[1] - Es[0]) < 1e-6 * (1 + abs(Es[0])) else "simple_pair"
    return (Es[0], Es[1]), flag


def find_periodic_eigs(psi: CoefficientPair, n_max: int, ns=None, route: str = "direct",
                       grid: int = GRID, samples: int = 64,
                       threshold: float | None = SMALLNESS) -> dict:
    """n -> (E_n^-, E_n^+), the zeros of Delta^2 - 1 in S_n."""
    _check_regime(psi, threshold)
    ns = sorted(ns) if ns is not None else list(range(1, n_max + 1))
    res = pmap(lambda n: _band_edges(psi, n, route, grid, samples), ns)
    return {n: r[0] for n, r in zip(ns, res)}


def _dirichlet(psi, n, route, grid, samples):
    phi1 = lambda k: hill_point(psi, k * k, route=route, grid=grid).phi1 * k
    f = _k_batch(phi1)
    cs = contour.CircleSamples(f, np.pi * n, K_RADIUS, samples, module="schrodinger")
    if cs.count != 1:
        raise WrongCount(f"S_{n} holds {cs.count} Dirichlet eigenvalues, expected 1",
                         module="schrodinger")
    k = None
    if psi.is_real():
        fr = lambda k: float(phi1(k).real)
        a, b = np.pi * n - 0.999 * K_RADIUS, np.pi * n + 0.999 * K_RADIUS
        if fr(a) * fr(b) < 0:
            k = contour.real_single(fr, a, b)
    if k is None:
        k = contour.newton_refine(phi1, cs.zero_estimates(1)[0])
    return _clean_real(k * k)


def find_dirichlet_eigs(psi: CoefficientPair, n_max: int, ns=None, route: str = "direct",
                        grid: int = GRID, samples: int = 64,
                        threshold: float | None = SMALLNESS) -> dict:
    """n -> gamma_n, the zero of E -> phi(1, E) in S_n."""
    _check_regime(psi, threshold)
    ns = sorted(ns) if ns is not None else list(range(1, n_max + 1))
    res = pmap(lambda n: _dirichlet(psi, n, route, grid, samples), ns)
    return dict(zip(ns, res))


def norming_constants_g(psi: CoefficientPair, n: int, gamma=None, route: str = "direct",
                        grid: int = GRID) -> float:
    """g_sn = 2 pi n log|phi'(1, gamma_n)|."""
    if gamma is None:
        gamma = find_dirichlet_eigs(psi, 0, ns=[n], route=route, grid=grid, threshold=None)[n]
    hp = hill_point(psi, complex(gamma).real if abs(complex(gamma).imag) == 0 else gamma,
                    route=route, grid=grid)
    return float(2 * np.pi * n * np.log(abs(hp.phi1p)))


def hill_spectrum(psi: CoefficientPair, n_max: int, route: str = "direct",
                  grid: int = GRID, samples: int = 64,
                  threshold: float | None = SMALLNESS) -> HillSpectrum:
    per = find_periodic_eigs(psi, n_max, route=route, grid=grid, samples=samples,
                             threshold=threshold)
    dir_ = find_dirichlet_eigs(psi, n_max, route=route, grid=grid, samples=samples,
                               threshold=threshold)
    g = {n: norming_constants_g(psi, n, dir_[n], route, grid) for n in dir_}
    return HillSpectrum(per, dir_, g)

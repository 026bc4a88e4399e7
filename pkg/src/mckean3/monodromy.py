"""Monodromy matrix, multipliers, discriminant and Floquet solutions.

Conventions
-----------
``Phi(1)`` is the state map: its columns are (phi_j, phi_j', phi_j^[2]) at
x = 1.  The monodromy matrix in the usual row convention is
M_jk = phi_j^[k-1](1), i.e. M = Phi(1)^T.  Both have the same spectrum.
Floquet initial vectors are right eigenvectors of the state map.

The multiplier cubic tau^3 - e1 tau^2 + e2 tau - e3 is built from

    e1 = tr Phi,   e3 = det Phi,   e2 = det Phi * tr Phi^{-1},

where Phi^{-1} is the product of exact inverses of the RK4 step matrices
and det Phi the product of step determinants.  Computing e2 from the
inverse rather than from ((tr M)^2 - tr M^2)/2 avoids a cancellation of
size |tau_3|^2 against the small multipliers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientPair
from .errors import AmbiguousBranch, NotSimple, VanishingEta
from .ode_core import (OMEGA, SpectralPoint, default_steps, prefix_products,
                       terminal_third_order, third_order_step_matrices)

TIE_TOL = 1e-9
MIN_ETA = 1e-6


# ---------------------------------------------------------------------------
# cubic helpers

def cubic_discriminant(e1, e2, e3):
    """Discriminant of t^3 - e1 t^2 + e2 t - e3, i.e. prod_{i<j} (t_i - t_j)^2."""
    return (e1 * e1 * e2 * e2 - 4.0 * e2 ** 3 - 4.0 * e1 ** 3 * e3
            + 18.0 * e1 * e2 * e3 - 27.0 * e3 * e3)


def _cubic_val(t, e1, e2, e3):
    return ((t - e1) * t + e2) * t - e3


def _cubic_der(t, e1, e2):
    return (3.0 * t - 2.0 * e1) * t + e2


def _polish(t, e1, e2, e3, n_iter=2):
    f = _cubic_val(t, e1, e2, e3)
    for _ in range(n_iter):
        d = _cubic_der(t, e1, e2)
        if d == 0:
            break
        tn = t - f / d
        fn = _cubic_val(tn, e1, e2, e3)
        if not abs(fn) < abs(f):
            break
        t, f = tn, fn
    return t


def cubic_roots(e1, e2, e3, polish: int = 2):
    """Roots of t^3 - e1 t^2 + e2 t - e3, sorted by increasing modulus.

    Cardano gives the largest-modulus root accurately; the other two come
    from the deflated quadratic with product e3/t and sum (e2 - e3/t)/t.
    Each root then gets a few guarded Newton steps on the cubic.
    """
    e1, e2, e3 = complex(e1), complex(e2), complex(e3)
    # depressed cubic s^3 + P s + Q with t = s + e1/3
    sh = e1 / 3.0
    P = e2 - e1 * e1 / 3.0
    Q = -2.0 * e1 ** 3 / 27.0 + e1 * e2 / 3.0 - e3
    disc = np.sqrt(complex(Q * Q / 4.0 + P ** 3 / 27.0))
    u3 = -Q / 2.0 + disc
    if abs(-Q / 2.0 - disc) > abs(u3):
        u3 = -Q / 2.0 - disc
    if u3 == 0:
        cands = [sh, sh, sh]
    else:
        u = u3 ** (1.0 / 3.0)
        cands = []
        for k in range(3):
            uk = u * OMEGA ** k
            cands.append(uk - P / (3.0 * uk) + sh)
    big = max(cands, key=abs)
    big = _polish(big, e1, e2, e3, 3)
    if big == 0:
        return np.array([0j, 0j, 0j])
    prod = e3 / big
    s = (e2 - prod) / big
    d = np.sqrt(complex(s * s - 4.0 * prod))
    a = (s + d) / 2.0 if abs(s + d) >= abs(s - d) else (s - d) / 2.0
    b = prod / a if a != 0 else s - a
    roots = [_polish(r, e1, e2, e3, polish) for r in (a, b)] + [big]
    return np.array(sorted(roots, key=abs))


def symmetric_functions(term) -> tuple:
    """(e1, e2, e3) arrays from a TerminalData batch."""
    e1 = np.trace(term.Phi, axis1=-2, axis2=-1)
    e3 = term.det
    e2 = e3 * np.trace(term.Phi_inv, axis1=-2, axis2=-1)
    return e1, e2, e3


# ---------------------------------------------------------------------------

@dataclass
class MonodromyData:
    """Monodromy data at one spectral point.

    ``M`` is the row-convention monodromy matrix, ``state`` the state map
    Phi(1) = M^T and ``state_inv`` its inverse.
    """
    pt: SpectralPoint
    M: np.ndarray
    multipliers: np.ndarray
    rho: complex
    state: np.ndarray = field(repr=False, default=None)
    state_inv: np.ndarray = field(repr=False, default=None)
    det: complex = 1.0
    sym: tuple = (0j, 0j, 0j)
    steps: int = 0
    transpose: bool = False

    @property
    def lam(self):
        return self.pt.lam


def _steps_for(pt, steps):
    return default_steps(pt.z) if steps is None else int(steps)


def monodromy_matrix(psi: CoefficientPair, pt: SpectralPoint, steps: int | None = None,
                     transpose: bool = False) -> MonodromyData:
    """Monodromy matrix, multiplier triple and discriminant at ``pt``."""
    steps = _steps_for(pt, steps)
    term = terminal_third_order(psi, [pt.lam], steps, transpose=transpose)
    e1, e2, e3 = (complex(v[0]) for v in symmetric_functions(term))
    taus = cubic_roots(e1, e2, e3)
    Phi = term.Phi[0]
    return MonodromyData(pt, Phi.T.copy(), taus, complex(cubic_discriminant(e1, e2, e3)),
                         Phi, term.Phi_inv[0], complex(term.det[0]), (e1, e2, e3), steps,
                         transpose)


def rho_batch(psi: CoefficientPair, lams, steps: int, transpose: bool = False):
    """Discriminant of the multiplier cubic for an array of lam."""
    term = terminal_third_order(psi, lams, steps, transpose=transpose)
    return cubic_discriminant(*symmetric_functions(term))


def discriminant_rho(psi: CoefficientPair, pt: SpectralPoint, steps: int | None = None) -> complex:
    """rho(lam) = prod_{i<j} (tau_i - tau_j)^2 from the symmetric functions."""
    return complex(rho_batch(psi, [pt.lam], _steps_for(pt, steps))[0])


def rho_unperturbed(z):
    """rho for psi = 0 in terms of any cube root z of lam.

    The squared-difference product of e^z, e^{wz}, e^{w^2 z} equals
    -64 sin^2(s z) sin^2(s w z) sin^2(s w^2 z), s = sqrt(3)/2.
    """
    s = math.sqrt(3.0) / 2.0
    z = np.asarray(z, dtype=complex)
    return -64.0 * (np.sin(s * z) * np.sin(s * OMEGA * z) * np.sin(s * OMEGA ** 2 * z)) ** 2


def select_tau3(data: MonodromyData):
    """Multiplier closest to e^z on the log scale.

    Returns (tau3, index into data.multipliers).  The distance used is
    |log(tau e^{-z})|, which equals |Log tau - z| away from the branch cut
    of the principal logarithm.  For real lam > 1 the result is real.
    """
    z = data.pt.z
    taus = data.multipliers
    with np.errstate(divide="ignore"):
        dist = np.array([abs(np.log(t * np.exp(-z))) if t != 0 else np.inf for t in taus])
    order = np.argsort(dist)
    if dist[order[1]] - dist[order[0]] < TIE_TOL:
        raise AmbiguousBranch(f"tau3 selection tie at lam={data.pt.lam}")
    i = int(order[0])
    tau = complex(taus[i])
    lam = data.pt.lam
    if lam.imag == 0 and lam.real > 1 and abs(tau.imag) <= 1e-8 * abs(tau):
        tau = complex(tau.real, 0.0)
    return tau, i


# ---------------------------------------------------------------------------
# Floquet solutions

@dataclass
class FloquetData:
    pt: SpectralPoint
    tau: complex
    x_grid: np.ndarray
    eta: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    min_abs_eta: float
    v0: np.ndarray = field(repr=False, default=None)


def _null_vector(A):
    _, _, vh = np.linalg.svd(A)
    return vh[-1].conj()


def floquet_initial_vector(data: MonodromyData, tau: complex) -> np.ndarray:
    """Right eigenvector of the state map for ``tau``, scaled to v[0] = 1."""
    taus = data.multipliers
    e1, e2, e3 = data.sym
    scale = max(1.0, abs(tau))
    size = max(abs(tau) ** 3, abs(e1 * tau * tau), abs(e2 * tau), abs(e3))
    if abs(_cubic_val(tau, e1, e2, e3)) > 1e-9 * size:
        raise NotSimple(f"tau={tau} is not a multiplier at lam={data.pt.lam}")
    # the computed multiplier matching tau is dropped; the other two must be away
    others = np.delete(taus, int(np.argmin(np.abs(taus - tau))))
    if min(abs(t - tau) for t in others) < 1e-6 * scale:
        raise NotSimple(f"multiplier {tau} is not simple at lam={data.pt.lam}")
    if abs(tau) >= 1:
        v = _null_vector(data.state - tau * np.eye(3))
    else:
        v = _null_vector(data.state_inv - np.eye(3) / tau)
    if abs(v[0]) < 1e-12 * np.linalg.norm(v):
        raise VanishingEta("Floquet solution vanishes at x=0")
    return v / v[0]


def floquet_solution(psi: CoefficientPair, pt: SpectralPoint, tau: complex | None = None,
                     steps: int | None = None, data: MonodromyData | None = None,
                     check: bool = True) -> FloquetData:
    """Floquet solution eta(x+1) = tau eta(x) with eta(0) = 1 on [0, 1].

    ``tau`` defaults to tau_3.  The trajectory is Phi(x) v with v the
    eigenvector of the state map, so eta, eta' and eta^[2] come straight
    from the fundamental matrix.
    """
    steps = _steps_for(pt, steps)
    if data is None:
        data = monodromy_matrix(psi, pt, steps)
    if tau is None:
        tau, _ = select_tau3(data)
    v = floquet_initial_vector(data, tau)
    P = third_order_step_matrices(psi, [pt.lam], steps)[0]
    Y = np.empty((steps + 1, 3), dtype=complex)
    Y[0] = v
    Y[1:] = prefix_products(P) @ v
    eta = Y[:, 0]
    m = float(np.min(np.abs(eta)))
    fd = FloquetData(pt, complex(tau), np.linspace(0.0, 1.0, steps + 1), eta.copy(),
                     Y[:, 1].copy(), Y[:, 2].copy(), m, v)
    if check and m < MIN_ETA:
        raise VanishingEta(f"min|eta| = {m:.3e} at lam={pt.lam}")
    return fd

"""McKean's transformation to an energy-dependent Hill potential.

With eta the Floquet solution of multiplier tau_3 at lam(E),

    V(x, E) = E - p/2 - (3/2) eta^[2]/eta + (3/4) (eta'/eta)^2.

Writing xi = eta'/eta - z this is V = E - 2p - (3/2) xi' - (3/4)(xi + z)^2,
and xi solves

    (xi' + p)' + 3z(xi' + p) + 3z^2 xi + 3 xi (xi' + p) + 3z xi^2 + xi^3
        - p xi - z p + q = 0.

The second route never integrates the ODE.  In the variables
X = U^{-1} (xi, xi' + p) the equation becomes

    X' = i sqrt3 z diag(w, -w^2) X + W + K[X] (1, -1),
    W = (i/sqrt3) (p (w, -w^2) - (q/z) (1, -1)),
    K[X] = (i p/(sqrt3 z)) S + 3 S (w X1 - w^2 X2) - i sqrt3 S^2 - (i/(sqrt3 z)) S^3,
    S = X1 + X2,

and the periodic solution is the fixed point of X = R[W + K[X](1, -1)],
with R the periodic resolvent of the diagonal part.  R is applied in
Fourier space: for Y' = a Y + f, Y_m = f_m / (2 pi i m - a).  The
potential is V = -p/2 - (3z/2)(w^2 X1 + w X2) - (3/4)(X1 + X2)^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientPair
from .errors import NonConvergent, SmallDenominator, VanishingEta
from .monodromy import MIN_ETA, FloquetData, floquet_solution
from .ode_core import OMEGA, SQRT3, SpectralPoint

GRID = 2048
SMALL_DENOM = 0.1


@dataclass
class XiData:
    pt: SpectralPoint
    x_grid: np.ndarray
    xi: np.ndarray
    xi1: np.ndarray        # xi' + p


@dataclass
class EnergyPotential:
    E: complex
    x_grid: np.ndarray
    V: np.ndarray
    route: str
    iterations: int = 0
    pt: SpectralPoint | None = None
    xi: np.ndarray | None = field(default=None, repr=False)
    xi1: np.ndarray | None = field(default=None, repr=False)
    X: np.ndarray | None = field(default=None, repr=False)
    formula_gap: float = 0.0       # direct route: max gap between the two V formulas
    last_change: float = 0.0       # fixed-point route: final sup-norm update

    @property
    def periodic_values(self) -> np.ndarray:
        """Samples at j/N, j = 0..N-1."""
        return self.V[:-1]


def xi_from_floquet(fd: FloquetData) -> XiData:
    """xi = eta'/eta - z and xi' + p = eta^[2]/eta - (eta'/eta)^2, pointwise."""
    if fd.min_abs_eta <= MIN_ETA:
        raise VanishingEta(f"min|eta| = {fd.min_abs_eta:.3e}", module="mckean")
    r1 = fd.eta1 / fd.eta
    r2 = fd.eta2 / fd.eta
    return XiData(fd.pt, fd.x_grid, r1 - fd.pt.z, r2 - r1 * r1)


def spectral_derivative(values: np.ndarray) -> np.ndarray:
    """Derivative of 1-periodic samples at j/N, j = 0..N-1."""
    N = values.shape[-1]
    k = np.fft.fftfreq(N, 1.0 / N)
    if N % 2 == 0:
        k[N // 2] = 0.0
    return np.fft.ifft(2j * np.pi * k * np.fft.fft(values))


def xi_equation_lhs(psi: CoefficientPair, pt: SpectralPoint, xi, xi1, x):
    """Left side of the xi-equation on periodic samples (x excludes 1)."""
    z = pt.z
    p = np.asarray(psi.p(x), dtype=complex)
    q = np.asarray(psi.q(x), dtype=complex)
    d = spectral_derivative(xi1)
    return (d + 3 * z * xi1 + 3 * z * z * xi + 3 * xi * xi1 + 3 * z * xi * xi + xi ** 3
            - p * xi - z * p + q)


def xi_residual(psi: CoefficientPair, pt: SpectralPoint, xd: XiData) -> float:
    """Sup norm of the xi-equation with (xi' + p)' taken spectrally."""
    x = xd.x_grid[:-1]
    return float(np.max(np.abs(xi_equation_lhs(psi, pt, xd.xi[:-1], xd.xi1[:-1], x))))


def _grid_steps(pt, grid):
    return max(grid, 64 * int(np.ceil(abs(pt.z))))


def potential_direct(psi: CoefficientPair, E, grid: int = GRID,
                     fd: FloquetData | None = None) -> EnergyPotential:
    """V(x, E) from the Floquet solution on the grid j/grid, j = 0..grid."""
    pt = SpectralPoint.from_energy(E)
    if fd is None:
        fd = floquet_solution(psi, pt, steps=_grid_steps(pt, grid))
    n = len(fd.x_grid) - 1
    if n % grid:
        raise ValueError("Floquet grid must be a multiple of the potential grid")
    s = slice(None, None, n // grid)
    x = fd.x_grid[s]
    eta, eta1, eta2 = fd.eta[s], fd.eta1[s], fd.eta2[s]
    p = np.asarray(psi.p(x), dtype=complex)
    r1 = eta1 / eta
    r2 = eta2 / eta
    V = pt.E - 0.5 * p - 1.5 * r2 + 0.75 * r1 * r1
    xi = r1 - pt.z
    xi1 = r2 - r1 * r1
    V_alt = pt.E - 2 * p - 1.5 * (xi1 - p) - 0.75 * (xi + pt.z) ** 2
    return EnergyPotential(pt.E, x, V, "direct", 0, pt, xi, xi1,
                           formula_gap=float(np.max(np.abs(V - V_alt))))


def small_denominator(z) -> complex:
    """4 sin(sqrt3 w z / 2) sin(sqrt3 w^2 z / 2)."""
    return complex(4 * np.sin(SQRT3 * OMEGA * z / 2) * np.sin(SQRT3 * OMEGA ** 2 * z / 2))


def x_from_xi(z, xi, xi1):
    """X = U^{-1} (xi, xi' + p)."""
    c = 1j / (SQRT3 * z)
    return np.stack([-OMEGA ** 2 * xi + c * xi1, -OMEGA * xi - c * xi1])


def xi_from_x(z, X):
    """(xi, xi' + p) = U X."""
    return X[0] + X[1], 1j * SQRT3 * z * (OMEGA * X[0] - OMEGA ** 2 * X[1])


def _kernel(p, z, X):
    S = X[0] + X[1]
    return (1j * p / (SQRT3 * z)) * S + 3 * S * (OMEGA * X[0] - OMEGA ** 2 * X[1]) \
        - 1j * SQRT3 * S * S - (1j / (SQRT3 * z)) * S ** 3


def potential_from_x(p, z, X):
    return -0.5 * p - 1.5 * z * (OMEGA ** 2 * X[0] + OMEGA * X[1]) - 0.75 * (X[0] + X[1]) ** 2


def potential_fixed_point(psi: CoefficientPair, E, max_iter: int = 50, tol: float = 1e-12,
                          grid: int = GRID) -> EnergyPotential:
    """V(x, E) from the fixed point X = G[X], without integrating any ODE."""
    pt = SpectralPoint.from_energy(E)
    z = pt.z
    if abs(small_denominator(z)) < SMALL_DENOM:
        raise SmallDenominator(f"|D(lam)| = {abs(small_denominator(z)):.3e} < {SMALL_DENOM}")
    x = np.arange(grid) / grid
    p = np.asarray(psi.p(x), dtype=complex)
    q = np.asarray(psi.q(x), dtype=complex)
    m = np.fft.fftfreq(grid, 1.0 / grid)
    a = np.array([1j * SQRT3 * z * OMEGA, -1j * SQRT3 * z * OMEGA ** 2])
    denom = 2j * np.pi * m[None, :] - a[:, None]

    def resolve(F):
        return np.fft.ifft(np.fft.fft(F, axis=1) / denom, axis=1)

    W = (1j / SQRT3) * np.stack([p * OMEGA - q / z, -p * OMEGA ** 2 + q / z])
    X = resolve(W)
    it = 0
    change = np.inf
    while it < max_iter:
        it += 1
        K = _kernel(p, z, X)
        Xn = resolve(W + np.stack([K, -K]))
        change = float(np.max(np.abs(Xn - X)))
        X = Xn
        if change < tol:
            break
    else:
        raise NonConvergent(f"fixed point did not converge in {max_iter} iterations "
                            f"(last change {change:.3e})", module="mckean")
    V = potential_from_x(p, z, X)
    xi, xi1 = xi_from_x(z, X)
    close = lambda v: np.append(v, v[..., :1], axis=-1)
    return EnergyPotential(pt.E, np.linspace(0.0, 1.0, grid + 1), close(V), "fixed_point", it,
                           pt, close(xi), close(xi1), X=close(X), last_change=change)


class SampledPotential:
    """Immutable periodic potential provider built from samples at j/N.

    Grid points are looked up directly; other x use the trigonometric
    interpolant.
    """

    def __init__(self, values):
        v = np.array(values, dtype=complex)
        v.setflags(write=False)
        self.values = v
        self.N = len(v)
        self._coef = np.fft.fft(v) / self.N
        self._k = np.fft.fftfreq(self.N, 1.0 / self.N)

    @classmethod
    def from_potential(cls, ep: EnergyPotential):
        return cls(ep.periodic_values)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = x * self.N
        idx = np.rint(t)
        if np.all(np.abs(t - idx) < 1e-9):
            return self.values[idx.astype(int) % self.N]
        k = self._k.copy()
        if self.N % 2 == 0:
            k[self.N // 2] = 0.0
        ph = np.exp(2j * np.pi * np.multiply.outer(x, k))
        return ph @ self._coef

"""Fixed-step RK4 propagation of the quasi-derivative systems.

The third-order equation (y'' + p y)' + p y' + q y = lam y is written for
the state (y, y', y^[2]), y^[2] = y'' + p y, as Y' = A Y with

    A = [[0, 1, 0], [-p, 0, 1], [lam - q, -p, 0]].

The transpose equation uses the same state with the (2, 0) entry q - lam.
Both matrices are traceless, so det Phi = 1 along exact trajectories.

Each RK4 step is linear in the state, so one step is a fixed 3x3 matrix
P_k.  All P_k are built at once with numpy, optionally for a batch of
spectral parameters, and then multiplied together: a pairwise tree when
only the endpoint is needed, a doubling scan when the whole trajectory is.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coefficients import CoefficientPair
from .errors import NonFinite

OMEGA = np.exp(2j * np.pi / 3)
SQRT3 = math.sqrt(3.0)

# elements per chunk of stacked step matrices, keeps memory near 100 MB
_CHUNK_ELEMS = 6_000_000


@dataclass(frozen=True)
class SpectralPoint:
    """A spectral parameter with its cube root and energy.

    z is the principal cube root of lam (arg z in (-pi/3, pi/3]) and
    E = 3 z^2 / 4, so lam = (4 E / 3)^{3/2} on the matching branch.
    """
    lam: complex
    z: complex
    E: complex

    @classmethod
    def from_lambda(cls, lam) -> "SpectralPoint":
        lam = complex(lam)
        if lam == 0:
            return cls(0j, 0j, 0j)
        r, a = abs(lam), np.angle(lam)
        z = r ** (1.0 / 3.0) * np.exp(1j * a / 3.0)
        if lam.imag == 0 and lam.real > 0:
            z = complex(r ** (1.0 / 3.0), 0.0)
        return cls(lam, complex(z), complex(0.75 * z * z))

    @classmethod
    def from_z(cls, z) -> "SpectralPoint":
        z = complex(z)
        a = np.angle(z) if z != 0 else 0.0
        if not (-np.pi / 3 - 1e-14 < a <= np.pi / 3 + 1e-14):
            raise ValueError(f"z={z} is not a principal cube root")
        return cls(complex(z ** 3), z, complex(0.75 * z * z))

    @classmethod
    def from_energy(cls, E) -> "SpectralPoint":
        E = complex(E)
        z = np.sqrt(4.0 * E / 3.0)
        if E.imag == 0 and E.real >= 0:
            z = complex(math.sqrt(4.0 * E.real / 3.0), 0.0)
        a = np.angle(z) if z != 0 else 0.0
        if not (-np.pi / 3 - 1e-14 < a <= np.pi / 3 + 1e-14):
            raise ValueError(f"E={E} maps outside the principal sector")
        return cls(complex(z ** 3), complex(z), E)


def default_steps(z, x_end: float = 1.0) -> int:
    """max(1024, 64 ceil|z|) steps per unit length."""
    per_unit = max(1024, 64 * int(math.ceil(abs(z))))
    return int(math.ceil(per_unit * x_end - 1e-9))


@dataclass
class Trajectory3:
    x_grid: np.ndarray
    Phi: np.ndarray          # (n+1, 3, 3); columns are (y, y', y^[2]) of phi_1..3
    lam: complex = 0j
    transpose: bool = False

    @property
    def end(self) -> np.ndarray:
        return self.Phi[-1]


@dataclass
class Trajectory2:
    x_grid: np.ndarray
    Psi: np.ndarray          # (n+1, 2, 2); columns (theta, theta'), (phi, phi')
    E: complex = 0j

    @property
    def end(self) -> np.ndarray:
        return self.Psi[-1]


# ---------------------------------------------------------------------------
# step matrices and products

def _rk4_steps(A0, Am, A1, h):
    """Per-step RK4 propagators for Y' = A Y from stage matrices."""
    d = A0.shape[-1]
    eye = np.eye(d)
    K1 = A0
    K2 = Am + (0.5 * h) * (Am @ K1)
    K3 = Am + (0.5 * h) * (Am @ K2)
    K4 = A1 + h * (A1 @ K3)
    return eye + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4)


def tree_product(P):
    """P[..., n-1] @ ... @ P[..., 0] by pairwise reduction over axis -3."""
    while P.shape[-3] > 1:
        n = P.shape[-3]
        m = n // 2
        paired = P[..., 1:2 * m:2, :, :] @ P[..., 0:2 * m:2, :, :]
        if n % 2:
            paired = np.concatenate([paired, P[..., -1:, :, :]], axis=-3)
        P = paired
    return P[..., 0, :, :]


def prefix_products(P):
    """S[k] = P[k] @ ... @ P[0] for every k (doubling scan)."""
    S = P.copy()
    n = S.shape[-3]
    d = 1
    while d < n:
        S[..., d:, :, :] = S[..., d:, :, :] @ S[..., :-d, :, :]
        d *= 2
    return S


def _stage_grid(x0, x_end, steps):
    h = (x_end - x0) / steps
    xs = x0 + 0.5 * h * np.arange(2 * steps + 1)
    return xs, h


def _third_order_stage_mats(p, q, lam, transpose):
    """Stage matrices of shape (L, 2n+1, 3, 3) for lam of shape (L,)."""
    L, m = lam.shape[0], p.shape[0]
    A = np.zeros((L, m, 3, 3), dtype=complex)
    A[..., 0, 1] = 1.0
    A[..., 1, 0] = -p
    A[..., 1, 2] = 1.0
    A[..., 2, 1] = -p
    if transpose:
        A[..., 2, 0] = q[None, :] - lam[:, None]
    else:
        A[..., 2, 0] = lam[:, None] - q[None, :]
    return A


def third_order_step_matrices(psi: CoefficientPair, lams, steps: int,
                              x_end: float = 1.0, transpose: bool = False,
                              x0: float = 0.0):
    """Step propagators P_k, shape (L, steps, 3, 3), for each lam."""
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    xs, h = _stage_grid(x0, x_end, steps)
    p = np.asarray(psi.p(xs), dtype=complex)
    q = np.asarray(psi.q(xs), dtype=complex)
    A = _third_order_stage_mats(p, q, lams, transpose)
    return _rk4_steps(A[:, 0:-1:2], A[:, 1::2], A[:, 2::2], h)


@dataclass
class TerminalData:
    """Endpoint data for a batch of spectral parameters."""
    Phi: np.ndarray              # (L, d, d)
    Phi_inv: np.ndarray | None   # (L, d, d), product of exact step inverses
    det: np.ndarray              # (L,), product of step determinants


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"non-finite values while propagating {what}; "
                        "increase steps or reduce |z|")


def terminal_third_order(psi: CoefficientPair, lams, steps: int,
                         x_end: float = 1.0, transpose: bool = False,
                         with_inverse: bool = True) -> TerminalData:
    """Phi(x_end) for a batch of lam, plus its inverse and determinant."""
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    chunk = max(1, _CHUNK_ELEMS // (9 * steps))
    Phis, invs, dets = [], [], []
    for i in range(0, lams.size, chunk):
        P = third_order_step_matrices(psi, lams[i:i + chunk], steps, x_end, transpose)
        _check_finite(P, "step matrices")
        Phis.append(tree_product(P))
        dets.append(np.prod(np.linalg.det(P), axis=-1))
        if with_inverse:
            Q = np.linalg.inv(P)
            invs.append(tree_product(Q[:, ::-1]))
    Phi = np.concatenate(Phis)
    _check_finite(Phi, "third-order system")
    inv = np.concatenate(invs) if with_inverse else None
    return TerminalData(Phi, inv, np.concatenate(dets))


def _trajectory3(psi, pt, x_end, steps, transpose):
    if steps is None:
        steps = default_steps(pt.z, x_end)
    if steps < 64:
        raise ValueError("steps must be at least 64")
    P = third_order_step_matrices(psi, [pt.lam], steps, x_end, transpose)[0]
    S = prefix_products(P)
    Phi = np.concatenate([np.eye(3, dtype=complex)[None], S])
    _check_finite(Phi, "third-order system")
    return Trajectory3(np.linspace(0.0, x_end, steps + 1), Phi, pt.lam, transpose)


def propagate_third_order(psi: CoefficientPair, pt: SpectralPoint,
                          x_end: float = 1.0, steps: int | None = None) -> Trajectory3:
    """Fundamental matrix of the direct system on [0, x_end] at every step."""
    return _trajectory3(psi, pt, x_end, steps, transpose=False)


def propagate_transpose(psi: CoefficientPair, pt: SpectralPoint,
                        x_end: float = 1.0, steps: int | None = None) -> Trajectory3:
    """Fundamental matrix of the transpose system -(y''+py)' - py' + qy = lam y."""
    return _trajectory3(psi, pt, x_end, steps, transpose=True)


# ---------------------------------------------------------------------------
# Schroedinger side

def schrodinger_step_matrices(V_stage, E, h):
    """Step propagators for (f, f')' = (f', (V - E) f).

    V_stage has shape (L, 2n+1) with values at the RK stage points, E has
    shape (L,).
    """
    V_stage = np.atleast_2d(np.asarray(V_stage, dtype=complex))
    E = np.atleast_1d(np.asarray(E, dtype=complex))
    A = np.zeros(V_stage.shape + (2, 2), dtype=complex)
    A[..., 0, 1] = 1.0
    A[..., 1, 0] = V_stage - E[:, None]
    return _rk4_steps(A[:, 0:-1:2], A[:, 1::2], A[:, 2::2], h)


def terminal_schrodinger(V_stage, E, x_end: float = 1.0):
    """Psi(x_end) for a batch; V_stage as in schrodinger_step_matrices."""
    V_stage = np.atleast_2d(np.asarray(V_stage, dtype=complex))
    steps = (V_stage.shape[1] - 1) // 2
    P = schrodinger_step_matrices(V_stage, E, x_end / steps)
    out = tree_product(P)
    _check_finite(out, "Schroedinger system")
    return out


def propagate_schrodinger(Vprov: Callable, E, x_end: float = 1.0,
                          steps: int | None = None) -> Trajectory2:
    """theta, phi of -f'' + V f = E f with theta(0)=phi'(0)=1, theta'(0)=phi(0)=0."""
    E = complex(E)
    if steps is None:
        steps = default_steps(np.sqrt(E), x_end)
    if steps < 64:
        raise ValueError("steps must be at least 64")
    xs, h = _stage_grid(0.0, x_end, steps)
    V = np.broadcast_to(np.asarray(Vprov(xs), dtype=complex), xs.shape)
    P = schrodinger_step_matrices(V[None], [E], h)[0]
    S = prefix_products(P)
    Psi = np.concatenate([np.eye(2, dtype=complex)[None], S])
    _check_finite(Psi, "Schroedinger system")
    return Trajectory2(np.linspace(0.0, x_end, steps + 1), Psi, E)

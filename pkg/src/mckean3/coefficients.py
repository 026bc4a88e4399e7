"""Periodic coefficient pairs psi = (p, q) as finite trigonometric series.

A series is ``constant + sum_n (cos_n cos 2 pi n x + sin_n sin 2 pi n x)``
with n starting at 1.  Derivatives are exact, which is the reason for the
restriction to trig polynomials.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * np.pi
MAX_MODES = 32


def _as_tuple(seq) -> tuple:
    return tuple(complex(c) if np.iscomplexobj(c) and np.imag(c) != 0 else float(np.real(c))
                 for c in seq)


@dataclass(frozen=True)
class TrigSeries:
    constant: complex | float = 0.0
    cos_coeffs: tuple = ()
    sin_coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cos_coeffs", _as_tuple(self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", _as_tuple(self.sin_coeffs))
        c = self.constant
        if np.iscomplexobj(c) and np.imag(c) != 0:
            object.__setattr__(self, "constant", complex(c))
        else:
            object.__setattr__(self, "constant", float(np.real(c)))

    @property
    def degree(self) -> int:
        return max(len(self.cos_coeffs), len(self.sin_coeffs))

    def _padded(self):
        d = self.degree
        a = np.zeros(d, dtype=complex)
        b = np.zeros(d, dtype=complex)
        a[:len(self.cos_coeffs)] = self.cos_coeffs
        b[:len(self.sin_coeffs)] = self.sin_coeffs
        return a, b

    def is_real(self) -> bool:
        a, b = self._padded()
        return (np.imag(self.constant) == 0 and not np.any(a.imag)
                and not np.any(b.imag))

    def is_zero(self) -> bool:
        a, b = self._padded()
        return self.constant == 0 and not np.any(a) and not np.any(b)

    def __call__(self, x):
        return eval_series(self, x)

    def derivative(self) -> "TrigSeries":
        a, b = self._padded()
        k = TWO_PI * np.arange(1, self.degree + 1)
        return TrigSeries(0.0, k * b, -k * a)

    def scaled(self, c) -> "TrigSeries":
        return TrigSeries(c * self.constant, [c * v for v in self.cos_coeffs],
                          [c * v for v in self.sin_coeffs])

    def reflected(self) -> "TrigSeries":
        # x -> 1 - x keeps cosines and flips sines
        return TrigSeries(self.constant, self.cos_coeffs, [-v for v in self.sin_coeffs])

    def translated(self, t: float) -> "TrigSeries":
        # coefficients of x -> s(x + t)
        a, b = self._padded()
        ang = TWO_PI * np.arange(1, self.degree + 1) * t
        c, s = np.cos(ang), np.sin(ang)
        return TrigSeries(self.constant, a * c + b * s, b * c - a * s)

    def l2_norm_sq(self) -> float:
        a, b = self._padded()
        return float(abs(self.constant) ** 2
                     + 0.5 * (np.sum(np.abs(a) ** 2) + np.sum(np.abs(b) ** 2)))

    def fourier(self, n_modes: int) -> np.ndarray:
        """Complex exponential coefficients c_k, k = -n_modes..n_modes."""
        a, b = self._padded()
        out = np.zeros(2 * n_modes + 1, dtype=complex)
        out[n_modes] = self.constant
        for k in range(1, min(self.degree, n_modes) + 1):
            out[n_modes + k] = 0.5 * (a[k - 1] - 1j * b[k - 1])
            out[n_modes - k] = 0.5 * (a[k - 1] + 1j * b[k - 1])
        return out

    def to_dict(self) -> dict:
        def enc(v):
            v = complex(v)
            return v.real if v.imag == 0 else [v.real, v.imag]
        return {"constant": enc(self.constant),
                "cos": [enc(v) for v in self.cos_coeffs],
                "sin": [enc(v) for v in self.sin_coeffs]}

    @classmethod
    def from_dict(cls, d: dict | None, max_modes: int = MAX_MODES) -> "TrigSeries":
        if d is None:
            return cls()
        unknown = set(d) - {"constant", "cos", "sin"}
        if unknown:
            raise ValueError(f"unknown series keys: {sorted(unknown)}")

        def dec(v):
            if isinstance(v, (list, tuple)):
                if len(v) != 2:
                    raise ValueError("complex coefficients are written [re, im]")
                return complex(v[0], v[1])
            return v

        cos = [dec(v) for v in d.get("cos", [])]
        sin = [dec(v) for v in d.get("sin", [])]
        if max(len(cos), len(sin)) > max_modes:
            raise ValueError(f"series has more than {max_modes} modes")
        return cls(dec(d.get("constant", 0.0)), cos, sin)


def eval_series(s: TrigSeries, x):
    """Evaluate a trig series at scalar or array x."""
    x = np.asarray(x, dtype=float)
    a, b = s._padded()
    out = np.full(x.shape, s.constant, dtype=complex)
    if s.degree:
        ang = TWO_PI * np.multiply.outer(x, np.arange(1, s.degree + 1))
        out = out + np.cos(ang) @ a + np.sin(ang) @ b
    if s.is_real():
        out = out.real
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class CoefficientPair:
    p: TrigSeries = field(default_factory=TrigSeries)
    q: TrigSeries = field(default_factory=TrigSeries)

    def is_real(self) -> bool:
        return self.p.is_real() and self.q.is_real()

    def is_zero(self) -> bool:
        return self.p.is_zero() and self.q.is_zero()

    @property
    def degree(self) -> int:
        return max(self.p.degree, self.q.degree)

    def star(self) -> "CoefficientPair":
        return CoefficientPair(self.p, self.q.scaled(-1.0))

    def reflect(self) -> "CoefficientPair":
        return CoefficientPair(self.p.reflected(), self.q.reflected())

    def translate(self, t: float) -> "CoefficientPair":
        return CoefficientPair(self.p.translated(t), self.q.translated(t))

    def to_dict(self) -> dict:
        return {"p": self.p.to_dict(), "q": self.q.to_dict()}

    @classmethod
    def from_dict(cls, d: dict, max_modes: int = MAX_MODES) -> "CoefficientPair":
        unknown = set(d) - {"p", "q"}
        if unknown:
            raise ValueError(f"unknown coefficient keys: {sorted(unknown)}")
        return cls(TrigSeries.from_dict(d.get("p"), max_modes),
                   TrigSeries.from_dict(d.get("q"), max_modes))

    def describe(self) -> str:
        def one(s, name):
            parts = []
            if s.constant != 0:
                parts.append(f"{s.constant:g}")
            for k, c in enumerate(s.cos_coeffs, 1):
                if c != 0:
                    parts.append(f"{c:g}*cos(2pi*{k}x)")
            for k, c in enumerate(s.sin_coeffs, 1):
                if c != 0:
                    parts.append(f"{c:g}*sin(2pi*{k}x)")
            return f"{name}=" + (" + ".join(parts) if parts else "0")
        return one(self.p, "p") + ", " + one(self.q, "q")


def make_pair(p_const=0.0, p_cos: Sequence = (), p_sin: Sequence = (),
              q_const=0.0, q_cos: Sequence = (), q_sin: Sequence = ()) -> CoefficientPair:
    """Shorthand constructor used by tests and demos."""
    return CoefficientPair(TrigSeries(p_const, p_cos, p_sin),
                           TrigSeries(q_const, q_cos, q_sin))


def symmetry_transform(psi: CoefficientPair, kind) -> CoefficientPair:
    """Apply one of the coefficient symmetries.

    ``kind`` is ``"star"`` for (p, -q), ``"reflect"`` for x -> 1 - x,
    ``"star_reflect"`` for both, or ``("translate", t)`` for psi(. + t).
    """
    if kind == "star":
        return psi.star()
    if kind == "reflect":
        return psi.reflect()
    if kind == "star_reflect":
        return psi.star().reflect()
    if isinstance(kind, tuple) and len(kind) == 2 and kind[0] == "translate":
        return psi.translate(float(kind[1]))
    raise ValueError(f"unknown transform {kind!r}")


def norm_h1(psi: CoefficientPair) -> float:
    """sqrt(|p|^2 + |p'|^2 + |q|^2) with L2 norms on the circle, via Parseval."""
    return float(np.sqrt(psi.p.l2_norm_sq() + psi.p.derivative().l2_norm_sq()
                         + psi.q.l2_norm_sq()))

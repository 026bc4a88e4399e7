"""Zero counting and zero refinement for analytic functions on disks.

Functions are passed as batch callables ``f(w_array) -> complex array`` in
a local chart w.  Counting uses the argument principle with adaptive
subdivision.  Initial zero estimates come from the contour moments
sum_k (w_k - c)^m, with the log-derivative taken spectrally from the
uniform base samples.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import NonConvergent, ZeroOnContour

MAX_POINTS = 2 ** 14
DIP_TOL = 1e-8


class CircleSamples:
    """Uniform samples of f on |w - c| = r plus the adaptive winding count."""

    def __init__(self, f, center, radius, samples=64, module="ramifications"):
        self.center = complex(center)
        self.radius = float(radius)
        th = 2 * np.pi * np.arange(samples) / samples
        self.theta = th
        self.w = self.center + self.radius * np.exp(1j * th)
        self.values = np.asarray(f(self.w), dtype=complex)
        self._f = f
        self.module = module
        self.count = self._winding()

    def _winding(self):
        th = np.append(self.theta, 2 * np.pi)
        vals = np.append(self.values, self.values[0])
        scale = np.max(np.abs(vals))
        if not np.isfinite(scale) or scale == 0:
            raise ZeroOnContour("function vanishes identically on the contour", self.module)
        total = 0.0
        n_pts = len(th)
        # walk segment by segment, subdividing where the phase jumps too much
        stack = [(th[i], vals[i], th[i + 1], vals[i + 1]) for i in range(len(th) - 1)][::-1]
        while stack:
            t0, v0, t1, v1 = stack.pop()
            if min(abs(v0), abs(v1)) < DIP_TOL * scale:
                raise ZeroOnContour(f"|f| dips to {min(abs(v0), abs(v1)):.2e} on the contour",
                                    self.module)
            d = np.angle(v1 / v0)
            if abs(d) <= np.pi / 2:
                total += d
                continue
            if n_pts >= MAX_POINTS:
                raise NonConvergent("contour subdivision exceeded 2^14 points", self.module)
            tm = 0.5 * (t0 + t1)
            vm = complex(np.asarray(self._f(np.array([self.center + self.radius * np.exp(1j * tm)])))[0])
            n_pts += 1
            stack.append((tm, vm, t1, v1))
            stack.append((t0, v0, tm, vm))
        self.n_points = n_pts
        return int(round(total / (2 * np.pi)))

    def moments(self, kmax):
        """Power sums s_m = sum over zeros of (w - c)^m, m = 0..kmax."""
        N = len(self.values)
        F = np.fft.fft(self.values)
        k = np.fft.fftfreq(N, 1.0 / N)
        if N % 2 == 0:
            k[N // 2] = 0.0
        dfdth = np.fft.ifft(1j * k * F)
        logd = dfdth / self.values
        u = self.w - self.center
        return np.array([np.mean(u ** m * logd) / 1j for m in range(kmax + 1)])

    def zero_estimates(self, count=None):
        """Zeros implied by the first ``count`` moments (Newton identities)."""
        count = self.count if count is None else count
        if count <= 0:
            return np.array([], dtype=complex)
        s = self.moments(count)
        # elementary symmetric functions from power sums
        e = [1.0 + 0j]
        for m in range(1, count + 1):
            acc = 0j
            for i in range(1, m + 1):
                acc += (-1) ** (i - 1) * e[m - i] * s[i]
            e.append(acc / m)
        coeffs = [(-1) ** m * e[m] for m in range(count + 1)]
        return np.roots(coeffs) + self.center


def count_zeros_on_circle(f, center, radius, samples=64, module="ramifications") -> int:
    return CircleSamples(f, center, radius, samples, module).count


# ---------------------------------------------------------------------------
# refinement

def newton_refine(f1, w0, step=None, tol=1e-14, max_iter=40):
    """Newton with a central-difference derivative on a scalar function."""
    w = complex(w0)
    fw = f1(w)
    for _ in range(max_iter):
        h = step if step is not None else 1e-5 * (1 + abs(w))
        d = (f1(w + h) - f1(w - h)) / (2 * h)
        if d == 0 or not np.isfinite(d):
            break
        dw = fw / d
        wn = w - dw
        fn = f1(wn)
        if abs(fn) > abs(fw) and abs(dw) > tol * (1 + abs(w)):
            # damped step
            wn = w - 0.5 * dw
            fn = f1(wn)
            if abs(fn) > abs(fw):
                break
        w, fw = wn, fn
        if abs(dw) < tol * (1 + abs(w)):
            break
    return w


def quadratic_pair(f1, center, h, n_iter=8):
    """Two close zeros from repeated local quadratic fits around ``center``."""
    c = complex(center)
    roots = np.array([c, c])
    for _ in range(n_iter):
        fm, f0, fp = f1(c - h), f1(c), f1(c + h)
        a = (fp - 2 * f0 + fm) / (2 * h * h)
        b = (fp - fm) / (2 * h)
        if a == 0:
            break
        disc = np.sqrt(complex(b * b - 4 * a * f0))
        roots = c + np.array([(-b - disc) / (2 * a), (-b + disc) / (2 * a)])
        cn = roots.mean()
        hn = max(abs(roots[1] - roots[0]), 1e-6 * (1 + abs(cn)))
        if abs(cn - c) < 1e-15 * (1 + abs(c)) and abs(hn - h) < 0.1 * h:
            c, h = cn, hn
            break
        c, h = cn, hn
    return roots


def refine_pair(f1, estimates, merge=1e-3):
    """Refine two zeros of f1 from moment estimates.

    Well-separated estimates get independent Newton runs.  Close ones are
    treated with a local quadratic model, since Newton stalls on a
    near-double zero.
    """
    w1, w2 = (complex(v) for v in estimates)
    if abs(w1 - w2) > merge * (1 + abs(w1)):
        a, b = newton_refine(f1, w1), newton_refine(f1, w2)
        if abs(a - b) > 1e-9 * (1 + abs(a)):
            return np.array([a, b])
    h = max(abs(w1 - w2), 1e-4 * (1 + abs(w1)))
    return quadratic_pair(f1, 0.5 * (w1 + w2), h)


def real_pair(fr, a, b, xatol=1e-13, complex_floor=1e-10):
    """Two zeros of a real function with a single interior minimum on (a, b).

    ``fr`` is positive at both ends.  If its minimum is negative, the zeros
    are bracketed on either side of it.  Otherwise the pair is double up
    to noise (reported as two equal real values) or, if the minimum is
    clearly positive, a complex conjugate pair estimated from the local
    curvature.  Returns (w_minus, w_plus, kind) with kind in
    {"simple_pair", "double", "complex_pair"}.
    """
    res = minimize_scalar(fr, bounds=(a, b), method="bounded",
                          options={"xatol": xatol, "maxiter": 500})
    wm, fm = float(res.x), float(res.fun)
    if fm < 0:
        lo = brentq(fr, a, wm, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        hi = brentq(fr, wm, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return complex(lo), complex(hi), "simple_pair"
    if fm <= complex_floor:
        return complex(wm), complex(wm), "double"
    h = 1e-3
    curv = (fr(wm + h) - 2 * fm + fr(wm - h)) / (h * h)
    d = np.sqrt(2 * fm / curv) if curv > 0 else 0.0
    return complex(wm, -d), complex(wm, d), "complex_pair"


def real_single(fr, a, b):
    """One sign change of a real function on (a, b)."""
    return complex(brentq(fr, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))

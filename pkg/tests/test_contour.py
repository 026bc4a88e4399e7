import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mckean3 import contour
from mckean3.errors import NonConvergent, ZeroOnContour


def _batch(fn):
    return lambda w: fn(np.asarray(w, dtype=complex))


@settings(max_examples=60, deadline=None)
@given(st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False))
def test_linear_count(c):
    r = abs(c)
    if abs(r - 1.0) < 1e-3:
        return
    got = contour.count_zeros_on_circle(_batch(lambda w: w - c), 0.0, 1.0)
    assert got == (1 if r < 1 else 0)


def test_polynomial_count_and_estimates():
    zs = np.array([0.3 + 0.1j, -0.2 - 0.4j, 0.5j, 1.7])
    f = _batch(lambda w: np.prod([w - z for z in zs], axis=0) * np.exp(w))
    cs = contour.CircleSamples(f, 0.0, 1.0, 128)
    assert cs.count == 3
    est = cs.zero_estimates()
    for z in zs[:3]:
        assert np.min(np.abs(est - z)) < 1e-10


def test_count_stable_under_sample_doubling():
    # zeros 0, 0.2 and +-pi/3 lie inside |w - 0.1| < 1.2
    f = _batch(lambda w: np.sin(3 * w) * (w - 0.2))
    counts = {contour.count_zeros_on_circle(f, 0.1, 1.2, s) for s in (32, 64, 128)}
    assert counts == {4}


def test_zero_on_contour():
    with pytest.raises(ZeroOnContour):
        contour.count_zeros_on_circle(_batch(lambda w: w - 1.0), 0.0, 1.0, 64)
    with pytest.raises(ZeroOnContour):
        contour.count_zeros_on_circle(_batch(lambda w: 0 * w), 0.0, 1.0)


def test_subdivision_limit(monkeypatch):
    f = _batch(lambda w: w ** 20)
    assert contour.count_zeros_on_circle(f, 0.0, 1.0, 64) == 20
    monkeypatch.setattr(contour, "MAX_POINTS", 70)
    with pytest.raises(NonConvergent):
        contour.count_zeros_on_circle(f, 0.0, 1.0, 64)


def test_newton_refine():
    f1 = lambda w: complex(w ** 3 - 2.0)
    w = contour.newton_refine(f1, 1.2 + 0.1j)
    assert abs(w - 2 ** (1 / 3)) < 1e-13


def test_refine_pair_close_zeros():
    a, b = 1.0, 1.0 + 1e-5
    f1 = lambda w: complex((w - a) * (w - b))
    got = np.sort_complex(contour.refine_pair(f1, [1.000003, 1.000004]))
    assert abs(got[0] - a) < 1e-9 and abs(got[1] - b) < 1e-9


def test_real_pair_kinds():
    lo, hi, kind = contour.real_pair(lambda x: (x - 0.3) * (x - 0.5), 0.0, 1.0)
    assert kind == "simple_pair"
    assert abs(lo - 0.3) < 1e-13 and abs(hi - 0.5) < 1e-13
    lo, hi, kind = contour.real_pair(lambda x: (x - 0.4) ** 2, 0.0, 1.0)
    assert kind == "double" and abs(lo - 0.4) < 1e-5
    lo, hi, kind = contour.real_pair(lambda x: (x - 0.4) ** 2 + 1e-4, 0.0, 1.0)
    assert kind == "complex_pair"
    assert abs(lo - (0.4 - 0.01j)) < 1e-6 and hi == lo.conjugate()


def test_real_single():
    assert abs(contour.real_single(np.cos, 1.0, 2.0) - np.pi / 2) < 1e-14

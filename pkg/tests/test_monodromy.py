import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mckean3.errors import AmbiguousBranch, NotSimple
from mckean3.monodromy import (MonodromyData, cubic_discriminant, cubic_roots, discriminant_rho,
                               floquet_solution, monodromy_matrix, rho_unperturbed, select_tau3)
from mckean3.ode_core import OMEGA, SpectralPoint

from conftest import PSI_CONST, PSI_P, PSI_PQ, PSI_ZERO, S, const_roots, mu0, rel

cplx = st.complex_numbers(min_magnitude=0.05, max_magnitude=50, allow_nan=False,
                          allow_infinity=False)


def _sym(t):
    t1, t2, t3 = t
    return t1 + t2 + t3, t1 * t2 + t1 * t3 + t2 * t3, t1 * t2 * t3


def _prod_disc(t):
    t1, t2, t3 = t
    return ((t1 - t2) * (t1 - t3) * (t2 - t3)) ** 2


@settings(max_examples=200)
@given(cplx, cplx, cplx)
def test_cubic_roots_recover_triple(a, b, c):
    t = [a, b, c]
    sep = min(abs(a - b), abs(a - c), abs(b - c))
    scale = max(abs(a), abs(b), abs(c))
    roots = cubic_roots(*_sym(t))
    # a root's error grows like scale / separation; a double root is only
    # determined to about eps^(1/2), a triple root to eps^(1/3)
    spread = max(abs(a - b), abs(a - c), abs(b - c))
    if sep > 1e-3 * scale:
        tol = 1e-10 * (1 + scale / sep)
    else:
        tol = 1e-6 if spread > 1e-3 * scale else 3e-5
    for x in t:
        assert min(abs(roots - x)) <= tol * scale


@settings(max_examples=200)
@given(cplx, cplx, cplx)
def test_discriminant_is_permutation_invariant_product(a, b, c):
    d = cubic_discriminant(*_sym([a, b, c]))
    ref = _prod_disc([a, b, c])
    scale = max(abs(a), abs(b), abs(c)) ** 6
    assert abs(d - ref) <= 1e-12 * scale
    assert cubic_discriminant(*_sym([c, a, b])) == pytest.approx(d, rel=1e-12, abs=1e-12 * scale)


def test_cubic_roots_triple_point():
    r = cubic_roots(3.0, 3.0, 1.0)
    assert np.max(np.abs(r - 1)) < 1e-5


@pytest.mark.parametrize("z", [0.5, 2.0, 3.0 + 1.0j, 7.0 * np.exp(0.9j), 10.0, 15.0 - 5.0j])
def test_free_multipliers(z):
    pt = SpectralPoint.from_z(z)
    md = monodromy_matrix(PSI_ZERO, pt)
    want = np.exp(np.array([1, OMEGA, OMEGA ** 2]) * pt.z)
    for w in want:
        assert np.min(np.abs(md.multipliers - w)) <= 1e-8 * max(1, abs(w))
    assert abs(np.prod(md.multipliers) - md.det) < 1e-8
    assert abs(md.det - 1) < 1e-8


def test_rho_product_form_away_from_ramifications():
    for z in (2.0 + 0.5j, 6.0, 9.0 - 2.0j):
        md = monodromy_matrix(PSI_PQ, SpectralPoint.from_z(z))
        assert rel(md.rho, _prod_disc(md.multipliers)) < 1e-7


def test_rho_unperturbed_at_one():
    z = 1.0
    got = discriminant_rho(PSI_ZERO, SpectralPoint.from_z(z))
    closed = -64 * (np.sin(S * z) * np.sin(S * OMEGA * z) * np.sin(S * OMEGA ** 2 * z)) ** 2
    assert rel(got, closed) < 1e-8
    assert rel(got, rho_unperturbed(z)) < 1e-8


@pytest.mark.parametrize("lam", [mu0(1), -mu0(1)])
def test_rho_vanishes_at_unperturbed_ramification(lam):
    pt = SpectralPoint.from_lambda(lam)
    zz = math.copysign(abs(pt.z), lam)   # the real cube root carries the vanishing factor
    scale = 64 * abs(np.sin(S * OMEGA * zz) * np.sin(S * OMEGA ** 2 * zz)) ** 2
    assert abs(discriminant_rho(PSI_ZERO, pt)) < 1e-6 * scale


def test_rho_vanishes_at_constant_coefficient_branch_point():
    r0 = 4 / 3 * math.sqrt(2 / 3) * 0.1 ** 1.5
    assert r0 == pytest.approx(0.0344266, abs=1e-7)
    near = abs(discriminant_rho(PSI_CONST, SpectralPoint.from_lambda(2 * r0)))
    assert abs(discriminant_rho(PSI_CONST, SpectralPoint.from_lambda(r0))) < 1e-8 * near


def test_real_coefficients_give_real_data():
    md = monodromy_matrix(PSI_P, SpectralPoint.from_lambda(30.0))
    assert np.max(np.abs(md.M.imag)) < 1e-10
    assert abs(md.rho.imag) < 1e-10 * max(1, abs(md.rho))


def test_transpose_multipliers_are_inverses():
    for z in (2.0 + 1.0j, 5.0):
        pt = SpectralPoint.from_z(z)
        a = monodromy_matrix(PSI_PQ, pt).multipliers
        b = monodromy_matrix(PSI_PQ, pt, transpose=True).multipliers
        for t in a:
            assert np.min(np.abs(b - 1 / t)) <= 1e-7 * abs(1 / t)


def test_select_tau3_examples():
    tau, _ = select_tau3(monodromy_matrix(PSI_ZERO, SpectralPoint.from_z(2.0)))
    assert tau == pytest.approx(math.exp(2.0), rel=1e-12)
    assert math.exp(2.0) == pytest.approx(7.389056, abs=1e-6)
    tau, _ = select_tau3(monodromy_matrix(PSI_CONST, SpectralPoint.from_lambda(5.0)))
    k3 = max(const_roots(-0.1, 5.0), key=lambda k: k.real)
    assert tau.imag == 0 and tau.real > 0
    assert tau == pytest.approx(np.exp(k3.real), rel=1e-10)


def test_select_tau3_continuous_on_disk_boundary():
    c = 2 * np.pi / math.sqrt(3.0)
    ws = c + np.exp(2j * np.pi * np.arange(256) / 256)
    ratios = []
    for w in ws:
        # the boundary of D_1 in the principal chart
        pt = SpectralPoint.from_z(w)
        tau, _ = select_tau3(monodromy_matrix(PSI_ZERO, pt, steps=1024))
        ratios.append(tau * np.exp(-pt.z))
    ratios = np.array(ratios)
    assert np.max(np.abs(ratios - 1)) < 1e-8


def test_select_tau3_tie_refuses():
    pt = SpectralPoint.from_z(1.0)
    taus = np.array([np.exp(1.0 + 0.1j), np.exp(1.0 - 0.1j), 0.1])
    md = MonodromyData(pt, np.eye(3), taus, 0j)
    with pytest.raises(AmbiguousBranch):
        select_tau3(md)


def test_floquet_free():
    pt = SpectralPoint.from_z(1.0)
    fd = floquet_solution(PSI_ZERO, pt, math.e)
    assert np.max(np.abs(fd.eta - np.exp(fd.x_grid))) < 1e-12
    assert fd.min_abs_eta == pytest.approx(1.0)
    assert np.max(np.abs(fd.eta2 / fd.eta - 1)) < 1e-12


def test_floquet_constant_coefficient():
    lam = 5.0
    fd = floquet_solution(PSI_CONST, SpectralPoint.from_lambda(lam))
    k3 = max(const_roots(-0.1, lam), key=lambda k: k.real).real
    assert np.max(np.abs(fd.eta - np.exp(k3 * fd.x_grid))) < 1e-10
    assert fd.eta[-1] == pytest.approx(fd.tau, rel=1e-12)


@pytest.mark.parametrize("lam", [9.0, 30.0 + 10.0j, 200.0])
def test_floquet_invariants(lam):
    fd = floquet_solution(PSI_PQ, SpectralPoint.from_lambda(lam))
    assert fd.eta[0] == 1
    start = np.array([1.0, fd.eta1[0], fd.eta2[0]])
    end = np.array([fd.eta[-1], fd.eta1[-1], fd.eta2[-1]])
    assert np.max(np.abs(end - fd.tau * start)) <= 1e-7 * np.max(np.abs(end))
    assert fd.min_abs_eta == pytest.approx(np.min(np.abs(fd.eta)))


def test_floquet_refuses_double_multiplier():
    pt = SpectralPoint.from_lambda(mu0(1))
    md = monodromy_matrix(PSI_ZERO, pt)
    double = np.exp(OMEGA * pt.z)
    with pytest.raises(NotSimple):
        floquet_solution(PSI_ZERO, pt, double, data=md)
    with pytest.raises(NotSimple):
        floquet_solution(PSI_ZERO, pt, 3.0, data=md)

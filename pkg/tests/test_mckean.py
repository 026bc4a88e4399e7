import dataclasses

import numpy as np
import pytest

from mckean3.coefficients import make_pair
from mckean3.errors import NonConvergent, SmallDenominator, VanishingEta
from mckean3.mckean import (SampledPotential, potential_direct, potential_fixed_point,
                            small_denominator, spectral_derivative, x_from_xi, xi_from_floquet,
                            xi_from_x, xi_residual)
from mckean3.monodromy import floquet_solution
from mckean3.ode_core import SpectralPoint

from conftest import OMEGA, PSI_CONST, PSI_P, PSI_PQ, PSI_Q, PSI_ZERO, const_roots

ROUTE_CORPUS = [PSI_P, PSI_Q, PSI_PQ]


def test_spectral_derivative():
    x = np.arange(64) / 64
    d = spectral_derivative(np.sin(2 * np.pi * 3 * x))
    assert np.max(np.abs(d - 6 * np.pi * np.cos(6 * np.pi * x))) < 1e-11


def test_xi_free():
    pt = SpectralPoint.from_z(3.0)
    xd = xi_from_floquet(floquet_solution(PSI_ZERO, pt))
    assert np.max(np.abs(xd.xi)) < 1e-12 and np.max(np.abs(xd.xi1)) < 1e-10
    assert xi_residual(PSI_ZERO, pt, xd) < 1e-9


def test_xi_constant_coefficient():
    lam = 5.0
    pt = SpectralPoint.from_lambda(lam)
    xd = xi_from_floquet(floquet_solution(PSI_CONST, pt, steps=2048))
    k3 = max(const_roots(-0.1, lam), key=lambda k: k.real)
    assert np.max(np.abs(xd.xi - (k3 - pt.z))) < 1e-10
    # the equation collapses to the characteristic cubic at constant xi
    assert abs(k3 ** 3 - 0.2 * k3 - lam) < 1e-8
    assert xi_residual(PSI_CONST, pt, xd) < 1e-8


def test_xi_residual_and_periodicity():
    pt = SpectralPoint.from_z(4.0)
    xd = xi_from_floquet(floquet_solution(PSI_P, pt, steps=2048))
    assert xi_residual(PSI_P, pt, xd) < 1e-6 * (1 + 4.0 ** 3)
    assert abs(xd.xi[-1] - xd.xi[0]) < 1e-7


def test_xi_decays_like_inverse_z():
    sup = []
    for z in (5.0, 10.0, 20.0):
        xd = xi_from_floquet(floquet_solution(PSI_P, SpectralPoint.from_z(z)))
        sup.append(np.max(np.abs(xd.xi)))
    assert sup[0] > sup[1] > sup[2]
    # doubling z roughly halves the sup norm
    for a, b in zip(sup, sup[1:]):
        assert 1.5 < a / b < 2.5


def test_vanishing_eta():
    fd = floquet_solution(PSI_ZERO, SpectralPoint.from_z(2.0))
    bad = dataclasses.replace(fd, min_abs_eta=1e-9)
    with pytest.raises(VanishingEta) as ei:
        xi_from_floquet(bad)
    assert ei.value.module == "mckean"


def test_potential_vanishes_at_zero():
    for E in (4.0, 9.0, 30.0 + 5.0j):
        assert np.max(np.abs(potential_direct(PSI_ZERO, E).V)) < 1e-9
    fp = potential_fixed_point(PSI_ZERO, 9.0)
    assert fp.iterations == 1 and np.max(np.abs(fp.V)) < 1e-9


def test_potential_constant_coefficient():
    E = 9.0
    ep = potential_direct(PSI_CONST, E)
    k3 = max(const_roots(-0.1, ep.pt.lam), key=lambda k: k.real)
    assert ep.pt.lam == pytest.approx((4 / 3 * E) ** 1.5)
    assert np.max(np.abs(ep.V - (E + 0.2 - 0.75 * k3 ** 2))) < 1e-8


def test_potential_two_formulas_agree():
    ep = potential_direct(PSI_PQ, 9.0)
    assert ep.formula_gap < 1e-10
    assert ep.route == "direct" and len(ep.x_grid) == 2049


@pytest.mark.parametrize("E", [5.0, 9.5, 25.0, 9.0 + 2.0j])
def test_route_equivalence(E):
    for psi in ROUTE_CORPUS:
        a = potential_direct(psi, E)
        b = potential_fixed_point(psi, E)
        assert np.max(np.abs(a.V - b.V)) < 1e-7
        assert b.iterations <= 15
        assert np.max(np.abs(a.xi - b.xi)) < 1e-7
        assert np.max(np.abs(a.xi1 - b.xi1)) < 1e-7


@pytest.mark.parametrize("psi", ROUTE_CORPUS)
def test_potential_periodic_and_bounded(psi):
    ep = potential_direct(psi, 9.0)
    assert abs(ep.V[-1] - ep.V[0]) < 1e-7
    vp = ep.V + 0.5 * np.asarray(psi.p(ep.x_grid))
    assert abs(vp[-1] - vp[0]) < 1e-7
    # V + p/2 is of the size of the coefficients
    assert np.max(np.abs(vp)) < 0.5
    assert np.max(np.abs(ep.V.imag)) < 1e-9


def test_change_of_variables_roundtrip():
    ep = potential_direct(PSI_Q, 9.0)
    z = ep.pt.z
    X = x_from_xi(z, ep.xi, ep.xi1)
    xi, xi1 = xi_from_x(z, X)
    assert np.max(np.abs(xi - ep.xi)) < 1e-12
    assert np.max(np.abs(xi1 - ep.xi1)) < 1e-12


def test_fixed_point_near_first_iterate():
    ep = potential_fixed_point(PSI_Q, 9.0)
    pt = ep.pt
    p = np.asarray(PSI_Q.p(ep.x_grid[:-1]), dtype=complex)
    q = np.asarray(PSI_Q.q(ep.x_grid[:-1]), dtype=complex)
    # first iterate by the same resolvent, with zero kernel
    m = np.fft.fftfreq(len(p), 1.0 / len(p))
    a = np.array([1j * np.sqrt(3) * pt.z * OMEGA, -1j * np.sqrt(3) * pt.z * OMEGA ** 2])
    W = (1j / np.sqrt(3)) * np.stack([p * OMEGA - q / pt.z, -p * OMEGA ** 2 + q / pt.z])
    X0 = np.fft.ifft(np.fft.fft(W, axis=1) / (2j * np.pi * m[None] - a[:, None]), axis=1)
    X = ep.X[:, :-1]
    assert np.max(np.abs(X - X0)) < 0.05 * np.max(np.abs(X0))


def test_small_denominator():
    c = 2 * np.pi / np.sqrt(3)
    E = 0.75 * (c * np.exp(1j * np.pi / 3)) ** 2
    assert abs(small_denominator(SpectralPoint.from_energy(E).z)) < 1e-12
    with pytest.raises(SmallDenominator):
        potential_fixed_point(PSI_P, E)


def test_nonconvergent():
    with pytest.raises(NonConvergent):
        potential_fixed_point(PSI_P, 9.0, max_iter=2)
    with pytest.raises(NonConvergent), np.errstate(all="ignore"):
        potential_fixed_point(make_pair(p_cos=[100.0], q_sin=[100.0]), 9.0)


def test_sampled_potential():
    ep = potential_direct(PSI_PQ, 9.0)
    sp = SampledPotential.from_potential(ep)
    assert np.array_equal(sp(ep.x_grid[:5]), ep.V[:5])
    assert sp(1.0) == ep.V[0]
    mid = (ep.x_grid[10] + ep.x_grid[11]) / 2
    assert abs(sp(mid) - (ep.V[10] + ep.V[11]) / 2) < 1e-5
    with pytest.raises(ValueError):
        sp.values[0] = 0.0

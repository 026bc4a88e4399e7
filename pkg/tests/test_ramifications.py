import math

import numpy as np
import pytest

from mckean3.coefficients import make_pair
from mckean3.errors import WrongCount
from mckean3.monodromy import discriminant_rho, rho_batch
from mckean3.ode_core import SpectralPoint
from mckean3.ramifications import (DiskSpec, check_ramification_symmetries, count_zeros_in_disk,
                                   find_ramifications, ramifications_in_disk, rho_normalizer)

from conftest import PSI_CONST, PSI_P, PSI_ZERO, mu0, rel


def test_disk_membership():
    c = 2 * np.pi / math.sqrt(3.0)
    d1, dm1, d0 = DiskSpec(1), DiskSpec(-1), DiskSpec(0)
    assert d1.contains(c ** 3) and not d1.contains((c + 1.01) ** 3)
    assert d1.contains((c + 0.99) ** 3)
    assert dm1.contains(-c ** 3) and not dm1.contains(c ** 3)
    assert d0.contains(0.99j) and not d0.contains(1.01)
    w = c + 0.5 * np.exp(0.7j)
    assert d1.w_of(d1.lam_of(w)) == pytest.approx(w)
    assert dm1.w_of(dm1.lam_of(w)) == pytest.approx(w)


def test_count_examples():
    d1 = DiskSpec(1)
    rho = lambda lam: rho_batch(PSI_ZERO, lam, 2048)
    assert count_zeros_in_disk(rho, d1) == 2
    assert count_zeros_in_disk(lambda lam: lam - 50.0, d1) == 1
    assert count_zeros_in_disk(lambda lam: lam - 10.0, d1) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4, -1, -3])
def test_unperturbed_doubles(n):
    e = ramifications_in_disk(PSI_ZERO, n)
    want = math.copysign(mu0(abs(n)), n)
    assert e.count == 2
    assert e.multiplicity_flag == "double"
    assert rel(e.r_minus, want) < 1e-6 and rel(e.r_plus, want) < 1e-6


def test_constant_coefficient_double():
    p0 = -0.1
    want = 4 / (3 * math.sqrt(3)) * (2 * np.pi ** 2 - p0) * math.sqrt(np.pi ** 2 - 2 * p0)
    # the closed form evaluates to 48.46282 (quoted as 48.4630)
    assert want == pytest.approx(48.4630, abs=3e-4)
    e = ramifications_in_disk(PSI_CONST, 1)
    assert e.multiplicity_flag == "double"
    assert rel(e.r_minus, want) < 1e-8 and rel(e.r_plus, want) < 1e-8


def test_constant_coefficient_small_disk():
    r0 = 4 / 3 * math.sqrt(2 / 3) * 0.1 ** 1.5
    e = ramifications_in_disk(PSI_CONST, 0)
    assert e.r_minus.real == pytest.approx(-r0, rel=1e-9)
    assert e.r_plus.real == pytest.approx(r0, rel=1e-9)


def test_gap_against_dense_scan():
    # brute force: sign changes of rho on a dense real grid
    lam = np.linspace(47.4, 48.1, 7001)
    vals = rho_batch(PSI_P, lam, 2048).real
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    assert len(idx) == 2
    scan = [lam[i] - vals[i] * (lam[i + 1] - lam[i]) / (vals[i + 1] - vals[i]) for i in idx]
    e = ramifications_in_disk(PSI_P, 1)
    assert e.multiplicity_flag == "simple_pair"
    assert e.r_minus.real < mu0(1) < e.r_plus.real
    assert abs(e.r_minus - scan[0]) < 1e-6 and abs(e.r_plus - scan[1]) < 1e-6


def test_refined_zeros_are_zeros():
    for n in (1, 2):
        disk = DiskSpec(n)
        e = ramifications_in_disk(PSI_P, n)
        ws = disk.center + np.exp(2j * np.pi * np.arange(64) / 64)
        big = np.max(np.abs(rho_batch(PSI_P, disk.lam_of(ws), disk.steps())))
        for r in (e.r_minus, e.r_plus):
            val = discriminant_rho(PSI_P, SpectralPoint.from_lambda(r), disk.steps())
            assert abs(val) < 1e-8 * big


def test_count_stable_under_sample_doubling():
    a = ramifications_in_disk(PSI_P, 1, samples=64)
    b = ramifications_in_disk(PSI_P, 1, samples=128)
    assert a.count == b.count == 2
    assert abs(a.r_minus - b.r_minus) < 1e-9 * abs(a.r_minus)


def test_reality_and_ordering():
    rs = find_ramifications(PSI_P, 4)
    seq = []
    for n in sorted(rs.entries):
        e = rs[n]
        assert abs(e.r_minus.imag) < 1e-7 and abs(e.r_plus.imag) < 1e-7
        seq += [e.r_minus.real, e.r_plus.real]
    for i in range(len(seq) - 1):
        assert seq[i] <= seq[i + 1] if i % 2 == 0 else seq[i] < seq[i + 1]


def test_symmetries_zero_and_even():
    rs = find_ramifications(PSI_ZERO, 2)
    # r_{-n} = -r_n up to the roundoff of two separate searches
    assert check_ramification_symmetries(PSI_ZERO, rs)["max"] < 1e-6
    rs = find_ramifications(PSI_P, 1)
    assert PSI_P.reflect() == PSI_P
    assert check_ramification_symmetries(PSI_P, rs)["reflect"] == 0.0


def test_symmetries_mixed():
    # norm_h1 = 0.287 sits above the default smallness threshold, so the
    # guard is lifted; every disk still holds exactly two zeros
    psi = make_pair(p_cos=[0.05], p_sin=[0.0, 0.02])
    rs = find_ramifications(psi, 2, threshold=None)
    out = check_ramification_symmetries(psi, rs)
    for key in ("star", "star_reflect", "reflect"):
        assert out[key] < 1e-6


def test_regime_guard():
    with pytest.raises(WrongCount) as ei:
        find_ramifications(make_pair(p_cos=[5.0]), 1)
    assert ei.value.module == "ramifications"


def test_normalizer_has_no_zeros_in_disk():
    disk = DiskSpec(2)
    ws = disk.center + 0.999 * np.exp(2j * np.pi * np.arange(64) / 64)
    assert np.min(np.abs(rho_normalizer(disk, ws))) > 1.0

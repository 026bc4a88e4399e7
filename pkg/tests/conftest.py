import functools
import math

import numpy as np
import pytest

from mckean3.coefficients import make_pair

S = math.sqrt(3.0) / 2
OMEGA = np.exp(2j * np.pi / 3)

PSI_ZERO = make_pair()
PSI_CONST = make_pair(p_const=-0.1)
PSI_P = make_pair(p_cos=[0.05])
PSI_Q = make_pair(q_sin=[0.05])
PSI_PQ = make_pair(p_cos=[0.05], q_sin=[0.03])

CORPUS = {"p=0.05cos": PSI_P, "q=0.05sin": PSI_Q}


def mu0(n):
    """Unperturbed ramification / 3-point eigenvalue (2 pi n / sqrt3)^3."""
    return (2 * np.pi * n / math.sqrt(3.0)) ** 3


def const_roots(p0, lam):
    """Roots of k^3 + 2 p0 k - lam."""
    return np.roots([1.0, 0.0, 2.0 * p0, -lam])


def rel(a, b):
    return abs(complex(a) - complex(b)) / max(abs(complex(b)), 1e-300)


@functools.lru_cache(maxsize=None)
def spectra(name):
    """Both spectral pictures for a corpus coefficient pair, n = 1..3."""
    from mckean3.ramifications import find_ramifications
    from mckean3.schrodinger import (find_dirichlet_eigs, find_periodic_eigs,
                                     norming_constants_g)
    from mckean3.three_point import find_three_point_eigs, norming_constants_h

    psi = CORPUS[name]
    ns = [1, 2, 3]
    out = {
        "r": find_ramifications(psi, 0, ns=ns),
        "mu": {e.n: e for e in find_three_point_eigs(psi, 0, "direct", ns=ns)},
        "mut": {e.n: e for e in find_three_point_eigs(psi, 0, "transpose", ns=ns)},
        "mu_ref": {e.n: e.mu for e in find_three_point_eigs(psi.reflect(), 0, "direct", ns=ns)},
        "E": find_periodic_eigs(psi, 3),
        "gamma": find_dirichlet_eigs(psi, 3),
        "gamma_ref": find_dirichlet_eigs(psi.reflect(), 3),
    }
    out["h"] = {n: norming_constants_h(psi, n, out["mut"][n]) for n in ns}
    out["g"] = {n: norming_constants_g(psi, n, out["gamma"][n]) for n in ns}
    return out


@pytest.fixture(params=sorted(CORPUS))
def corpus_name(request):
    return request.param

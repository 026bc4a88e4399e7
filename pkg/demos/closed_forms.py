"""Closed forms at psi = 0 and at constant p.

At psi = 0 the discriminant is rho = -64 (sin sz sin swz sin sw^2z)^2, with
double zeros at mu0(n) = (2 pi n / sqrt 3)^3.  At p = -0.1 the edges of the
first band coincide at 3/4 r^(2/3).
"""
import math

import numpy as np

from mckean3.coefficients import make_pair
from mckean3.monodromy import monodromy_matrix, rho_unperturbed
from mckean3.ode_core import SpectralPoint
from mckean3.schrodinger import find_periodic_eigs

zero = make_pair()
for z in (1.0, 3.0 + 1.0j, 6.0):
    rho = monodromy_matrix(zero, SpectralPoint.from_z(z)).rho
    print(f"z = {z!s:8}  rho = {complex(rho):.10g}  closed form = {complex(rho_unperturbed(z)):.10g}")

for n in (1, 2, 3):
    print(f"mu0({n}) = {(2 * np.pi * n / math.sqrt(3)) ** 3:.6f}")

const = make_pair(p_const=-0.1)
r = 4 / (3 * math.sqrt(3)) * (2 * np.pi ** 2 + 0.1) * math.sqrt(np.pi ** 2 + 0.2)
lo, hi = find_periodic_eigs(const, 1)[1]
print(f"constant p: r = {r:.6f}, 3/4 r^(2/3) = {0.75 * r ** (2 / 3):.6f}, "
      f"E1 = {lo.real:.6f}, {hi.real:.6f}")

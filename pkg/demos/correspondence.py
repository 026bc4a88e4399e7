"""Third-order spectra and the Hill spectra of the associated potential.

For a small periodic pair (p, q) the ramification points r_n^-+ of the
third-order operator map to the periodic band edges E_n^-+ = 3/4 r^(2/3), and
the three-point eigenvalues mu_n map to the Dirichlet eigenvalues gamma_n.
"""
import numpy as np

from mckean3.coefficients import make_pair, norm_h1
from mckean3.ramifications import find_ramifications
from mckean3.schrodinger import find_dirichlet_eigs, find_periodic_eigs, norming_constants_g
from mckean3.three_point import find_three_point_eigs, norming_constants_h

psi = make_pair(p_cos=[0.05], q_sin=[0.03])
n_max = 2

rs = find_ramifications(psi, n_max)
mus = {e.n: e.mu for e in find_three_point_eigs(psi, n_max, "transpose")}
pe = find_periodic_eigs(psi, n_max)
de = find_dirichlet_eigs(psi, n_max)

print(f"norm_h1 = {norm_h1(psi):.4f}")
print(" n   side  3/4 r^(2/3)          E (Hill)             rel. diff")
for n in range(1, n_max + 1):
    for i, s in enumerate((-1, 1)):
        a = 0.75 * rs.r(n, s) ** (2 / 3)
        b = pe[n][i]
        print(f"{n:2d}  {'-+'[i]:>5}  {a.real:<20.12f} {b.real:<20.12f} {abs(a - b) / abs(b):.1e}")
print(" n   3/4 mu~^(2/3)        gamma                g          h/(4 pi n)")
for n in range(1, n_max + 1):
    a = 0.75 * mus[n] ** (2 / 3)
    g, h = norming_constants_g(psi, n), norming_constants_h(psi, n)
    print(f"{n:2d}  {a.real:<20.12f} {de[n].real:<20.12f} {np.real(g):+.3e} "
          f"{np.real(h) / (4 * np.pi * n):+.3e}")

"""Translation flow of the n-th three-point eigenvalue.

Translating the coefficients x -> x + t moves mu_n(t) inside its gap.  Lifted
to the two-sheeted curve over the gap, the path closes after one period and
winds n times around the gap circle.
"""

from mckean3.coefficients import make_pair
from mckean3.verify import winding_trace

psi = make_pair(p_cos=[0.05])
wt = winding_trace(psi, 1, 128)
print(f"gap [{wt.r_minus:.6f}, {wt.r_plus:.6f}], winding number {wt.winding}")
for k in range(0, len(wt.t), 16):
    print(f"t = {wt.t[k]:.4f}  mu = {wt.mu[k].real:.6f}  angle = {wt.angle[k]:+.4f}")

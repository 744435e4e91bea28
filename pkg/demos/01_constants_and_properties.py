"""
The constant family and its analytic properties
================================================

Walks the closed-form constants the whole laboratory is built on:
D(lam), the three alpha pieces, the combined alpha, and the
exponentially weighted ratio with its floor e/1152.
"""

import numpy as np

from oulab import (
    RATE_FLOOR,
    alpha,
    alpha_components,
    analytic_property_suite,
    d_lambda,
    exp_weighted_alpha,
)

# D(lam) = arctan(sqrt(e^(2 lam) - 1)) / lam blows up like 1/sqrt(2 lam)
# near zero and decays like (pi/2)/lam at infinity
for lam in (0.01, 0.5, 1.0, 4.0, 20.0):
    print(f"D({lam:g}) = {d_lambda(lam):.12f}")

# alpha is the minimum of three competing pieces, divided by 9.  On the
# whole of (0, 1] the minimum is the constant piece, so alpha = 1/2304.
print()
grid = np.geomspace(0.01, 10.0, 7)
parts = alpha_components(grid)
print("lam      alpha1    alpha2      alpha3      alpha")
for i, lam in enumerate(grid):
    print(
        f"{lam:8.4f} {parts.alpha1:.6f}  {parts.alpha2[i]:.6e}  "
        f"{parts.alpha3[i]:.6e}  {parts.alpha[i]:.6e}"
    )
print(f"alpha(0.5) * 2304 = {alpha(0.5) * 2304:.15f}  (exactly 1 on (0,1])")

# the weighted ratio alpha e^(2 lam)/lam has a global floor, attained
# at lam = 1/2
print()
lam_fine = np.geomspace(1e-4, 1e2, 100_000)
h = exp_weighted_alpha(lam_fine)
i = int(np.argmin(h))
print(f"min over the grid: {h[i]:.15e} at lam = {lam_fine[i]:.6f}")
print(f"analytic floor:    {RATE_FLOOR:.15e} = e/1152")

# every inequality the constants rely on, checked on dense grids
print()
report = analytic_property_suite()
for claim in report.claims:
    mark = "ok " if claim.passed else "BAD"
    print(f"[{mark}] {claim.name}  (worst margin {claim.worst_margin:.3e} at {claim.worst_at:g})")

"""Roots of repeated derivatives: the flow on root measures against simulation.

Takes the derivative of order n/2 of random Kac polynomials of degree 400,
finds the roots and compares their radial distribution with the flowed unit
circle.  Run with ``python3 demos/differentiation_flow.py``.
"""

import numpy as np

from fracfree import catalog
from fracfree.diffflow import flow
from fracfree.measure import cdf_at
from fracfree.polylab import CoefSampler, aberth_roots, differentiate, profile_coeffs, sample_poly

n, t = 400, 0.5
rng = np.random.default_rng(1)
poly = sample_poly(profile_coeffs("kac", n), n, CoefSampler(), rng)
roots = aberth_roots(differentiate(poly, int(np.ceil(t * n)))).roots
moduli = np.sort(np.abs(roots))

theory = flow(catalog.unit_circle(), t)
print(f"{len(moduli)} roots of the {int(t * n)}-th derivative of a degree-{n} Kac polynomial")
print(" radius  empirical  flow")
for r in (0.2, 0.3, 0.4, 0.45, 0.49):
    emp = np.searchsorted(moduli, r) / moduli.size
    print(f"  {r:.2f}    {emp:.3f}    {float(cdf_at(theory, r)):.3f}")

# The same law in closed form.
print("\nmedian from the flow:", float(theory(0.5)), " closed form:", float(catalog.kac_derivative(t)(0.5)))

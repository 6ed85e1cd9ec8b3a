"""Evolving the radial CDF with the method of lines and checking it against the flow.

Starts from the Kac root measure at t = 0.1 and integrates to t = 0.5.
Run with ``python3 demos/pde_evolution.py``.
"""

import numpy as np

from fracfree import catalog, pde
from fracfree.measure import cdf_at

x = pde.uniform_grid(1.0, 1000)
start = pde.cdf_state(catalog.kac_derivative(0.1), x, t0=0.1)
final, snaps = pde.integrate(start, 0.5, 2e-4, record_every=0.1)
for s in snaps:
    exact = cdf_at(catalog.kac_derivative(s.t), x)
    print(f"t={s.t:.2f}  max |Phi - exact| = {np.max(np.abs(s.values - exact)):.2e}")

# Stationary profile x/(1+x) does not move.
x4 = pde.uniform_grid(4.0, 1000)
still, _ = pde.integrate(pde.cdf_state(lambda v: v / (1 + v), x4), 0.5, 2e-4)
print("stationary drift:", np.max(np.abs(still.values - x4 / (1 + x4))))

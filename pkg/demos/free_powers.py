"""Fractional free powers and products of Brown measures, printed as tables.

Run with ``python3 demos/free_powers.py``.
"""

import numpy as np

from fracfree import catalog
from fracfree.freeops import commutator, oplus_power, product
from fracfree.transforms import s_from_quantile, support_endpoints

probs = np.array([0.1, 0.25, 0.5, 0.75, 0.9])

# A Haar unitary has every eigenvalue on the unit circle.  Its free powers
# spread into disks of radius sqrt(k).
uc = catalog.unit_circle(probs)
print("p      " + "  ".join(f"{p:>7.2f}" for p in probs))
for k in (1.5, 2.0, 4.0, 10.0):
    q = oplus_power(uc, k).radii
    print(f"k={k:<4} " + "  ".join(f"{v:7.4f}" for v in q), f"  outer radius {support_endpoints(oplus_power(uc, k))[1]:.4f}")

# The circular element is 2-stable: its fourth power is a dilation by 2.
cb = catalog.circular_brown(probs)
print("\ncircular^(+)4 / 2 :", np.round(oplus_power(cb, 4).radii / 2, 12))
print("circular          :", np.round(cb.radii, 12))

# Quantiles multiply under free products; the commutator is a free square.
print("\nproduct of circulars  :", np.round(product(cb, cb).radii, 6))
print("commutator of circulars:", np.round(commutator(cb, cb).radii, 6))
print("sqrt(p(1+p))          :", np.round(np.sqrt(probs * (1 + probs)), 6))

# S-transforms on (-1, 0).
z = np.array([-0.75, -0.5, -0.25])
print("\nS of circular at", z, "=", s_from_quantile(catalog.circular_brown())(z))

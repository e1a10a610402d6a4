# Closed-form polynomial integrals over the unit sphere, checked by Monte Carlo.
#
# Run with:  python3 demos/02_sphere_integrals.py
import math

from energy_lab.numerics import lemma_sphere_check, sphere_monomial_integral, surface_volume

# The sphere's surface measure in a few dimensions.
for d in (2, 3, 4):
    print(f"Vol(S^{d - 1}) = {surface_volume(d):.6f}")
print("4 pi =", 4 * math.pi)

# Monomial integrals vanish when any exponent is odd.
print("int x^2 over S^2 :", sphere_monomial_integral([2, 0, 0]), "=", 4 * math.pi / 3)
print("int x y over S^2 :", sphere_monomial_integral([1, 1, 0]))

# The four integrals that drive the moment expansion, with random mu, Delta and kappa.
for d in (3, 16):
    print(f"\nd = {d}")
    for row in lemma_sphere_check(d, n_mc=200_000, seed=1):
        print(f"  {row.name:16s} closed={row.closed_form: .5f}  mc={row.monte_carlo: .5f}  "
              f"z={row.z_score: .2f}")

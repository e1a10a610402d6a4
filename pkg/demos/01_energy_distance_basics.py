# Estimating the squared energy distance between two samples.
#
# Run with:  python3 demos/01_energy_distance_basics.py
import math

import numpy as np

from energy_lab import DistributionSpec, energy_distance_sq, energy_score, sample
from energy_lab.numerics import quad_abs_normal_mean

# Two one-dimensional Gaussians a unit apart.
p = DistributionSpec("Gaussian", [0.0], [[1.0]])
q = DistributionSpec("Gaussian", [1.0], [[1.0]])

x = sample(p, 2 ** 14, seed=1)
y = sample(q, 2 ** 14, seed=2)

# In one dimension every expectation is E|N(m, 2)|, which quadrature gives exactly.
s = math.sqrt(2.0)
truth = quad_abs_normal_mean(-1.0, s) - quad_abs_normal_mean(0.0, s)

u = energy_distance_sq(x, y, mode="ustat")
v = energy_distance_sq(x, y, mode="vstat")
print(f"quadrature truth   {truth:.6f}")
print(f"U-statistic        {u.value:.6f} +/- {u.std_error:.6f}")
print(f"V-statistic        {v.value:.6f} +/- {v.std_error:.6f}")

# The U-statistic is unbiased, so with identical laws it hovers around zero
# and can go negative. The V-statistic never does.
same = sample(p, 2 ** 10, seed=3)
other = sample(p, 2 ** 10, seed=4)
print("same law, U:", energy_distance_sq(same, other).value)
print("same law, V:", energy_distance_sq(same, other, mode="vstat").value)

# The energy score rates an ensemble forecast against one observation.
rng = np.random.default_rng(0)
ensemble = rng.standard_normal((50, 3))
print("energy score at the origin:", energy_score(ensemble, np.zeros(3)))
print("energy score far away     :", energy_score(ensemble, np.full(3, 3.0)))

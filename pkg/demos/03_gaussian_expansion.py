# How well do the first- and third-order moment terms predict D^2 for Gaussians?
#
# Run with:  python3 demos/03_gaussian_expansion.py
import numpy as np

from energy_lab import DistributionSpec, energy_distance_sq, gaussian_expansion, sample

d, lam = 32, 1.0
rng = np.random.default_rng(5)
diag = rng.uniform(-0.3, 0.3, d)
delta = np.diag(diag)

print(" mu1     first    third    total    simulated (+/- se)")
for mu1 in (0.0, 0.05, 0.1, 0.2):
    mu = np.full(d, mu1)
    x_spec = DistributionSpec("Gaussian", mu, lam ** 2 * np.eye(d) + delta / 2)
    y_spec = DistributionSpec("Gaussian", np.zeros(d), lam ** 2 * np.eye(d) - delta / 2)
    est = energy_distance_sq(sample(x_spec, 8192, 10), sample(y_spec, 8192, 11))
    pred = gaussian_expansion(mu, delta, lam)
    print(f"{mu1:5.2f}  {pred.first_order:.5f}  {pred.third_order:.5f}  {pred.total:.5f}  "
          f"{est.value:.5f} (+/- {est.std_error:.5f})")

# With no mean shift only the covariance term remains, and it is small:
# D^2 is far more sensitive to the mean than to the covariance.

# Does the covariance part of D^2 point the same way as the Frobenius loss?
#
# Run with:  python3 demos/05_gradient_similarity.py
import numpy as np

from energy_lab import cosine_similarity, cosine_similarity_gamma, similarity_regime
from energy_lab.distributions import BandedDelta

d = 256
# S depends on Delta only through gamma^2 = Tr(Delta)^2 / ||Delta||_F^2.
for g in (0.0, 1.0, 16.0, 128.0, 256.0):
    print(f"gamma^2 = {g:6.1f}  ->  S = {cosine_similarity_gamma(g, d):.4f}")

# A banded Delta with a biased diagonal (all diagonal entries share one sign).
for M in (1, 4, 16):
    S = cosine_similarity(BandedDelta(d, 1.0, 1.0, M).matrix())
    print(f"local, biased, M={M:2d}: S = {S:.4f}   table value {similarity_regime('local-biased', d, M):.4f}")

# The table gives growth rates, not constants: compare ratios across M, not values.

# Flip diagonal signs at random: Trace(Delta)^2 drops to order d.
rng = np.random.default_rng(0)
delta = BandedDelta(d, 1.0, 1.0, 4).matrix()
np.fill_diagonal(delta, rng.choice([-1.0, 1.0], size=d))
print(f"local, unbiased, M=4: S = {cosine_similarity(delta):.4f}   "
      f"table value {similarity_regime('local-unbiased', d, 4):.4f}")

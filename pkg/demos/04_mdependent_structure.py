# Banded (M-dependent) covariance differences are suppressed by 1/d.
#
# Run with:  python3 demos/04_mdependent_structure.py
import math

from energy_lab.expansion import mdependent_marginal_exact, mdependent_marginal_form, mdependent_terms
from energy_lab.harness import mdependent_check

M, rho_sq, lam = 2, 4.0, 4.0
print("   d   third/sqrt(d)   d * third/sqrt(d)")
for d in (32, 64, 128, 256):
    t = mdependent_terms(0.0, 0.0, lam, d, M, rho_sq).third_order / math.sqrt(d)
    print(f"{d:4d}   {t:.3e}      {d * t:.4f}")

print("\nSimulation against the formula (N = 4096 per sample):")
for d in (32, 64):
    res = mdependent_check(d, M, 0.0, rho_sq, 0.0, lam, n_samples=4096, seed=d)
    print(f"d={d}: simulated {res.simulated.value:.5f} +/- {res.simulated.std_error:.5f}, "
          f"predicted {res.predicted:.5f}")

# Per-coordinate view: the one-dimensional marginal form versus its exact value.
for lam in (2.0, 5.0, 10.0):
    approx = mdependent_marginal_form(0.5, 1.0, lam)
    exact = mdependent_marginal_exact(0.5, 1.0, lam)
    print(f"lam={lam:4.1f}: expansion {approx:.6f}, exact {exact:.6f}")

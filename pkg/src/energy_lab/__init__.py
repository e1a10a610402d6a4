"""
Energy distance estimators, moment expansions in the perturbative regime,
and a seeded Monte-Carlo harness that checks one against the other.
"""
__version__ = "0.1.0"

from .distributions import (
    BandedDelta,
    DistributionSpec,
    SampleMatrix,
    banded_gaussian_pair,
    random_covariance,
    sample,
)
from .estimators import EstimateWithError, averaged_energy_score, energy_distance_sq, energy_score
from .expansion import (
    GAUSSIAN_PROFILE,
    ExpansionResult,
    HProfile,
    asymptotic_expansion,
    cosine_similarity,
    cosine_similarity_gamma,
    gaussian_expansion,
    mdependent_expansion,
    mdependent_marginal_form,
    similarity_regime,
    spherical_expansion,
)
from .moments import (
    MomentDiff,
    MomentFunctionals,
    functionals,
    moment_diff_analytic,
    moment_diff_from_samples,
)
from .numerics import (
    RegressionFit,
    fit_two_term,
    quad_abs_normal_mean,
    quadratic_form_sphere_integral,
    sphere_monomial_integral,
    surface_volume,
)

"""Zeros of the Ruelle zeta function of z -> z^2 + c for c <= -2, and friends."""
from .numcore import SignedLog, ScaledComplex
from .orbit import Parameter, CriticalOrbit, compute_orbit, compute_k, orbit_with_k, lemma1_report
from .detseries import DetSeries, build_series, build_hardy, evaluate, evaluate_many, potential_u
from .rootfind import ZeroSet, find_roots, principal_eigenvalue, gap_partner
from .zerodist import empirical_measure, radial_stats, angular_stats, zero_statistics
from .transferop import build_collocation, spectrum, spectrum_extended, tent_matrix, tent_eigenpolynomials
from .gibbs import eigen_data, eigenfunction_h, cauchy_H, sample_gibbs, exact_moments
from .correlations import (
    tent_corr_resolvent,
    tent_corr_polynomial,
    fit_double_exponential,
    spectral_gap_rate,
)

__version__ = "0.1.0"

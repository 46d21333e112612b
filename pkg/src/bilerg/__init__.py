"""
Numerical laboratory for quadratic bilinear ergodic averages on torus flows.

Subpackages
-----------
numerics   grids, spectra, norms, quadrature and power-law fits
dynamics   translation flows, trigonometric polynomials, coboundaries
averages   the averaging operator and lacunary / maximal checks
bilinear   planar cutoff operators, band splitting, probes, transference
lab        configuration-driven experiment runner and command line
"""

__version__ = "0.1.0"

from .errors import BilergError, ConfigurationError, ConvergenceError, DomainError, ResonanceError
from .numerics import (
    FitResult,
    Grid2D,
    GridFunction2D,
    QuadratureRule,
    Spectrum2D,
    chirp_integral,
    dft_forward,
    dft_inverse,
    fit_power_law,
    integrate_1d,
    lp_norm,
    weak_l1_norm,
)
from .dynamics import FlowPair, TorusPoint, TrigPolynomial, coboundary_decompose, koopman_apply
from .averages import (
    AverageRequest,
    ExponentPair,
    LacunarySchedule,
    compute_average,
    difference_average,
    lacunary_trajectory,
    maximal_chain_check,
    sandwich_check,
    single_quadratic_average,
)

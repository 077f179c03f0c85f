"""Point sets of 2-planes in R^4: pair energies, kernels, sampling, bounds and descent.

Planes in R^4 are stored as 4x2 orthonormal frames; configurations are numpy
arrays of shape (N, 4, 2).
"""

__version__ = "0.1.0"

from .bounds import (LPBoundParams, asn, best_lp_lower_bound, coefficient_nonnegativity_report,
                     csk, energy_fourier_identity_check, exact_lp_lower_bound,
                     hypersingular_lower_bound, lower_bound_constant, moment,
                     riesz_lower_bound_asymptote)
from .energy import (EnergyKind, continuous_energy, discrete_energy, dpp_asymptotic_constant,
                     dpp_energy_asymptote, expected_dpp_energy_exact,
                     hypersingular_leading_coefficient)
from .errors import *  # noqa: F401,F403
from .grassmann import (PrincipalAngles, XiPair, chordal_distance, orthonormalize,
                        principal_angles, projector_embedding, xi_pair)
from .kernel import (Partition, jacobi_grass, jacobi_norm_sq, kernel_dim, kernel_eval,
                     kernel_eval_brute, partition_dim, partitions_up_to)
from .optimizer import OptimizerConfig, OptimizeResult, energy_gradient, gradient_check, minimize_energy
from .quadrature import IntegralResult, QuadratureSpec, gauss_legendre_nodes, integrate_2d
from .sampling import (DppOptions, RandomStream, mc_expected_energy, pair_angle_histogram,
                       sample_harmonic_dpp, sample_uniform)

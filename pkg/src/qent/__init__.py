"""Shannon entropy of finite-dimensional quantum states by maximum entropy.

The least-informative density on the space of pure states that reproduces a
given density matrix has canonical form ``exp(-lam . Pi(x)) / Z(lam)``. This
package computes ``Z`` in closed form through divided differences of the
exponential, solves the convex dual for ``lam`` and reports the resulting
entropy alongside the von Neumann entropy, with Monte Carlo and quadrature
cross-checks.
"""
__version__ = "0.1.0"

from .config import TOL, Tolerances
from .dexp import (dd_exp, hessian_logZ, log_partition, moment_map,
                   second_moments)
from .entropy import (EntropyReport, SweepRow, fisher_rao, measurement_ensemble,
                      quantum_shannon, sweep_two_state, two_state_entropy,
                      two_state_rho1, von_neumann)
from .errors import *  # noqa: F401,F403
from .montecarlo import (McEstimate, SamplerConfig, estimate_density_matrix,
                         estimate_entropy, estimate_expectation, estimate_logZ,
                         sample_haar, simplex_quadrature)
from .solver import SolveReport, entropy_dual, solve_lambda
from .spectral import (DensityMatrix, PureState, Spectrum, eigh,
                       expectation_linear, projector, transition_weights,
                       validate_density)

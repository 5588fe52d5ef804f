"""Equilibrium counting, topological complexity and Lyapunov exponents for random rate networks."""

from .complexity import (ComplexityEstimate, build_modified_sigmoid, c_closed_form, c_quadrature,
                         edge_thickness, harmonic_circle_integral, kac_rice_mc, rho_of_epsilon)
from .equilibria import (CountEstimate, EquilibriumSet, ball_confinement_check, find_equilibria,
                         grid_oracle, mean_count, newton_solve)
from .fakir import (FakirLandscape, FakirParams, ParticleState, count_critical_points,
                    fakir_lyapunov, integrate_particle, potential, sample_landscape,
                    slope_experiment)
from .lyapunov import (LyapunovEstimate, lyapunov_curve, max_lyapunov_benettin,
                       susceptibility_trace)
from .netmodel import (TANH, SigmoidSpec, Trajectory, integrate, jacobian_at, sigmoid_deriv,
                       sigmoid_eval, vector_field)
from .randmat import (ConnectivityMatrix, Spectrum, circular_law_discrepancy, eigenvalues,
                      log_abs_det_shifted, sample_matrix, scaled_support_radius,
                      spectral_radius)
from .stats import fit_power_law

__version__ = "0.1.0"

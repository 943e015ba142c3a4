"""Spectral toolkit for vectorial Sturm-Liouville systems.

Computes eigenvalues of -phi'' + P(x) phi = lambda phi on [0, pi] with
matrix Robin conditions phi'(0) + H_L phi(0) = 0, phi'(pi) + H_R phi(pi) = 0,
and verifies the large-eigenvalue law sqrt(lambda) ~ n + a/n against the
characteristic values a of (1/pi)(H_R - H_L + (1/2) int_0^pi P).
"""

from .trigpoly import TrigPoly, cosine, poly, sine
from .problem import (PotentialSpec, Problem, eval_potential,
                      integrate_potential, kernel_diag, make_problem,
                      sym_matrix)
from .ivp import (DivergenceError, IvpSolution, boundary_matrix, char_det,
                  free_solution, solve_matrix_ivp, step_count)
from .locator import (BoundaryTooCloseError, CountMismatchError,
                      EigenvalueRecord, PhaseJumpError, Window,
                      count_zeros_in_disk, find_eigenvalues_in_window,
                      multiplicity, scan_low_spectrum)
from .asymptotics import (AsymptoticModel, ContourSpec, SingularPsiError,
                          TransRootResult, build_model, contour_norm,
                          jacobi_eigh, modulus_identities_check,
                          predict_sqrt_eigenvalues, psi_matrix,
                          residual_matrix, transcendental_root)
from .verification import (ClusterReport, DecayFit, cluster_and_match,
                           fit_decay, oracle_decoupled_spectrum,
                           scalar_reference_alpha)
from .config import ConfigError, RunConfig, parse_config
from .report import VerificationReport, parse_json, serialize_csv, serialize_json

__version__ = "0.1.0"

"""Coherence-constrained maximal work (CCMW) for d-level quantum batteries."""

from .analytic import (NoClosedForm, analytic_ccmw, isocoherent_ellipse_residual,
                       max_coherence_scaling, optimal_qubit_pair, pq_min_q, qutrit_ellipse,
                       qutrit_tangency, xi2, xi3_diagonal, xi3_offdiagonal)
from .hamiltonians import (BatteryHamiltonian, custom_diagonal, j_mixed, j_offdiagonal, jx, jy,
                           jz, parse_hamiltonian, qubit_hamiltonian)
from .isres import OptimizationProblem, OptimizationResult, OptimizerConfig, isres_minimize
from .numerics import eigendecompose, gellmann_generators, unitary_from_parameters
from .optimizer import (CcmwEstimate, ccmw_mixed, ccmw_pure, default_config,
                        verify_against_analytic)
from .passivity import (PermPhaseUnitary, ergotropy, is_isocoherent_passive,
                        passivity_bruteforce, perm_phase_unitary)
from .states import (density_from_spectrum, energy, l1_coherence, pure_from_polar, purity,
                     scaled_coherence)

__version__ = "0.1.0"

"""Correlation-function dynamics of continuum Glauber birth-death processes on a truncated lattice."""

from .configs import Basis, PairingWeights, SymFn, basis_for, k_inverse, k_transform, norm_K_C, norm_L_C, pairing
from .evolution import contraction_audit, ergodic_decay_report, evolve_forward, evolve_star, invariance_audit
from .lattice import DomainError, DomainSpec, Potential, c_phi
from .operators import (OperatorParams, apply_L_hat, apply_L_hat_star, apply_P_delta,
                        apply_P_delta_star)
from .oracles import (GibbsSpec, McConfig, exact_gibbs_correlations, gibbs_fixed_point_residual,
                      mc_birth_death, positivity_probe)
from .regime import RegimeError, RegimeParams

__version__ = "0.1.0"

__all__ = [
    "Basis", "PairingWeights", "SymFn", "basis_for", "k_inverse", "k_transform", "norm_K_C",
    "norm_L_C", "pairing", "contraction_audit", "ergodic_decay_report", "evolve_forward",
    "evolve_star", "invariance_audit", "DomainError", "DomainSpec", "Potential", "c_phi",
    "OperatorParams", "apply_L_hat", "apply_L_hat_star", "apply_P_delta", "apply_P_delta_star",
    "GibbsSpec", "McConfig", "exact_gibbs_correlations", "gibbs_fixed_point_residual",
    "mc_birth_death", "positivity_probe", "RegimeError", "RegimeParams",
]

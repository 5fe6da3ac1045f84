"""Holonomic Hadamard gate under stochastic squeezing control errors."""
from .analytic import (
    NoiseMoments,
    ScenarioParams,
    analytic_fidelity,
    analytic_fidelity_angles,
    analytic_purity,
    analytic_purity_angles,
    averaged_density,
    noise_moments,
    rho_ideal,
)
from .holonomy import (
    HADAMARD,
    DomainError,
    LoopPair,
    PerturbationAngles,
    Plane,
    RectLoop,
    alpha_from_path,
    beta_from_path,
    ideal_gate,
    perturbed_gate,
    realized_density,
    sigma_I,
    sigma_II,
    solve_dx,
    solve_dy,
)
from .montecarlo import MCConfig, MCResult, convergence_sweep, run_ensemble
from .ou import NoisePath, OUParams, RngStream, autocorr_estimate, ou_selftest, sample_path
from .qubit import DensityMatrix, QubitState, density_from_pure, fidelity, pauli, purity, su2_exp

__version__ = "0.1.0"

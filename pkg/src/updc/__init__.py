"""Fock-state pumped down-conversion with sign-gate amplitude amplification."""
from .analytic_oracles import (FittingError, ThreePhotonParams, TwoPhotonParams, fit_n2_params,
                               oracle_n1, oracle_n2, oracle_n3, oracle_n4)
from .cascade import CascadeReport, CascadeSpec, NsgModel, nondeterministic_penalty, plan_cascade, verify_unit_cell
from .fock_dynamics import Propagator, SubspaceState, build_generator, cached_propagator, propagate
from .grover import (GroverConfig, PerIteration, PipelineTrace, PumpSpectrum, SingleCrystal,
                     efficiency_mu_n, efficiency_mu_total, grover_angle, nsg_apply, run_pipeline,
                     termination_M)
from .optimizer import (EfficiencyReport, GridSpec, figure1_data, figure2_data, grover_schedule,
                        optimize_conventional, optimize_per_iteration, optimize_single_crystal)

__version__ = "0.1.0"

__all__ = [
    "FittingError",
    "ThreePhotonParams",
    "TwoPhotonParams",
    "fit_n2_params",
    "oracle_n1",
    "oracle_n2",
    "oracle_n3",
    "oracle_n4",
    "CascadeReport",
    "CascadeSpec",
    "NsgModel",
    "nondeterministic_penalty",
    "plan_cascade",
    "verify_unit_cell",
    "Propagator",
    "SubspaceState",
    "build_generator",
    "cached_propagator",
    "propagate",
    "GroverConfig",
    "grover_angle",
    "grover_schedule",
    "PerIteration",
    "PipelineTrace",
    "PumpSpectrum",
    "SingleCrystal",
    "efficiency_mu_n",
    "efficiency_mu_total",
    "nsg_apply",
    "run_pipeline",
    "termination_M",
    "EfficiencyReport",
    "GridSpec",
    "figure1_data",
    "figure2_data",
    "optimize_conventional",
    "optimize_per_iteration",
    "optimize_single_crystal",
]

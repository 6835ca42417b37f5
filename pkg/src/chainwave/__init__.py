"""Quantum state transfer through XXZ chains with ramped end couplings."""

from .evolve import IntegratorConfig, NormDrift, SectorState, convergence_check, evolve
from .fidelity import (FidelitySample, FidelityTrace, NoMaximum, NotStationary, TransferSummary,
                       fidelity_of_state, first_maximum, simulate, stationary_fidelity,
                       transfer_summary)
from .model import (ChainSpec, FermiOff, FermiOn, HamiltonianView, InstantOff, InstantOn,
                    NoiseTrack, Noisy, PowerOff, PowerOn, Schedule, Static, build_hamiltonian,
                    schedule_value)
from .stochastic import (EnsembleAborted, EnsembleReport, disorder_ensemble, draw_disorder,
                         fluctuation_ensemble)
from .sweep import optimize_fermi, sweep_powerlaw, sweep_tau_tf

__version__ = "0.1.0"

__all__ = [
    "build_hamiltonian", "ChainSpec", "convergence_check", "disorder_ensemble",
    "draw_disorder", "EnsembleAborted", "EnsembleReport", "evolve", "FermiOff", "FermiOn",
    "fidelity_of_state", "FidelitySample", "FidelityTrace", "first_maximum",
    "fluctuation_ensemble", "HamiltonianView", "InstantOff", "InstantOn",
    "IntegratorConfig", "NoiseTrack", "Noisy", "NoMaximum", "NormDrift", "NotStationary",
    "optimize_fermi", "PowerOff", "PowerOn", "Schedule", "schedule_value", "SectorState",
    "simulate", "Static", "stationary_fidelity", "sweep_powerlaw", "sweep_tau_tf",
    "transfer_summary", "TransferSummary",
]

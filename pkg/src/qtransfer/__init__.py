"""Quantum state and entanglement transfer between two atoms in two coupled cavities."""

__version__ = "0.1.0"

from .hilbert import (  # noqa: E402
    AUGMENTED,
    BasisState,
    DensityMatrix,
    StateVector,
    basis_index,
    enumerate_basis,
    named_state,
    partial_trace,
)
from .model import CouplingConfig, SystemParams, build_hamiltonian  # noqa: E402
from .dynamics import Trajectory, is_population_trapping, propagate  # noqa: E402
from .entanglement import log_negativity, wootters_concurrence, xstate_concurrence  # noqa: E402
from .scenarios import PRESETS, ScenarioSpec, run_scenario  # noqa: E402

__all__ = [
    "AUGMENTED", "BasisState", "DensityMatrix", "StateVector", "basis_index", "enumerate_basis",
    "named_state", "partial_trace", "CouplingConfig", "SystemParams", "build_hamiltonian",
    "Trajectory", "is_population_trapping", "propagate", "log_negativity", "wootters_concurrence",
    "xstate_concurrence", "PRESETS", "ScenarioSpec", "run_scenario",
]

"""Figure presets and experiment drivers built on model + dynamics + entanglement."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .dynamics import DEFAULT_T_MAX, DEFAULT_T_POINTS, propagate
from .entanglement import trajectory_observables
from .hilbert import AUGMENTED, StateVector, get_frame, named_state
from .model import CouplingConfig, SystemParams, build_hamiltonian

A = CouplingConfig.ATOM_MEDIATED
B = CouplingConfig.PHOTON_MEDIATED

# kappa for the Delta = kappa curves, where the captions leave it open
RESONANT_KAPPA = 10.0


@dataclass(frozen=True)
class ScenarioSpec:
    figure_id: str
    config: CouplingConfig
    initial: str
    params: SystemParams = field(default_factory=SystemParams)
    t_max: float = DEFAULT_T_MAX
    t_points: int = DEFAULT_T_POINTS
    variants: tuple[tuple[str, SystemParams], ...] = ()
    """Labelled parameter sets run side by side (fig2)."""
    columns: tuple[str, ...] = ()
    """Observable columns kept per variant; empty means all."""

    def __post_init__(self):
        object.__setattr__(self, "config", CouplingConfig.parse(self.config))
        if int(self.t_points) < 2:
            raise ValueError("t_points must be at least 2")
        if not (np.isfinite(self.t_max) and self.t_max > 0):
            raise ValueError("t_max must be positive")
        object.__setattr__(self, "t_points", int(self.t_points))
        object.__setattr__(self, "t_max", float(self.t_max))

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.t_points)

    def replace(self, **changes) -> "ScenarioSpec":
        return replace(self, **changes)


_FIG2_SETS = (
    ("equal", SystemParams(g_a=1, g_b=1, delta=RESONANT_KAPPA, kappa=RESONANT_KAPPA)),
    ("unequal", SystemParams(g_a=1, g_b=2, delta=RESONANT_KAPPA, kappa=RESONANT_KAPPA)),
    ("detuned", SystemParams(g_a=1, g_b=1, delta=5, kappa=4)),
)
_LOSS = dict(Gamma=0.02, gamma=0.02)

PRESETS: dict[str, ScenarioSpec] = {
    "fig2a": ScenarioSpec("fig2a", B, "noon1", _FIG2_SETS[0][1], variants=_FIG2_SETS, columns=("C_AB",)),
    "fig2b": ScenarioSpec("fig2b", B, "noon1", _FIG2_SETS[0][1], variants=_FIG2_SETS, columns=("C_ab",)),
    "fig3": ScenarioSpec("fig3", A, "w", SystemParams()),
    "fig4": ScenarioSpec("fig4", A, "two_photon_pair", SystemParams()),
    "fig5": ScenarioSpec("fig5", A, "noon2_sym", SystemParams()),
    "fig6": ScenarioSpec("fig6", B, "lambda", SystemParams(delta=10, kappa=10)),
    "fig7": ScenarioSpec("fig7", B, "noon1", SystemParams(delta=RESONANT_KAPPA, kappa=RESONANT_KAPPA, **_LOSS)),
    "fig8": ScenarioSpec("fig8", A, "two_photon_pair", SystemParams(**_LOSS)),
}


def preset(figure_id: str) -> ScenarioSpec:
    try:
        return PRESETS[figure_id]
    except KeyError:
        raise ValueError(f"unknown preset {figure_id!r}; expected one of {tuple(PRESETS)}") from None


def tracked_states(config: CouplingConfig, manifold, params: SystemParams) -> tuple[str, ...]:
    """Named states whose populations are reported for a configuration."""
    equal = np.isclose(params.g_a, params.g_b, rtol=0, atol=1e-12)
    if manifold == 1:
        if config is A and params.g0 > 0:
            return ("w1", "u1", "x1", "y1")
        return ()
    if manifold in (2, AUGMENTED):
        if config is A:
            return ("w", "q", "u", "z", "m", "n", "a1", "a2")
        names = ("eta", "lambda", "epsilon", "theta")
        return names + (("seven_tilde", "beta") if equal else ())
    return ()


def _named_population(states: np.ndarray, target: StateVector) -> np.ndarray:
    v = target.amplitudes
    return np.abs(states[:, : v.size] @ v.conj()) ** 2


def _run_single(config, initial: str, params: SystemParams, times: np.ndarray) -> dict[str, np.ndarray]:
    psi0 = named_state(initial, params)
    m = build_hamiltonian(config, psi0.manifold, params, losses=params.lossy)
    traj = propagate(m, psi0, times)
    cols = {"t": traj.times, "norm": traj.norms}
    pops = traj.populations
    for k, b in enumerate(psi0.basis):
        cols[f"P_{b.label}"] = pops[:, k]
    for name in tracked_states(config, psi0.manifold, params):
        cols[f"P_{name}"] = _named_population(traj.states, named_state(name, params))
    cols.update(trajectory_observables(traj.states, psi0.manifold)._asdict())
    return cols


def run_scenario(spec: ScenarioSpec) -> dict[str, np.ndarray]:
    """Observable table for a scenario: ``t, norm, P_<state>..., C_AB, C_ab,
    N_AB, N_ab``.

    Specs with ``variants`` give one ``t`` column followed by
    ``<column>_<label>`` for each parameter set and each kept column.
    """
    times = spec.times
    if not spec.variants:
        return _run_single(spec.config, spec.initial, spec.params, times)
    table = {"t": times}
    for label, params in spec.variants:
        cols = _run_single(spec.config, spec.initial, params, times)
        keep = ("norm",) + (spec.columns or tuple(c for c in cols if c not in ("t", "norm")))
        for c in keep:
            table[f"{c}_{label}"] = cols[c]
    return table


def trapped_fraction(initial: StateVector, config, params: SystemParams) -> float:
    """Population of the trapping states {a1, a2, m, n} (atom-mediated n = 2,
    g_a = g_b, Delta = 0)."""
    config = CouplingConfig.parse(config)
    if config is not A or initial.manifold not in (2, AUGMENTED):
        raise ValueError("trapped_fraction is defined for the atom-mediated double excitation")
    if not np.isclose(params.g_a, params.g_b, rtol=0, atol=1e-12) or params.delta != 0:
        raise ValueError("trapped_fraction needs g_a == g_b and delta == 0")
    coords = get_frame("double_A", params).coords(initial.amplitudes[:8])
    return float(np.sum(np.abs(coords[4:8]) ** 2))


class TransferReport(NamedTuple):
    max_fidelity: float
    time: float


def transfer_report(initial: StateVector, target: StateVector, config, params: SystemParams, times) -> TransferReport:
    """Largest ``|<target|psi(t)>|^2`` on the grid and where it occurs."""
    if initial.manifold != target.manifold:
        raise ValueError(f"manifold mismatch: {initial.manifold!r} vs {target.manifold!r}")
    m = build_hamiltonian(config, initial.manifold, params, losses=params.lossy)
    traj = propagate(m, initial, times)
    fid = np.abs(traj.states @ target.amplitudes.conj()) ** 2
    k = int(np.argmax(fid))
    return TransferReport(float(fid[k]), float(traj.times[k]))

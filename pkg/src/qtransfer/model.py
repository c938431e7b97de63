"""System parameters and manifold-restricted Hamiltonians.

Rates are in units of a reference coupling ``g`` and times in ``1/g``. The
matrices returned here are the generators ``M`` of ``i dc/dt = M c`` in the
interaction picture, restricted to one excitation manifold.

Diagonal convention: basis state ``j`` with ``k_j`` excited atoms gets
``delta * (k_j - 1)``. For n = 1 that is ``diag(0, 0, -delta, -delta)``; for
n = 2 it is ``(+delta, 0, 0, -delta, 0, -delta, 0, -delta)``. The vacuum
(augmented manifold only) gets 0. Any other per-manifold reference energy is a
global phase.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, replace
from functools import reduce

import numpy as np

from .hilbert import AUGMENTED, check_manifold, enumerate_basis, get_frame

log = logging.getLogger(__name__)


class CouplingConfig(enum.Enum):
    """ATOM_MEDIATED: both atoms couple to both modes. PHOTON_MEDIATED: one atom
    per cavity, cavities coupled with strength kappa."""

    ATOM_MEDIATED = "A"
    PHOTON_MEDIATED = "B"

    @classmethod
    def parse(cls, value) -> "CouplingConfig":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        aliases = {"A": cls.ATOM_MEDIATED, "ATOM": cls.ATOM_MEDIATED, "ATOM_MEDIATED": cls.ATOM_MEDIATED,
                   "B": cls.PHOTON_MEDIATED, "PHOTON": cls.PHOTON_MEDIATED, "PHOTON_MEDIATED": cls.PHOTON_MEDIATED}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown coupling configuration {value!r}") from None


@dataclass(frozen=True)
class SystemParams:
    g_a: float = 1.0
    g_b: float = 1.0
    delta: float = 0.0
    kappa: float = 0.0
    epsilon: complex = 1.0 + 0.0j
    Gamma: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("g_a", "g_b", "delta", "kappa", "Gamma", "gamma"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        for name in ("g_a", "g_b", "Gamma", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        eps = complex(self.epsilon)
        if abs(abs(eps) - 1.0) > 1e-12:
            raise ValueError(f"epsilon must have unit modulus, got {eps!r}")
        object.__setattr__(self, "epsilon", eps)

    @property
    def g0(self) -> float:
        return float(np.hypot(self.g_a, self.g_b))

    @property
    def lossy(self) -> bool:
        return self.Gamma > 0 or self.gamma > 0

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def with_phase(self, phase: float) -> "SystemParams":
        """Copy with ``epsilon = exp(i * phase)``."""
        return replace(self, epsilon=complex(np.exp(1j * phase)))


# --------------------------------------------------------------------------
# operator construction on the truncated 2 x 2 x 3 x 3 space
# --------------------------------------------------------------------------

_SP = np.array([[0.0, 0.0], [1.0, 0.0]])  # |e><g| with e = index 1
_A = np.diag(np.sqrt(np.arange(1.0, 3.0)), k=1)  # photon lowering, n <= 2
_I2, _I3 = np.eye(2), np.eye(3)


def _kron(*ops):
    return reduce(np.kron, ops)


def _full_index(b) -> int:
    return ((b.atom_a * 2 + b.atom_b) * 3 + b.n_a) * 3 + b.n_b


def interaction_operator(config: CouplingConfig, params: SystemParams) -> np.ndarray:
    """Interaction Hamiltonian on the full 36-dimensional truncated space."""
    config = CouplingConfig.parse(config)
    sa = _kron(_SP, _I2, _I3, _I3)
    sb = _kron(_I2, _SP, _I3, _I3)
    a = _kron(_I2, _I2, _A, _I3)
    b = _kron(_I2, _I2, _I3, _A)
    if config is CouplingConfig.ATOM_MEDIATED:
        collective = sa + params.epsilon * sb
        h = params.g_a * collective @ a + params.g_b * collective @ b
        h = h + h.conj().T
    else:
        h = params.g_a * sa @ a + params.g_b * sb @ b
        h = h + h.conj().T + params.kappa * (a @ b.T + b @ a.T)
    return h


def build_hamiltonian(config, manifold, params: SystemParams, losses: bool = False) -> np.ndarray:
    """Generator ``M`` of ``i dc/dt = M c`` on one manifold.

    With ``losses`` the effective non-Hermitian diagonal
    ``-i Gamma/2 * (excited atoms) - i gamma/2 * (photons)`` is added.
    """
    config = CouplingConfig.parse(config)
    manifold = check_manifold(manifold)
    basis = enumerate_basis(manifold)
    if config is CouplingConfig.ATOM_MEDIATED and manifold in (2, AUGMENTED) and params.delta != 0:
        log.info("atom-mediated double excitation at delta=%g is an extension of the resonant case", params.delta)
    idx = np.array([_full_index(s) for s in basis])
    h = interaction_operator(config, params)[np.ix_(idx, idx)].astype(np.complex128)
    diag = []
    for s in basis:
        e = params.delta * (s.atomic_excitations - 1) if s.excitations else 0.0
        if losses:
            e = e - 0.5j * (params.Gamma * s.atomic_excitations + params.gamma * s.photons)
        diag.append(e)
    h[np.diag_indices_from(h)] += np.array(diag)
    return h


# --------------------------------------------------------------------------
# collective (superposition) frames for one excitation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CollectiveFrame:
    config: CouplingConfig
    labels: tuple[str, ...]
    matrix: np.ndarray
    decoupled: tuple[str, ...]
    """Coordinates whose rows and columns carry no off-diagonal coupling."""
    cross_coupling: float = 0.0
    """Atom-mode cross term ``u = (g_a**2 - g_b**2) / g0`` (photon-mediated only)."""
    mode_shifts: tuple[float, float] = (0.0, 0.0)
    """Frequency offsets of the symmetric / antisymmetric cavity modes from omega_c."""


def collective_frame(config, params: SystemParams, tol: float = 1e-12) -> CollectiveFrame:
    """Single-excitation Hamiltonian in the collective coordinates.

    Atom-mediated: (W, U, X, Y); U and Y must not couple to anything.
    Photon-mediated: (C_s, C_a, C_+, C_-) with symmetric and antisymmetric
    modes shifted by +kappa and -kappa.
    """
    config = CouplingConfig.parse(config)
    if params.g0 == 0.0:
        raise ValueError("collective frame undefined for g_a = g_b = 0")
    name = "single_A" if config is CouplingConfig.ATOM_MEDIATED else "single_B"
    fr = get_frame(name, params)
    m = fr.rows @ build_hamiltonian(config, 1, params) @ fr.rows.conj().T
    off = m - np.diag(np.diag(m))
    decoupled = tuple(
        lab for k, lab in enumerate(fr.labels) if np.max(np.abs(off[k])) <= tol and np.max(np.abs(off[:, k])) <= tol
    )
    if config is CouplingConfig.ATOM_MEDIATED:
        if not {"U", "Y"} <= set(decoupled):
            raise AssertionError("U and Y must decouple in the atom-mediated frame")
        return CollectiveFrame(config, fr.labels, m, decoupled)
    u = (params.g_a**2 - params.g_b**2) / params.g0
    return CollectiveFrame(config, fr.labels, m, decoupled, u, (params.kappa, -params.kappa))

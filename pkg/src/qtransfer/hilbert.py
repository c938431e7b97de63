"""Basis enumeration, named states, coordinate frames and partial traces.

Product basis states carry the atomic flags and photon numbers of the two
atoms (A, B) and two cavity modes (a, b). The single- and double-excitation
manifolds use a fixed ordering::

    n = 1:  |e g 0 0>, |g e 0 0>, |g g 1 0>, |g g 0 1>
    n = 2:  |e e 0 0>, |e g 0 1>, |g e 1 0>, |g g 1 1>,
            |e g 1 0>, |g g 2 0>, |g e 0 1>, |g g 0 2>

The augmented manifold is the n = 2 basis with the vacuum |g g 0 0> appended
at index 8.

Named states and coordinate frames are generated from one table of
coordinate functionals per frame: a coordinate is ``<v|psi>`` and the named
state is ``|v>``. The dipole phase ``epsilon`` multiplies every amplitude in
which atom B is excited, so ``C~ = conj(epsilon) * C`` for those components.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import null_space

AUGMENTED = "augmented"
MANIFOLDS = (0, 1, 2, AUGMENTED)
MAX_PHOTONS = 2


class BasisState(NamedTuple):
    """Occupation record of one product eigenstate of the free Hamiltonian."""

    atom_a: int  # 1 = excited
    atom_b: int
    n_a: int
    n_b: int

    @property
    def excitations(self) -> int:
        return self.atom_a + self.atom_b + self.n_a + self.n_b

    @property
    def atomic_excitations(self) -> int:
        return self.atom_a + self.atom_b

    @property
    def photons(self) -> int:
        return self.n_a + self.n_b

    @property
    def atom_index(self) -> int:
        """Row in the atomic basis {ee, eg, ge, gg}."""
        return 2 * (1 - self.atom_a) + (1 - self.atom_b)

    @property
    def mode_index(self) -> int:
        """Row in the mode basis {00, 01, 02, 10, ..., 22}."""
        return 3 * self.n_a + self.n_b

    @property
    def label(self) -> str:
        return f"{'eg'[1 - self.atom_a]}{'eg'[1 - self.atom_b]}{self.n_a}{self.n_b}"

    def __str__(self) -> str:
        return f"|{' '.join(self.label)}>"


def _bs(label: str) -> BasisState:
    return BasisState(int(label[0] == "e"), int(label[1] == "e"), int(label[2]), int(label[3]))


_BASES = {
    0: tuple(map(_bs, ["gg00"])),
    1: tuple(map(_bs, ["eg00", "ge00", "gg10", "gg01"])),
    2: tuple(map(_bs, ["ee00", "eg01", "ge10", "gg11", "eg10", "gg20", "ge01", "gg02"])),
}
_BASES[AUGMENTED] = _BASES[2] + _BASES[0]


def check_manifold(manifold) -> int | str:
    if isinstance(manifold, str):
        key = manifold.strip().lower()
        if key in {"aug", AUGMENTED}:
            return AUGMENTED
        if key.isdigit():
            manifold = int(key)
    if isinstance(manifold, (bool, np.bool_)) or manifold not in _BASES:
        raise ValueError(f"unsupported manifold {manifold!r}; expected one of {MANIFOLDS}")
    return manifold


def enumerate_basis(manifold) -> tuple[BasisState, ...]:
    """Ordered basis of an excitation manifold (0, 1, 2 or ``"augmented"``)."""
    return _BASES[check_manifold(manifold)]


def dimension(manifold) -> int:
    return len(enumerate_basis(manifold))


def basis_index(manifold, label: str) -> int:
    """Index of a basis state given by its compact label, e.g. ``"eg10"``."""
    for i, b in enumerate(enumerate_basis(manifold)):
        if b.label == label:
            return i
    raise KeyError(f"{label!r} is not in manifold {manifold!r}")


def index_maps(manifold) -> tuple[np.ndarray, np.ndarray]:
    """Atomic and mode row of each basis state, as int64 arrays."""
    basis = enumerate_basis(manifold)
    return (
        np.array([b.atom_index for b in basis], dtype=np.int64),
        np.array([b.mode_index for b in basis], dtype=np.int64),
    )


@dataclass(frozen=True)
class StateVector:
    """Amplitudes over the canonical basis of one manifold."""

    manifold: int | str
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = check_manifold(self.manifold)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != dimension(m):
            raise ValueError(f"manifold {m!r} needs {dimension(m)} amplitudes, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        n2 = float(np.vdot(amps, amps).real)
        if not 0.0 < n2 <= 1.0 + 1e-10:
            raise ValueError(f"squared norm must lie in (0, 1], got {n2!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "manifold", m)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def basis(self) -> tuple[BasisState, ...]:
        return enumerate_basis(self.manifold)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __len__(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "StateVector") -> complex:
        """``<other|self>``; the vacuum component counts only if both carry it."""
        a, b = _common(self, other)
        return complex(np.vdot(b, a))

    def __str__(self) -> str:
        terms = [f"({c:.4g}){b}" for c, b in zip(self.amplitudes, self.basis) if abs(c) > 1e-12]
        return " + ".join(terms) or "0"


def _common(s: StateVector, t: StateVector) -> tuple[np.ndarray, np.ndarray]:
    if s.manifold == t.manifold:
        return s.amplitudes, t.amplitudes
    pair = {s.manifold, t.manifold}
    if pair == {2, AUGMENTED}:
        return s.amplitudes[:8], t.amplitudes[:8]
    raise ValueError(f"states live in different manifolds ({s.manifold!r}, {t.manifold!r})")


def augment(state: StateVector) -> StateVector:
    """Embed an n = 2 state into the augmented manifold (zero vacuum amplitude)."""
    if state.manifold == AUGMENTED:
        return state
    if state.manifold != 2:
        raise ValueError("only n = 2 states can be augmented")
    return StateVector(AUGMENTED, np.append(state.amplitudes, 0.0))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian matrix over a bipartite space split as ``dims``."""

    dims: tuple[int, int]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.data, dtype=np.complex128)
        d = int(np.prod(self.dims))
        if rho.shape != (d, d):
            raise ValueError(f"dims {self.dims} need a {d}x{d} matrix, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if not 0.0 < tr <= 1.0 + 1e-12:
            raise ValueError(f"trace must lie in (0, 1], got {tr!r}")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValueError("density matrix has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))
        object.__setattr__(self, "data", rho)

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.data, dtype=dtype)


ATOM_LABELS = ("ee", "eg", "ge", "gg")
MODE_LABELS = tuple(f"{i}{j}" for i in range(3) for j in range(3))


def amplitude_grid(amplitudes: np.ndarray, manifold) -> np.ndarray:
    """Rearrange amplitudes into a 4 x 9 (atoms x modes) array."""
    atom_idx, mode_idx = index_maps(manifold)
    psi = np.zeros((4, 9), dtype=np.complex128)
    psi[atom_idx, mode_idx] = amplitudes
    return psi


def partial_trace(state: StateVector, keep: str) -> DensityMatrix:
    """Reduced state of the atoms (4x4, basis ee, eg, ge, gg) or the modes
    (9x9, basis 00, 01, ..., 22)."""
    psi = amplitude_grid(state.amplitudes, state.manifold)
    if keep == "atoms":
        return DensityMatrix((2, 2), psi @ psi.conj().T)
    if keep == "modes":
        return DensityMatrix((3, 3), psi.T @ psi.conj())
    raise ValueError(f"keep must be 'atoms' or 'modes', got {keep!r}")


# --------------------------------------------------------------------------
# coordinate frames
# --------------------------------------------------------------------------

_R2 = np.sqrt(2.0)
_R3 = np.sqrt(3.0)
_R6 = np.sqrt(6.0)


@dataclass(frozen=True)
class Frame:
    """Orthonormal coordinate system on one manifold.

    Row ``k`` of ``rows`` is the functional giving coordinate ``labels[k]``,
    i.e. ``coords = rows @ amplitudes``; the matching state is ``rows[k].conj()``.
    """

    name: str
    manifold: int
    labels: tuple[str, ...]
    rows: np.ndarray = field(repr=False)

    def coords(self, amplitudes: np.ndarray) -> np.ndarray:
        return self.rows @ amplitudes

    def amplitudes(self, coords: np.ndarray) -> np.ndarray:
        return self.rows.conj().T @ coords

    def state(self, label: str) -> np.ndarray:
        return self.rows[self.labels.index(label)].conj().copy()


def _unit_phase(epsilon) -> complex:
    eps = complex(epsilon)
    if abs(abs(eps) - 1.0) > 1e-12:
        raise ValueError(f"dipole phase must have unit modulus, got {eps!r}")
    return eps


def _coupling_pair(params) -> tuple[float, float, float]:
    ga, gb = float(params.g_a), float(params.g_b)
    g0 = float(np.hypot(ga, gb))
    if g0 == 0.0:
        raise ValueError("coupling-weighted states need g_a**2 + g_b**2 > 0")
    return ga, gb, g0


def _frame_single_A(params) -> Frame:
    ga, gb, g0 = _coupling_pair(params)
    ec = _unit_phase(params.epsilon).conjugate()
    rows = np.array(
        [
            [1 / _R2, ec / _R2, 0, 0],  # W
            [1 / _R2, -ec / _R2, 0, 0],  # U
            [0, 0, ga / g0, gb / g0],  # X
            [0, 0, -gb / g0, ga / g0],  # Y
        ],
        dtype=np.complex128,
    )
    return Frame("single_A", 1, ("W", "U", "X", "Y"), rows)


def _frame_single_B(params) -> Frame:
    ga, gb, g0 = _coupling_pair(params)
    rows = np.array(
        [
            [0, 0, 1 / _R2, 1 / _R2],  # C_s
            [0, 0, 1 / _R2, -1 / _R2],  # C_a
            [ga / g0, gb / g0, 0, 0],  # C_+
            [gb / g0, -ga / g0, 0, 0],  # C_-
        ],
        dtype=np.complex128,
    )
    return Frame("single_B", 1, ("C_s", "C_a", "C_+", "C_-"), rows)


def _folding(epsilon) -> np.ndarray:
    """Diagonal of the n = 2 phase folding D~_i = conj(eps) D_i, i in {1, 3, 7}."""
    ec = _unit_phase(epsilon).conjugate()
    return np.array([ec, 1, ec, 1, 1, 1, ec, 1], dtype=np.complex128)


def _rows_from(spec: dict[str, dict[int, complex]], order: tuple[str, ...]) -> np.ndarray:
    rows = np.zeros((len(order), 8), dtype=np.complex128)
    for k, name in enumerate(order):
        for j, c in spec[name].items():
            rows[k, j - 1] = c
    return rows


def _frame_double_A(params) -> Frame:
    # coefficients act on the folded amplitudes D~ (1-based paper indices)
    spec = {
        "D_w": {3: 0.5, 5: 0.5, 2: -0.5, 7: -0.5},
        "D_q": {6: 1 / _R2, 8: -1 / _R2},
        "D_u": {3: 0.5, 5: 0.5, 2: 0.5, 7: 0.5},
        "D_z": {1: 1 / _R3, 4: 1 / _R3, 6: 1 / _R6, 8: 1 / _R6},
        "D_m": {6: 1 / _R3, 8: 1 / _R3, 1: -1 / _R6, 4: -1 / _R6},
        "D_n": {1: 1 / _R2, 4: -1 / _R2},
        "D_a1": {3: 1 / _R2, 5: -1 / _R2},
        "D_a2": {2: 1 / _R2, 7: -1 / _R2},
    }
    order = ("D_w", "D_q", "D_u", "D_z", "D_m", "D_n", "D_a1", "D_a2")
    rows = _rows_from(spec, order) * _folding(params.epsilon)[None, :]
    return Frame("double_A", 2, order, rows)


def _frame_double_A_jc(params) -> Frame:
    spec = {
        "D_s1": {1: 1 / _R2, 4: 1 / _R2},
        "D_s2": {2: 1 / _R2, 3: 1 / _R2},
        "D_a1": {1: 1 / _R2, 4: -1 / _R2},
        "D_a2": {2: 1 / _R2, 3: -1 / _R2},
        "D_5": {5: 1},
        "D_6": {6: 1},
        "D_7": {7: 1},
        "D_8": {8: 1},
    }
    order = tuple(spec)
    rows = _rows_from(spec, order) * _folding(params.epsilon)[None, :]
    return Frame("double_A_jc", 2, order, rows)


def _frame_double_B(params) -> Frame:
    h = 0.5
    spec = {
        "D_eta": {4: 1 / _R2, 6: h, 8: h},
        "D_epsilon": {4: 1 / _R2, 6: -h, 8: -h},
        "D_lambda": {2: h, 3: h, 5: h, 7: h},
        "D_theta": {2: h, 3: h, 5: -h, 7: -h},
        "D_1": {1: 1},
        "D~_3": {2: 1 / _R2, 3: -1 / _R2},
        "D~_7": {5: 1 / _R2, 7: -1 / _R2},
        "D~_8": {6: 1 / _R2, 8: -1 / _R2},
    }
    order = tuple(spec)
    return Frame("double_B", 2, order, _rows_from(spec, order))


def resonant_B_constants(g: float, kappa: float) -> dict[str, dict[int, complex]]:
    """Coefficients of D_alpha, D_beta and D_a over the n = 2 basis (g_a = g_b = g)."""
    op = np.sqrt(2 * g**2 + kappa**2)
    oa2 = np.sqrt(2 * g**4 + kappa**4)
    if op == 0.0:
        raise ValueError("g and kappa cannot both vanish")
    # D~_3 = (D2 - D3)/sqrt2, D~_8 = (D6 - D8)/sqrt2, D~_5 = (D5 + D7)/sqrt2
    a3, a8 = _R2 * g / op, -kappa / op
    b3, b8 = kappa / op, _R2 * g / op
    return {
        "D~_7": {5: 1 / _R2, 7: -1 / _R2},
        "D_beta": {2: b3 / _R2, 3: -b3 / _R2, 6: b8 / _R2, 8: -b8 / _R2},
        "D_alpha": {2: a3 / _R2, 3: -a3 / _R2, 6: a8 / _R2, 8: -a8 / _R2},
        "D_a": {
            4: g**2 / oa2,
            5: -g * kappa / oa2,
            7: -g * kappa / oa2,
            1: (kappa**2 - g**2) / oa2,
        },
    }


def _frame_double_B_resonant(params) -> Frame:
    g = float(params.g_a)
    if not np.isclose(params.g_a, params.g_b, rtol=0, atol=1e-12):
        raise ValueError("the resonant photon-mediated frame needs g_a == g_b")
    spec = resonant_B_constants(g, float(params.kappa))
    order = ("D~_7", "D_beta", "D_alpha", "D_a")
    head = _rows_from(spec, order)
    # orthonormal completion, labelled r1..r4
    rest = null_space(head.conj()).T
    rows = np.vstack([head, rest])
    return Frame("double_B_resonant", 2, order + ("r1", "r2", "r3", "r4"), rows)


_FRAMES = {
    "single_A": _frame_single_A,
    "single_B": _frame_single_B,
    "double_A": _frame_double_A,
    "double_A_jc": _frame_double_A_jc,
    "double_B": _frame_double_B,
    "double_B_resonant": _frame_double_B_resonant,
}
FRAMES = tuple(_FRAMES)


def get_frame(frame: str, params) -> Frame:
    try:
        return _FRAMES[frame](params)
    except KeyError:
        raise ValueError(f"unknown frame {frame!r}; expected one of {FRAMES}") from None


def superposition_coords(state: StateVector, frame: str, params) -> np.ndarray:
    """Coordinates of ``state`` in a named frame.

    Double-excitation frames accept augmented states; the vacuum amplitude is
    passed through as a trailing coordinate so the map stays an isometry.
    """
    fr = get_frame(frame, params)
    m = state.manifold
    if m == fr.manifold:
        return fr.coords(state.amplitudes)
    if m == AUGMENTED and fr.manifold == 2:
        return np.append(fr.coords(state.amplitudes[:8]), state.amplitudes[8])
    raise ValueError(f"frame {frame!r} acts on manifold {fr.manifold}, state is in {m!r}")


def from_coords(coords: np.ndarray, frame: str, params) -> StateVector:
    """Inverse of :func:`superposition_coords`."""
    fr = get_frame(frame, params)
    coords = np.asarray(coords, dtype=np.complex128)
    if coords.size == len(fr.labels):
        return StateVector(fr.manifold, fr.amplitudes(coords))
    if fr.manifold == 2 and coords.size == 9:
        return StateVector(AUGMENTED, np.append(fr.amplitudes(coords[:8]), coords[8]))
    raise ValueError(f"frame {frame!r} expects {len(fr.labels)} coordinates, got {coords.size}")


# --------------------------------------------------------------------------
# named states
# --------------------------------------------------------------------------

# name -> (frame, coordinate label)
_FRAME_STATES = {
    "w1": ("single_A", "W"),
    "u1": ("single_A", "U"),
    "x1": ("single_A", "X"),
    "y1": ("single_A", "Y"),
    "s1": ("double_A_jc", "D_s1"),
    "s2": ("double_A_jc", "D_s2"),
    "a1_jc": ("double_A_jc", "D_a1"),
    "a2_jc": ("double_A_jc", "D_a2"),
    "w": ("double_A", "D_w"),
    "q": ("double_A", "D_q"),
    "u": ("double_A", "D_u"),
    "z": ("double_A", "D_z"),
    "m": ("double_A", "D_m"),
    "n": ("double_A", "D_n"),
    "a1": ("double_A", "D_a1"),
    "a2": ("double_A", "D_a2"),
    "eta": ("double_B", "D_eta"),
    "epsilon": ("double_B", "D_epsilon"),
    "lambda": ("double_B", "D_lambda"),
    "theta": ("double_B", "D_theta"),
    "seven_tilde": ("double_B_resonant", "D~_7"),
    "beta": ("double_B_resonant", "D_beta"),
    "alpha": ("double_B_resonant", "D_alpha"),
    "a_const": ("double_B_resonant", "D_a"),
}

# fixed superpositions of basis labels, unnormalised
_LITERAL_STATES = {
    "bell_atoms": (1, {"eg00": 1, "ge00": 1}),
    "noon1": (1, {"gg10": 1, "gg01": 1}),
    "two_photon_pair": (AUGMENTED, {"gg11": 1, "gg00": 1}),
    "noon2_sym": (2, {"gg20": 1, "gg02": 1}),
    "noon2_asym": (2, {"gg20": 1, "gg02": -1}),
}

STATE_NAMES = tuple(_FRAME_STATES) + tuple(_LITERAL_STATES)


def named_state(name: str, params=None) -> StateVector:
    """Build one of the scenario states by name (see ``STATE_NAMES``).

    ``params`` supplies couplings and the dipole phase; it may be omitted for
    states that depend on neither.
    """
    if params is None:
        from .model import SystemParams

        params = SystemParams()
    if name in _FRAME_STATES:
        frame, label = _FRAME_STATES[name]
        fr = get_frame(frame, params)
        return StateVector(fr.manifold, fr.state(label))
    if name in _LITERAL_STATES:
        manifold, terms = _LITERAL_STATES[name]
        amps = np.zeros(dimension(manifold), dtype=np.complex128)
        for label, c in terms.items():
            amps[basis_index(manifold, label)] = c
        return StateVector(manifold, amps / np.linalg.norm(amps))
    raise ValueError(f"unknown state {name!r}; expected one of {STATE_NAMES}")

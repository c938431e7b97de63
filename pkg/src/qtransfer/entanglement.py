"""Entanglement measures on reduced two-atom and two-mode states.

Reduced states of a trajectory are unnormalised when losses are on (trace =
squared norm); the measures are evaluated on them as they are, so a uniform
decay of the state scales the concurrence by the same factor.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import kernels
from .hilbert import DensityMatrix, index_maps
from .model import SystemParams

_X_MASK = np.array(
    [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1]],
    dtype=bool,
)


class MeasureResult(NamedTuple):
    value: float
    method: str


def _matrix(rho, dim: int | None = None) -> np.ndarray:
    m = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} matrix, got {m.shape}")
    return m


def _validate(m: np.ndarray):
    if np.max(np.abs(m - m.conj().T)) > 1e-12:
        raise ValueError("density matrix is not Hermitian")
    if np.linalg.eigvalsh(m).min() < -1e-10:
        raise ValueError("density matrix has a negative eigenvalue")


def _clamp(c: float) -> float:
    return float(min(max(c, 0.0), 1.0))


def wootters_concurrence(rho) -> MeasureResult:
    """Concurrence max(0, l1 - l2 - l3 - l4), where the l_i are the square
    roots of the eigenvalues of ``R = rho (sy x sy) rho* (sy x sy)`` in
    descending order.

    The l_i are taken as singular values of ``sqrt(rho) sqrt(rho~)``, which
    has the same spectrum as R but avoids square roots of round-off-level
    eigenvalues near separable states.
    """
    m = _matrix(rho, 4)
    _validate(m)
    w, v = np.linalg.eigh(m)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    flipped = kernels.SPIN_FLIP @ root.conj() @ kernels.SPIN_FLIP
    lam = np.linalg.svd(root @ flipped, compute_uv=False)
    return MeasureResult(_clamp(lam[0] - lam[1:].sum()), "wootters")


def is_x_form(rho, tol: float = 1e-12) -> bool:
    m = _matrix(rho, 4)
    return bool(np.max(np.abs(m[~_X_MASK]), initial=0.0) < tol)


def xstate_terms(rho) -> tuple[float, float]:
    """(C1, C2): ``2|r23| - 2 sqrt(r11 r44)`` and ``2|r14| - 2 sqrt(r22 r33)``."""
    m = _matrix(rho, 4)
    p = np.clip(np.diag(m).real, 0.0, None)
    c1 = 2 * abs(m[1, 2]) - 2 * np.sqrt(p[0] * p[3])
    c2 = 2 * abs(m[0, 3]) - 2 * np.sqrt(p[1] * p[2])
    return float(c1), float(c2)


def xstate_concurrence(rho, variant: str = "both") -> MeasureResult:
    """Concurrence of an X-form two-qubit state.

    ``shared`` uses the single-excitation coherence r23, ``pair`` the
    double-excitation coherence r14, ``both`` takes the larger term (always
    equal to the Wootters value for an X-state).
    """
    m = _matrix(rho, 4)
    if not is_x_form(m):
        raise ValueError("matrix is not of X form")
    c1, c2 = xstate_terms(m)
    terms = {"shared": c1, "pair": c2, "both": max(c1, c2)}
    if variant not in terms:
        raise ValueError(f"variant must be one of {tuple(terms)}")
    return MeasureResult(_clamp(terms[variant]), "xstate")


def partial_transpose(rho, split: tuple[int, int]) -> np.ndarray:
    """Transpose the indices of the second factor."""
    da, db = split
    m = _matrix(rho, da * db)
    return m.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)


def xstate_negativity_eigenvalues(rho) -> tuple[float, float]:
    """Smaller eigenvalues of the two 2x2 blocks of the partially transposed
    X-state: ``(mu2, mu2')`` built from r23 and r14 respectively."""
    m = _matrix(rho, 4)
    p = np.diag(m).real
    mu2 = 0.5 * (p[0] + p[3] - np.sqrt((p[0] - p[3]) ** 2 + 4 * abs(m[1, 2]) ** 2))
    mu2p = 0.5 * (p[1] + p[2] - np.sqrt((p[1] - p[2]) ** 2 + 4 * abs(m[0, 3]) ** 2))
    return float(mu2), float(mu2p)


def log_negativity(rho, split: tuple[int, int] = (2, 2), method: str = "auto") -> MeasureResult:
    """``max(0, log2(1 + 2 sum |mu_i|))`` over negative eigenvalues ``mu_i`` of
    the partial transpose.

    For a 2x2 X-state ``method="auto"`` uses the closed-form block
    eigenvalues; ``method="eig"`` always diagonalises.
    """
    split = tuple(int(x) for x in split)
    if len(split) != 2 or min(split) < 1:
        raise ValueError(f"bad split {split}")
    m = _matrix(rho)
    if m.shape[0] != split[0] * split[1]:
        raise ValueError(f"split {split} inconsistent with a {m.shape[0]}x{m.shape[0]} matrix")
    if isinstance(rho, DensityMatrix) and rho.dims != split:
        raise ValueError(f"split {split} does not match the matrix dims {rho.dims}")
    if method not in {"auto", "eig", "xstate"}:
        raise ValueError(f"unknown method {method!r}")
    if method != "eig" and split == (2, 2) and is_x_form(m):
        neg = sum(min(mu, 0.0) for mu in xstate_negativity_eigenvalues(m))
        return MeasureResult(max(0.0, float(np.log2(1 - 2 * neg))), "negativity-xstate")
    if method == "xstate":
        raise ValueError("closed form needs a 2x2 X-state")
    mu = np.linalg.eigvalsh(partial_transpose(m, split))
    neg = mu[mu < 0].sum()
    return MeasureResult(max(0.0, float(np.log2(1 - 2 * neg))), "negativity")


# --------------------------------------------------------------------------
# closed-form concurrences
# --------------------------------------------------------------------------


def analytic_concurrences_single_A(params: SystemParams, coords, printed: bool = False):
    """(C_AB, C_ab) from the collective amplitudes (W, X, Y, U).

    Atoms: ``| |W|^2 - |U|^2 + 2i Im(U W*) |``. The printed expression drops
    the ``i`` on the imaginary part, which only matters when ``Im(U W*) != 0``;
    ``printed=True`` evaluates it as printed. Modes:
    ``2 |g_a g_b (|X|^2 - |Y|^2) + g_a^2 X Y* - g_b^2 X* Y| / g0^2``.
    """
    w, x, y, u = (np.asarray(v, dtype=complex) for v in coords)
    cross = u * np.conj(w)
    base = np.abs(w) ** 2 - np.abs(u) ** 2
    if printed:
        c_atoms = np.abs(base + 2 * cross.imag)
    else:
        c_atoms = np.abs(base + 2j * cross.imag)
    ga, gb, g0 = params.g_a, params.g_b, params.g0
    c_modes = 2 * np.abs(ga * gb * (np.abs(x) ** 2 - np.abs(y) ** 2) + ga**2 * x * np.conj(y) - gb**2 * np.conj(x) * y) / g0**2
    return c_atoms, c_modes


def analytic_concurrences_single_B(params: SystemParams, coords):
    """(C_AB, C_ab) from (C_s, C_a, C_+, C_-) in the secular regime:
    ``2 g_a g_b / g0^2 * ||C_+|^2 - |C_-|^2|`` and ``||C_s|^2 - |C_a|^2|``."""
    cs, ca, cp, cm = (np.asarray(v, dtype=complex) for v in coords)
    c_atoms = 2 * params.g_a * params.g_b / params.g0**2 * np.abs(np.abs(cp) ** 2 - np.abs(cm) ** 2)
    c_modes = np.abs(np.abs(cs) ** 2 - np.abs(ca) ** 2)
    return c_atoms, c_modes


# --------------------------------------------------------------------------
# trajectory observables
# --------------------------------------------------------------------------

# mode rows restricted to at most one photon per mode, in {11, 10, 01, 00} order
_MODE_QUBIT_ROWS = np.array([4, 3, 1, 0])


class Observables(NamedTuple):
    C_AB: np.ndarray
    C_ab: np.ndarray
    N_AB: np.ndarray
    N_ab: np.ndarray


def reduced_states(states: np.ndarray, manifold, backend=None) -> tuple[np.ndarray, np.ndarray]:
    """Batched (atoms 4x4, modes 9x9) reduced matrices for a ``(nt, dim)`` array."""
    k = backend or kernels.active
    atom_idx, mode_idx = index_maps(manifold)
    psi = k.scatter(np.ascontiguousarray(states, dtype=np.complex128), atom_idx, mode_idx)
    return k.reduced(psi)


def trajectory_observables(states: np.ndarray, manifold, backend=None) -> Observables:
    """Concurrences and log-negativities at every time.

    ``C_ab`` treats the modes as qubits and is only defined when no mode can
    hold two photons (manifolds 0 and 1); it is NaN otherwise.
    """
    k = backend or kernels.active
    rho_atoms, rho_modes = reduced_states(states, manifold, k)
    c_atoms = k.concurrence(rho_atoms)
    n_atoms = k.log_negativity(rho_atoms, 2, 2)
    n_modes = k.log_negativity(rho_modes, 3, 3)
    if manifold in (0, 1):
        sub = np.ascontiguousarray(rho_modes[:, _MODE_QUBIT_ROWS][:, :, _MODE_QUBIT_ROWS])
        c_modes = k.concurrence(sub)
    else:
        c_modes = np.full(len(states), np.nan)
    return Observables(c_atoms, c_modes, n_atoms, n_modes)

"""Time evolution: the numeric propagator, closed-form solutions and
trapping-state checks.

The propagator is the reference. Closed forms evaluate the two-state
solutions in the collective coordinates; where the printed solution and the
solution of the printed equations of motion differ, ``printed=True`` selects
the printed expression (kept for diagnostics).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from . import kernels
from .hilbert import StateVector, get_frame
from .model import CouplingConfig, SystemParams, build_hamiltonian

DEFAULT_T_MAX = 20.0
DEFAULT_T_POINTS = 2001
SECULAR_WARN_RATIO = 5.0


class SecularRegimeWarning(UserWarning):
    """A secular closed form was evaluated with kappa below 5 g0."""


def default_grid(t_max: float = DEFAULT_T_MAX, points: int = DEFAULT_T_POINTS) -> np.ndarray:
    return np.linspace(0.0, t_max, points)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)
    """Amplitudes, shape ``(len(times), dim)``."""
    manifold: int | str = 1

    def __post_init__(self):
        for a in (self.times, self.states):
            a.setflags(write=False)

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.states) ** 2

    def state(self, k: int) -> StateVector:
        return StateVector(self.manifold, self.states[k])

    def __len__(self) -> int:
        return self.times.size


def _check_times(times) -> np.ndarray:
    t = np.atleast_1d(np.array(times, dtype=float))
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a non-empty 1-d grid")
    if not np.all(np.isfinite(t)):
        raise ValueError("times must be finite")
    if t[0] < 0 or np.any(np.diff(t) < 0):
        raise ValueError("times must be ascending and start at t >= 0")
    return t


def is_hermitian(m: np.ndarray, tol: float = 1e-14) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def propagate(M: np.ndarray, psi0: StateVector | np.ndarray, times, manifold=None) -> Trajectory:
    """States ``exp(-i M t) psi0`` on the grid.

    Hermitian ``M`` goes through a unitary eigendecomposition; anything else
    through scaling-and-squaring (``scipy.linalg.expm``) at each time.
    """
    M = np.asarray(M, dtype=np.complex128)
    if isinstance(psi0, StateVector):
        manifold = psi0.manifold if manifold is None else manifold
        c0 = psi0.amplitudes
    else:
        c0 = np.asarray(psi0, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] != c0.size:
        raise ValueError(f"dimension mismatch: M is {M.shape}, psi0 has {c0.size} amplitudes")
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(c0))):
        raise ValueError("non-finite entries in M or psi0")
    t = _check_times(times)
    if is_hermitian(M):
        evals, vecs = np.linalg.eigh(M)
        coef = vecs.conj().T @ c0
        states = kernels.active.spectral_evolve(evals.astype(np.complex128), vecs, coef, t)
    else:
        states = expm(-1j * t[:, None, None] * M[None, :, :]) @ c0
    if manifold is None:
        manifold = {4: 1, 8: 2, 9: "augmented", 1: 0}[c0.size]
    return Trajectory(t, np.ascontiguousarray(states), manifold)


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------


def two_level(coupling: float, detuning: float, c0: np.ndarray, c1: np.ndarray, t):
    """Exact solution of ``i d/dt (c0, c1) = [[0, coupling], [coupling, detuning]] (c0, c1)``."""
    t = np.asarray(t, dtype=float)
    om = np.sqrt(coupling**2 + detuning**2 / 4.0)
    ph = np.exp(-0.5j * detuning * t)
    cs, sn = np.cos(om * t), np.sin(om * t)
    if om == 0.0:
        return c0 * np.ones_like(ph), c1 * np.ones_like(ph)
    k = sn / om
    a = ph * (cs * c0 - 1j * k * (-0.5 * detuning * c0 + coupling * c1))
    b = ph * (cs * c1 - 1j * k * (coupling * c0 + 0.5 * detuning * c1))
    return a, b


def closed_form_single_A(params: SystemParams, init, t, printed: bool = True):
    """(W, X, Y, U) for the atom-mediated single excitation.

    The printed detuned solution uses ``Delta / Omega`` where the equations of
    motion give ``-+ Delta / (2 Omega)``; both agree at Delta = 0.
    ``printed=False`` returns the solution of the equations of motion.
    """
    w0, x0, y0, u0 = (complex(v) for v in init)
    t = np.asarray(t, dtype=float)
    d, g0 = params.delta, params.g0
    om = np.sqrt(2 * g0**2 + d**2 / 4)
    y = y0 * np.exp(1j * d * t)
    u = u0 * np.ones_like(t, dtype=complex)
    if not printed:
        # i d/dt (W, X) = [[0, sqrt2 g0], [sqrt2 g0, -Delta]] (W, X)
        w, x = two_level(np.sqrt(2) * g0, -d, w0, x0, t)
        return w, x, y, u
    ph = np.exp(0.5j * d * t)
    sn = np.sin(om * t)
    rot = np.cos(om * t) + 1j * (d / om) * sn
    mix = -1j * np.sqrt(2) * g0 / om * ph * sn
    return w0 * ph * rot + x0 * mix, x0 * ph * rot + w0 * mix, y, u


def single_A_discrepancy(params: SystemParams, init, times) -> float:
    """Max |printed closed form - propagator| over the grid, in (W, X, Y, U)."""
    fr = get_frame("single_A", params)
    w0, x0, y0, u0 = init
    c0 = fr.amplitudes(np.array([w0, u0, x0, y0], dtype=complex))
    traj = propagate(build_hamiltonian(CouplingConfig.ATOM_MEDIATED, 1, params), c0, times, 1)
    ref = traj.states @ fr.rows.T  # (W, U, X, Y)
    w, x, y, u = closed_form_single_A(params, init, traj.times)
    got = np.stack([w, u, x, y], axis=1)
    return float(np.max(np.abs(got - ref)))


def _warn_secular(kappa: float, scale: float):
    if abs(kappa) < SECULAR_WARN_RATIO * scale:
        warnings.warn(
            f"secular approximation used with kappa={kappa:g} < {SECULAR_WARN_RATIO:g} x {scale:g}",
            SecularRegimeWarning,
            stacklevel=3,
        )


def closed_form_single_B_secular(params: SystemParams, init, t):
    """(C_s, C_a, C_+, C_-) with the u cross-coupling dropped."""
    cs0, ca0, cp0, cm0 = (complex(v) for v in init)
    g0 = params.g0
    _warn_secular(params.kappa, g0)
    w = 2 * params.g_a * params.g_b / g0 if g0 else 0.0
    d, k = params.delta, params.kappa
    # i d/dt (C_+, C_s) = [[0, g0/sqrt2], [g0/sqrt2, kappa - Delta]] (C_+, C_s)
    cp, cs = two_level(g0 / np.sqrt(2), k - d, cp0, cs0, t)
    cm, ca = two_level(w / np.sqrt(2), -k - d, cm0, ca0, t)
    return cs, ca, cp, cm


def _rotation(a0, b0, freq, t, printed):
    t = np.asarray(t, dtype=float)
    c, s = np.cos(freq * t), np.sin(freq * t)
    phase = 1.0 if printed else 1j
    return a0 * c - phase * b0 * s, b0 * c - phase * a0 * s


def closed_form_double_A(params: SystemParams, init, t, printed: bool = False):
    """Atom-mediated double excitation at g_a = g_b, Delta = 0.

    ``init`` and the result are ``(D_w, D_q, D_u, D_z, D_m, D_n, D_a1, D_a2)``.
    (D_w, D_q) rotate at 2g, (D_u, D_z) at 2 sqrt(3) g, the rest are constant.
    The printed (D_w, D_q) solution omits the factor -i of the equations of
    motion; ``printed=True`` reproduces it.
    """
    if not np.isclose(params.g_a, params.g_b, rtol=0, atol=1e-12):
        raise ValueError("closed_form_double_A needs g_a == g_b")
    if params.delta != 0:
        raise ValueError("closed_form_double_A needs delta == 0")
    g = params.g_a
    dw, dq, du, dz, dm, dn, da1, da2 = (complex(v) for v in init)
    t = np.asarray(t, dtype=float)
    w, q = _rotation(dw, dq, 2 * g, t, printed)
    u, z = _rotation(du, dz, 2 * np.sqrt(3) * g, t, False)
    ones = np.ones_like(t, dtype=complex)
    return w, q, u, z, dm * ones, dn * ones, da1 * ones, da2 * ones


def closed_form_double_B_resonant(params: SystemParams, init, t, printed: bool = False):
    """Photon-mediated double excitation at Delta = 0, g_a = g_b.

    ``init`` and result are ``(D~_7, D_beta, D_alpha, D_a)``; the first pair
    rotates at ``sqrt(2 g**2 + kappa**2)``, the other two are constant.
    """
    if params.delta != 0:
        raise ValueError("closed_form_double_B_resonant needs delta == 0")
    if not np.isclose(params.g_a, params.g_b, rtol=0, atol=1e-12):
        raise ValueError("closed_form_double_B_resonant needs g_a == g_b")
    d7, db, dal, da = (complex(v) for v in init)
    t = np.asarray(t, dtype=float)
    om = np.sqrt(2 * params.g_a**2 + params.kappa**2)
    s7, sb = _rotation(d7, db, om, t, printed)
    ones = np.ones_like(t, dtype=complex)
    return s7, sb, dal * ones, da * ones


def closed_form_double_B_secular(params: SystemParams, init, t, printed: bool = False):
    """Photon-mediated double excitation, g_a = g_b, terms at +-2 kappa dropped.

    ``init`` and result are the rotating-frame amplitudes
    ``(D~_eta, D~_lambda, D~_epsilon, D~_theta)``. Each pair obeys
    ``i d/dt (eta, lambda) = [[0, sqrt2 g], [sqrt2 g, Delta - kappa]]`` (and the
    same with ``Delta + kappa`` for (epsilon, theta)); at Delta = +kappa or
    -kappa the matching pair rotates sinusoidally at sqrt(2) g.
    """
    if not np.isclose(params.g_a, params.g_b, rtol=0, atol=1e-12):
        raise ValueError("closed_form_double_B_secular needs g_a == g_b")
    g = params.g_a
    _warn_secular(params.kappa, g)
    de, dl, dp, dt_ = (complex(v) for v in init)
    c = np.sqrt(2) * g
    if printed:
        if np.isclose(params.delta, params.kappa):
            e, lam = _rotation(de, dl, c, t, True)
            p, th = two_level(c, params.delta + params.kappa, dp, dt_, t)
            return e, lam, p, th
        if np.isclose(params.delta, -params.kappa):
            p, th = _rotation(dp, dt_, c, t, True)
            e, lam = two_level(c, params.delta - params.kappa, de, dl, t)
            return e, lam, p, th
    e, lam = two_level(c, params.delta - params.kappa, de, dl, t)
    p, th = two_level(c, params.delta + params.kappa, dp, dt_, t)
    return e, lam, p, th


def secular_frame_phases(params: SystemParams, t) -> np.ndarray:
    """Factors taking (D_eta, D_lambda, D_epsilon, D_theta) into the rotating frame."""
    t = np.asarray(t, dtype=float)
    d, k = params.delta, params.kappa
    sym = np.exp(-1j * (d - 2 * k) * t)
    anti = np.exp(-1j * (d + 2 * k) * t)
    return np.stack([sym, sym, anti, anti], axis=-1)


# --------------------------------------------------------------------------
# trapping and losses
# --------------------------------------------------------------------------


class TrappingVerdict(NamedTuple):
    trapped: bool
    eigenvalue: complex
    residual: float


def is_population_trapping(M: np.ndarray, v: StateVector | np.ndarray, tol: float = 1e-10) -> TrappingVerdict:
    """Whether ``v`` is an eigenvector of ``M`` with a real eigenvalue."""
    c = v.amplitudes if isinstance(v, StateVector) else np.asarray(v, dtype=complex)
    c = c / np.linalg.norm(c)
    mv = M @ c
    lam = complex(np.vdot(c, mv))
    res = float(np.linalg.norm(mv - lam * c))
    return TrappingVerdict(res < tol and abs(lam.imag) < tol, lam, res)


class LeakageReport(NamedTuple):
    doublet: tuple[str, str]
    max_leakage: float
    """Largest population outside the doublet, relative to the current norm."""
    final_norm: float


def _doublets(config: CouplingConfig, manifold, params: SystemParams):
    equal = np.isclose(params.g_a, params.g_b, rtol=0, atol=1e-12)
    out = []
    if manifold == 1:
        if config is CouplingConfig.ATOM_MEDIATED:
            fr = get_frame("single_A", params)
            out.append((("w1", "x1"), fr.rows[[0, 2]]))
        elif equal:
            fr = get_frame("single_B", params)
            out.append((("C_s", "C_+"), fr.rows[[0, 2]]))
            out.append((("C_a", "C_-"), fr.rows[[1, 3]]))
    elif manifold == 2 and equal and params.delta == 0:
        if config is CouplingConfig.ATOM_MEDIATED:
            fr = get_frame("double_A", params)
            out.append((("w", "q"), fr.rows[[0, 1]]))
            out.append((("u", "z"), fr.rows[[2, 3]]))
        else:
            fr = get_frame("double_B_resonant", params)
            out.append((("seven_tilde", "beta"), fr.rows[[0, 1]]))
    return out


def lossy_two_state_check(config, params: SystemParams, psi0: StateVector, times=None, tol: float = 1e-10) -> LeakageReport:
    """Propagate with the loss terms and measure population leaving the doublet
    that contains ``psi0``."""
    config = CouplingConfig.parse(config)
    times = default_grid() if times is None else times
    for names, rows in _doublets(config, psi0.manifold, params):
        inside = np.linalg.norm(rows @ psi0.amplitudes) ** 2
        if abs(inside - psi0.norm**2) <= tol:
            break
    else:
        raise ValueError("psi0 does not lie in a recognised two-state doublet")
    m = build_hamiltonian(config, psi0.manifold, params, losses=True)
    traj = propagate(m, psi0, times)
    n2 = traj.norms**2
    kept = np.linalg.norm(traj.states @ rows.T, axis=1) ** 2
    leak = np.clip(n2 - kept, 0.0, None) / n2
    return LeakageReport(names, float(leak.max()), float(np.sqrt(n2[-1])))

"""Batched numeric kernels shared by the dynamics and entanglement layers.

Every kernel exists twice: a loop form compiled with numba and a vectorised
numpy form. ``QTRANSFER_NUMBA=0`` selects the numpy set; both sets are
importable directly (``numba_kernels`` / ``numpy_kernels``) so tests and the
benchmark can compare them.

Shapes: ``nt`` time points, ``d`` manifold dimension (at most 9). Reduced
states are assembled from a ``(nt, 4, 9)`` amplitude array indexed by atomic
pair state ``{ee, eg, ge, gg}`` and mode pair state ``n_a * 3 + n_b``.
"""

from types import SimpleNamespace

import numpy as np

from ._accel import USE_NUMBA, njit

# sigma_y (x) sigma_y, real in the {ee, eg, ge, gg} ordering
SPIN_FLIP = np.array(
    [[0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0]]
)


# --------------------------------------------------------------------------
# numpy forms
# --------------------------------------------------------------------------


def _np_spectral_evolve(evals, vecs, coef, times):
    phases = np.exp(-1j * np.outer(times, evals)) * coef[None, :]
    return phases @ vecs.T


def _np_scatter(states, atom_idx, mode_idx):
    out = np.zeros((states.shape[0], 4, 9), dtype=np.complex128)
    out[:, atom_idx, mode_idx] = states
    return out


def _np_reduced(psi):
    rho_atoms = np.einsum("tam,tbm->tab", psi, psi.conj())
    rho_modes = np.einsum("tam,tan->tmn", psi, psi.conj())
    return rho_atoms, rho_modes


def _np_concurrence(rhos):
    w, v = np.linalg.eigh(rhos)
    a = v * np.sqrt(np.clip(w, 0.0, None))[:, None, :]
    m = np.swapaxes(a, 1, 2) @ SPIN_FLIP @ a
    s = np.linalg.svd(m, compute_uv=False)
    return np.clip(s[:, 0] - s[:, 1] - s[:, 2] - s[:, 3], 0.0, 1.0)


def _np_log_negativity(rhos, da, db):
    nt = rhos.shape[0]
    pt = rhos.reshape(nt, da, db, da, db).transpose(0, 1, 4, 3, 2).reshape(nt, da * db, da * db)
    mu = np.linalg.eigvalsh(pt)
    neg = np.clip(mu, None, 0.0).sum(axis=1)
    return np.maximum(0.0, np.log2(1.0 - 2.0 * neg))


# --------------------------------------------------------------------------
# numba forms
# --------------------------------------------------------------------------


@njit
def _nb_spectral_evolve(evals, vecs, coef, times):
    nt = times.shape[0]
    d = evals.shape[0]
    out = np.zeros((nt, d), dtype=np.complex128)
    for k in range(nt):
        for j in range(d):
            c = np.exp(-1j * evals[j] * times[k]) * coef[j]
            for i in range(d):
                out[k, i] += vecs[i, j] * c
    return out


@njit
def _nb_scatter(states, atom_idx, mode_idx):
    nt, d = states.shape
    out = np.zeros((nt, 4, 9), dtype=np.complex128)
    for k in range(nt):
        for j in range(d):
            out[k, atom_idx[j], mode_idx[j]] = states[k, j]
    return out


@njit
def _nb_reduced(psi):
    nt = psi.shape[0]
    rho_atoms = np.zeros((nt, 4, 4), dtype=np.complex128)
    rho_modes = np.zeros((nt, 9, 9), dtype=np.complex128)
    for k in range(nt):
        for a in range(4):
            for m in range(9):
                x = psi[k, a, m]
                if x == 0:
                    continue
                for b in range(4):
                    rho_atoms[k, a, b] += x * np.conj(psi[k, b, m])
                for n in range(9):
                    rho_modes[k, m, n] += x * np.conj(psi[k, a, n])
    return rho_atoms, rho_modes


@njit
def _nb_concurrence(rhos):
    nt = rhos.shape[0]
    flip = np.zeros((4, 4), dtype=np.complex128)
    flip[0, 3] = -1.0
    flip[1, 2] = 1.0
    flip[2, 1] = 1.0
    flip[3, 0] = -1.0
    out = np.zeros(nt)
    for k in range(nt):
        w, v = np.linalg.eigh(rhos[k])
        a = np.empty((4, 4), dtype=np.complex128)
        for j in range(4):
            r = np.sqrt(max(w[j], 0.0))
            for i in range(4):
                a[i, j] = v[i, j] * r
        m = a.T @ flip @ a
        s = np.linalg.svd(m)[1]
        c = s[0] - s[1] - s[2] - s[3]
        out[k] = min(max(c, 0.0), 1.0)
    return out


@njit
def _nb_log_negativity(rhos, da, db):
    nt = rhos.shape[0]
    dim = da * db
    out = np.zeros(nt)
    pt = np.empty((dim, dim), dtype=np.complex128)
    for k in range(nt):
        for i in range(da):
            for j in range(db):
                for p in range(da):
                    for q in range(db):
                        pt[i * db + q, p * db + j] = rhos[k, i * db + j, p * db + q]
        mu = np.linalg.eigvalsh(pt)
        neg = 0.0
        for x in mu:
            if x < 0.0:
                neg += x
        out[k] = max(0.0, np.log2(1.0 - 2.0 * neg))
    return out


numpy_kernels = SimpleNamespace(
    name="numpy",
    spectral_evolve=_np_spectral_evolve,
    scatter=_np_scatter,
    reduced=_np_reduced,
    concurrence=_np_concurrence,
    log_negativity=_np_log_negativity,
)

numba_kernels = SimpleNamespace(
    name="numba",
    spectral_evolve=_nb_spectral_evolve,
    scatter=_nb_scatter,
    reduced=_nb_reduced,
    concurrence=_nb_concurrence,
    log_negativity=_nb_log_negativity,
)

active = numba_kernels if USE_NUMBA else numpy_kernels

"""Time the numba and numpy kernel sets on figure-sized workloads.

    python3 benchmarks/bench_kernels.py [--points 2001] [--repeat 5]
"""

import argparse
import time

import numpy as np

from qtransfer import kernels
from qtransfer.hilbert import index_maps
from qtransfer.model import CouplingConfig, SystemParams, build_hamiltonian


def workload(points: int):
    m = build_hamiltonian(CouplingConfig.ATOM_MEDIATED, "augmented", SystemParams())
    evals, vecs = np.linalg.eigh(m)
    rng = np.random.default_rng(0)
    psi0 = rng.normal(size=9) + 1j * rng.normal(size=9)
    coef = vecs.conj().T @ (psi0 / np.linalg.norm(psi0))
    atom_idx, mode_idx = index_maps("augmented")
    return evals.astype(np.complex128), vecs, coef, np.linspace(0, 20, points), atom_idx, mode_idx


def pipeline(k, evals, vecs, coef, times, atom_idx, mode_idx):
    states = k.spectral_evolve(evals, vecs, coef, times)
    ra, rm = k.reduced(k.scatter(states, atom_idx, mode_idx))
    return k.concurrence(ra), k.log_negativity(ra, 2, 2), k.log_negativity(rm, 3, 3)


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2001)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    data = workload(args.points)
    t0 = time.perf_counter()
    ref = pipeline(kernels.numba_kernels, *data)  # includes compilation or cache load
    warm = time.perf_counter() - t0
    got = pipeline(kernels.numpy_kernels, *data)
    diff = max(float(np.max(np.abs(a - b))) for a, b in zip(ref, got))
    print(f"grid points: {args.points}   first numba call (compile/cache): {warm:.3f} s   max |numba - numpy|: {diff:.1e}")
    print(f"{'stage':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    states = kernels.numpy_kernels.spectral_evolve(*data[:4])
    psi = kernels.numpy_kernels.scatter(states, data[4], data[5])
    ra, rm = kernels.numpy_kernels.reduced(psi)
    stages = {
        "spectral_evolve": lambda k: k.spectral_evolve(*data[:4]),
        "scatter+reduced": lambda k: k.reduced(k.scatter(states, data[4], data[5])),
        "concurrence": lambda k: k.concurrence(ra),
        "negativity 2x2": lambda k: k.log_negativity(ra, 2, 2),
        "negativity 3x3": lambda k: k.log_negativity(rm, 3, 3),
        "full pipeline": lambda k: pipeline(k, *data),
    }
    for name, fn in stages.items():
        a = best_of(lambda: fn(kernels.numpy_kernels), args.repeat)
        b = best_of(lambda: fn(kernels.numba_kernels), args.repeat)
        print(f"{name:<18}{a * 1e3:>12.2f}{b * 1e3:>12.2f}{a / b:>10.2f}")


if __name__ == "__main__":
    main()

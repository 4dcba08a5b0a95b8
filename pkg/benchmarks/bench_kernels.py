"""Time the numba kernels against their pure-numpy counterparts.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called once untimed (numba compiles or loads its cache),
then the best of ``--repeat`` runs is reported together with the max
absolute difference between the two backends' outputs.
"""

import argparse
import time

import numpy as np

from lackawalk import kernels
from lackawalk.classical import lazy_interpolated_matrix, walk_matrix
from lackawalk.coined import CoinConfig, initial_state_lazy
from lackawalk.graphs import MarkedInstance, torus
from lackawalk.spectral import discriminant
from lackawalk.szegedy import EdgeSpace


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    g = torus(64, 64)
    inst = MarkedInstance(g, 0)
    cfg = CoinConfig()
    psi = initial_state_lazy(inst, cfg)
    weights = cfg.weights(g)

    def coin_steps(k):
        def run():
            out = psi
            for _ in range(50):
                out = k.coin_step(out, g.neighbors, g.reverse_index, weights, 0, kernels.ORACLE_G)
            return out
        return run
    yield "coin_step x50, torus(64,64)", coin_steps

    small = torus(24, 24)
    space = EdgeSpace(lazy_interpolated_matrix(small, 0, 4 / 576, 1 - 1 / 576))
    w = space.lift(np.full(small.n_vertices, 1 / np.sqrt(small.n_vertices))).astype(np.complex128)

    def szegedy_steps(k):
        def run():
            out = w
            for _ in range(50):
                out = k.szegedy_step(out, space.slots, space.blocks, space.swap)
            return out
        return run
    yield "szegedy_step x50, torus(24,24)", szegedy_steps

    d = discriminant(lazy_interpolated_matrix(torus(16, 16), 0, 4 / 256, 1 - 1 / 256))

    def eig(k):
        def run():
            diag, sub, q = k.tridiagonalize(d)
            vals, _, _ = k.ql_implicit(diag, sub, q, 50 * d.shape[0])
            return vals
        return run
    yield "eigensolver, 256x256", eig

    p = walk_matrix(torus(32, 32))
    cdf = np.cumsum(p, axis=1)
    last = np.array([np.flatnonzero(r > 0)[-1] for r in p], dtype=np.int64)
    rng = np.random.default_rng(0)
    pos = rng.integers(0, p.shape[0], 200_000)
    u = rng.random(pos.size)

    def mc(k):
        def run():
            return k.mc_advance(pos, u, cdf, last)
        return run
    yield "mc_advance, 2e5 walkers", mc


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if "numba" not in kernels.KERNELS:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':<34}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max |diff|':>13}")
    for name, make in cases():
        fn_np, fn_nb = make(kernels.KERNELS["numpy"]), make(kernels.KERNELS["numba"])
        t_np, t_nb = best_of(fn_np, args.repeat), best_of(fn_nb, args.repeat)
        diff = float(np.max(np.abs(np.asarray(fn_np()) - np.asarray(fn_nb()))))
        print(f"{name:<34}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.2f}{diff:>13.2e}")


if __name__ == "__main__":
    main()

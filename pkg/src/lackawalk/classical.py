"""Classical walk matrices and hitting times.

All matrices are dense ``(N, N)`` float arrays, row-stochastic.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .graphs import RegularGraph

ROW_SUM_TOL = 1e-12


def check_stochastic(p: np.ndarray, tol: float = ROW_SUM_TOL) -> None:
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {p.shape}")
    if np.any(p < 0):
        raise ValueError("transition matrix has negative entries")
    dev = np.max(np.abs(p.sum(axis=1) - 1.0))
    if dev > tol:
        raise ValueError(f"rows do not sum to 1 (max deviation {dev:.3g})")


def _check_s(s: float) -> None:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"interpolation parameter s must lie in [0, 1], got {s}")


def walk_matrix(g: RegularGraph) -> np.ndarray:
    n, d = g.n_vertices, g.degree
    p = np.zeros((n, n))
    p[np.repeat(np.arange(n), d), g.neighbors.ravel()] = 1.0 / d
    return p


def absorbing_matrix(p: np.ndarray, m: int) -> np.ndarray:
    out = p.copy()
    out[m] = 0.0
    out[m, m] = 1.0
    return out


def interpolated_matrix(p: np.ndarray, m: int, s: float) -> np.ndarray:
    """P(s) = (1 - s) P + s P'; only row ``m`` changes."""
    _check_s(s)
    out = p.copy()
    out[m] = (1.0 - s) * p[m]
    out[m, m] += s
    return out


def lazy_matrix(g: RegularGraph, ell: float) -> np.ndarray:
    if ell < 0:
        raise ValueError(f"self-loop weight must be non-negative, got {ell}")
    d = g.degree
    return d / (d + ell) * walk_matrix(g) + ell / (d + ell) * np.eye(g.n_vertices)


def lazy_interpolated_matrix(g: RegularGraph, m: int, ell: float, s: float) -> np.ndarray:
    return interpolated_matrix(lazy_matrix(g, ell), m, s)


def stationary_distribution(p: np.ndarray) -> np.ndarray:
    """Left Perron vector of an irreducible chain, via a bordered linear solve."""
    n = p.shape[0]
    a = np.vstack([(p.T - np.eye(n)), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return pi


def uniform_unmarked(n: int, m: int) -> np.ndarray:
    """The distribution pi-bar: uniform over every vertex except ``m``."""
    pi = np.full(n, 1.0 / (n - 1))
    pi[m] = 0.0
    return pi


def hitting_times(p: np.ndarray, m: int) -> np.ndarray:
    """Expected absorption time into ``m`` from every vertex (0 at ``m``)."""
    n = p.shape[0]
    keep = np.arange(n) != m
    # backward reachability: every vertex must have a path into m
    reach = np.zeros(n, dtype=bool)
    reach[m] = True
    frontier = [m]
    while frontier:
        nxt = np.flatnonzero((p[:, frontier] > 0).any(axis=1) & ~reach)
        reach[nxt] = True
        frontier = list(nxt)
    if not reach.all():
        raise np.linalg.LinAlgError(f"vertex {m} is not reachable from every vertex (singular system)")
    q = p[np.ix_(keep, keep)]
    h = np.zeros(n)
    h[keep] = np.linalg.solve(np.eye(n - 1) - q, np.ones(n - 1))
    return h


def hitting_time_exact(p: np.ndarray, m: int, start: Optional[np.ndarray] = None) -> float:
    """Mean hitting time of ``m`` with the start drawn from ``start`` (default pi-bar)."""
    if start is None:
        start = uniform_unmarked(p.shape[0], m)
    return float(np.asarray(start) @ hitting_times(p, m))


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n_trials: int
    truncated: int
    max_steps: int


_BLOCK = 8192


def _simulate_block(cdf, last, start_cdf, m, n_walkers, cap, seed_seq):
    rng = np.random.default_rng(seed_seq)
    pos = np.searchsorted(start_cdf, rng.random(n_walkers), side="right")
    pos = np.minimum(pos, len(start_cdf) - 1)
    steps = np.zeros(n_walkers, dtype=np.int64)
    active = np.flatnonzero(pos != m)
    t = 0
    while active.size and t < cap:
        t += 1
        pos[active] = kernels.mc_advance(pos[active], rng.random(active.size), cdf, last)
        steps[active] = t
        active = active[pos[active] != m]
    return steps, int(active.size)


def hitting_time_monte_carlo(p: np.ndarray, m: int, start: Optional[np.ndarray] = None,
                             n_trials: int = 100_000, seed: int = 0, jobs: int = 1) -> MonteCarloEstimate:
    """Monte Carlo hitting time with standard error.

    Trials are split into fixed blocks, each with its own substream spawned
    from ``seed``, so the result does not depend on ``jobs``.  Walks are cut
    off after ``100 N^2`` steps and counted in ``truncated``.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    n = p.shape[0]
    if start is None:
        start = uniform_unmarked(n, m)
    cdf = np.cumsum(p, axis=1)
    last = np.array([np.flatnonzero(row > 0)[-1] for row in p], dtype=np.int64)
    start_cdf = np.cumsum(start)
    start_cdf[-1] = 1.0
    cap = 100 * n * n
    sizes = [min(_BLOCK, n_trials - i) for i in range(0, n_trials, _BLOCK)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    args = [(cdf, last, start_cdf, m, k, cap, ss) for k, ss in zip(sizes, seeds)]
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(lambda a: _simulate_block(*a), args))
    else:
        results = [_simulate_block(*a) for a in args]
    steps = np.concatenate([r[0] for r in results])
    truncated = sum(r[1] for r in results)
    stderr = float(steps.std(ddof=1) / np.sqrt(n_trials)) if n_trials > 1 else float("nan")
    return MonteCarloEstimate(float(steps.mean()), stderr, n_trials, truncated, cap)

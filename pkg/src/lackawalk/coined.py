"""Lackadaisical quantum walk on the coin space H_N (x) H_{d+1}.

A coin state is a complex array of shape ``(N, d + 1)``: column ``i < d`` holds
the amplitude of the arc to the i-th neighbor and column ``d`` the self-loop.
Steps are matrix-free and cost O(dN).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .graphs import MarkedInstance, RegularGraph

DENSE_LIMIT = 4096


@dataclass(frozen=True)
class CoinConfig:
    """Self-loop weight; ``None`` means the default d/N."""

    ell: Optional[float] = None

    def resolve(self, g: RegularGraph) -> float:
        return g.degree / g.n_vertices if self.ell is None else float(self.ell)

    def coin(self, g: RegularGraph) -> np.ndarray:
        return coin_vector(g.degree, self.resolve(g))

    def weights(self, g: RegularGraph) -> np.ndarray:
        """``(1, sqrt(ell), ell) / (d + ell)``: entries of |c><c| on arc-arc, arc-loop and loop-loop."""
        ell = self.resolve(g)
        if ell < 0:
            raise ValueError(f"self-loop weight must be non-negative, got {ell}")
        return np.array([1.0, np.sqrt(ell), ell]) / (g.degree + ell)

    def interpolation(self, g: RegularGraph) -> float:
        """The matching interpolation parameter s = 1 - ell/d."""
        return 1.0 - self.resolve(g) / g.degree


def coin_vector(d: int, ell: float) -> np.ndarray:
    if ell < 0:
        raise ValueError(f"self-loop weight must be non-negative, got {ell}")
    c = np.empty(d + 1)
    c[:d] = 1.0
    c[d] = np.sqrt(ell)
    return c / np.sqrt(d + ell)


def coin_perp(d: int, ell: float) -> np.ndarray:
    """Unit vector orthogonal to the coin inside span{uniform arcs, self-loop}."""
    c = np.empty(d + 1)
    c[:d] = np.sqrt(ell / (d + ell)) / np.sqrt(d)
    c[d] = -np.sqrt(d / (d + ell))
    return c


def _as_state(state, g: RegularGraph) -> np.ndarray:
    psi = np.asarray(state, dtype=np.complex128)
    shape = (g.n_vertices, g.degree + 1)
    if psi.size != shape[0] * shape[1]:
        raise ValueError(f"state has {psi.size} amplitudes, expected {shape[0] * shape[1]}")
    return psi.reshape(shape)


def initial_state_lazy(inst: MarkedInstance, cfg: CoinConfig = CoinConfig()) -> np.ndarray:
    """Uniform superposition of ``|x> (x) |c>`` over the unmarked vertices."""
    g = inst.graph
    if g.n_vertices < 2:
        raise ValueError("need at least two vertices")
    psi = np.tile(cfg.coin(g).astype(np.complex128), (g.n_vertices, 1)) / np.sqrt(g.n_vertices - 1)
    psi[inst.marked] = 0.0
    return psi


def apply_coin(state, g: RegularGraph, cfg: CoinConfig = CoinConfig()) -> np.ndarray:
    psi = _as_state(state, g)
    c = cfg.coin(g)
    return 2.0 * (psi @ c)[:, None] * c[None, :] - psi


def apply_shift(state, g: RegularGraph) -> np.ndarray:
    psi = _as_state(state, g)
    d = g.degree
    out = np.empty_like(psi)
    out[:, :d] = psi[g.neighbors, g.reverse_index]
    out[:, d] = psi[:, d]
    return out


def apply_oracle_g(state, inst: MarkedInstance) -> np.ndarray:
    psi = _as_state(state, inst.graph).copy()
    psi[inst.marked] *= -1.0
    return psi


def apply_oracle_ghat(state, inst: MarkedInstance) -> np.ndarray:
    """Reflect the marked block about the complement of span{uniform arcs, self-loop}."""
    psi = _as_state(state, inst.graph).copy()
    d = inst.d
    arcs = psi[inst.marked, :d]
    psi[inst.marked, :d] = arcs - 2.0 * arcs.mean()
    psi[inst.marked, d] *= -1.0
    return psi


def _step(state, inst, cfg, oracle):
    g = inst.graph
    psi = _as_state(state, g)
    return kernels.coin_step(psi, g.neighbors, g.reverse_index, cfg.weights(g), inst.marked, oracle)


def step_L(state, inst: MarkedInstance, cfg: CoinConfig = CoinConfig()) -> np.ndarray:
    """One step of L = S (I (x) C) G."""
    return _step(state, inst, cfg, kernels.ORACLE_G)


def step_Lhat(state, inst: MarkedInstance, cfg: CoinConfig = CoinConfig()) -> np.ndarray:
    """One step of the variant walk with the modified oracle G-hat."""
    return _step(state, inst, cfg, kernels.ORACLE_GHAT)


def step_W(state, g: RegularGraph, cfg: CoinConfig = CoinConfig()) -> np.ndarray:
    """Walk operator without any oracle."""
    psi = _as_state(state, g)
    return kernels.coin_step(psi, g.neighbors, g.reverse_index, cfg.weights(g), -1, kernels.ORACLE_NONE)


class Walker:
    """Iterates a coined walk from a start state, holding the current state.

    ``oracle`` is ``"G"`` for the lackadaisical walk and ``"Ghat"`` for the variant.
    """

    def __init__(self, inst: MarkedInstance, cfg: CoinConfig = CoinConfig(), oracle: str = "G", state=None):
        codes = {"G": kernels.ORACLE_G, "Ghat": kernels.ORACLE_GHAT, "none": kernels.ORACLE_NONE}
        self.inst = inst
        self.code = codes[oracle]
        self.weights = cfg.weights(inst.graph)
        self.t = 0
        self.state = initial_state_lazy(inst, cfg) if state is None else _as_state(state, inst.graph).copy()

    def step(self) -> np.ndarray:
        g = self.inst.graph
        self.state = kernels.coin_step(self.state, g.neighbors, g.reverse_index, self.weights,
                                       self.inst.marked, self.code)
        self.t += 1
        return self.state

    def __iter__(self):
        yield self.t, self.state
        while True:
            yield self.t + 1, self.step()


def success_probability(state, inst: MarkedInstance) -> float:
    psi = _as_state(state, inst.graph)
    return float(np.sum(np.abs(psi[inst.marked]) ** 2))


def trajectory(inst: MarkedInstance, t_max: int, cfg: CoinConfig = CoinConfig(), oracle: str = "G"):
    """Rows ``(t, success_probability, norm)`` for t = 0..t_max."""
    rows = []
    for t, psi in Walker(inst, cfg, oracle):
        rows.append((t, success_probability(psi, inst), float(np.linalg.norm(psi))))
        if t >= t_max:
            break
    return rows


# ---------------------------------------------------------------------------
# dense operators (test oracles, guarded by size)


def _guard(dim: int) -> None:
    if dim > DENSE_LIMIT:
        raise ValueError(f"dense operator of dimension {dim} exceeds the limit {DENSE_LIMIT}")


def dense_shift(g: RegularGraph) -> np.ndarray:
    n, d = g.n_vertices, g.degree
    k = d + 1
    _guard(n * k)
    s = np.zeros((n * k, n * k))
    for x in range(n):
        s[x * k + d, x * k + d] = 1.0
        for i in range(d):
            y, j = g.neighbors[x, i], g.reverse_index[x, i]
            s[y * k + j, x * k + i] = 1.0
    return s


def dense_coin(g: RegularGraph, cfg: CoinConfig = CoinConfig()) -> np.ndarray:
    _guard(g.n_vertices * (g.degree + 1))
    c = cfg.coin(g)
    return np.kron(np.eye(g.n_vertices), 2.0 * np.outer(c, c) - np.eye(g.degree + 1))


def dense_oracle(inst: MarkedInstance, kind: str = "G") -> np.ndarray:
    n, d = inst.n, inst.d
    k = d + 1
    _guard(n * k)
    out = np.eye(n * k)
    block = slice(inst.marked * k, (inst.marked + 1) * k)
    if kind == "G":
        out[block, block] = -np.eye(k)
    elif kind == "Ghat":
        plus = np.zeros(k)
        plus[:d] = 1.0 / np.sqrt(d)
        loop = np.zeros(k)
        loop[d] = 1.0
        out[block, block] = np.eye(k) - 2.0 * (np.outer(plus, plus) + np.outer(loop, loop))
    else:
        raise ValueError(f"unknown oracle {kind!r}")
    return out


def dense_walk(inst: MarkedInstance, cfg: CoinConfig = CoinConfig(), kind: str = "G") -> np.ndarray:
    """Explicit (d+1)N x (d+1)N matrix of the walk with oracle ``kind``."""
    return dense_shift(inst.graph) @ dense_coin(inst.graph, cfg) @ dense_oracle(inst, kind)

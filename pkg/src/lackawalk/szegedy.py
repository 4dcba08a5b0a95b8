"""Szegedy walks SWAP . Ref(A) on the reduced edge support of a stochastic matrix.

An edge state is a complex vector indexed by the support pairs
``{(x, y) : M[x, y] > 0 or M[y, x] > 0}`` in lexicographic order; the walk
never leaves this subspace, which has at most (d + 1) N pairs for the walks
used here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .classical import (hitting_time_exact, interpolated_matrix, lazy_interpolated_matrix,
                        uniform_unmarked, walk_matrix)
from .coined import CoinConfig, Walker
from .graphs import MarkedInstance
from .spectral import UNIT_TOL, Spectrum, discriminant, eigendecompose

DENSE_LIMIT = 4096
PERP_TOL = 1e-12


class SzegedyError(ValueError):
    pass


class EdgeSpace:
    """Support pairs of a stochastic matrix in CSR layout (grouped by tail vertex).

    ``slots[x]`` lists the pair indices with tail ``x`` (padded with ``size``)
    and ``blocks[x]`` the matching block 2 sqrt(w w^T) - I of Ref(A), with
    w = M[x, .] on the support.  Forming each entry as the square root of a
    product keeps uniform rows exact (sqrt(1/4) = 1/2), which removes the
    ulp-per-step norm bias that 2 sqrt(w_i) sqrt(w_j) would introduce.
    """

    def __init__(self, m: np.ndarray):
        m = np.asarray(m, dtype=np.float64)
        self.matrix = m
        self.n = m.shape[0]
        mask = (m > 0) | (m.T > 0)
        xs, ys = np.nonzero(mask)
        self.pairs = np.column_stack([xs, ys])
        self.offsets = np.concatenate([[0], np.cumsum(mask.sum(axis=1))]).astype(np.int64)
        self.sqrt_w = np.sqrt(m[xs, ys])
        lookup = np.full((self.n, self.n), -1, dtype=np.int64)
        lookup[xs, ys] = np.arange(len(xs))
        self._lookup = lookup
        self.swap = lookup[ys, xs]
        degs = np.diff(self.offsets)
        kmax = int(degs.max())
        self.slots = np.full((self.n, kmax), len(xs), dtype=np.int64)
        self.blocks = np.zeros((self.n, kmax, kmax))
        for x in range(self.n):
            a, b = self.offsets[x], self.offsets[x + 1]
            w = m[x, ys[a:b]]
            self.slots[x, : b - a] = np.arange(a, b)
            self.blocks[x, : b - a, : b - a] = 2.0 * np.sqrt(np.outer(w, w)) - np.eye(b - a)

    @property
    def size(self) -> int:
        return self.pairs.shape[0]

    def index(self, x: int, y: int) -> int:
        k = self._lookup[x, y]
        if k < 0:
            raise SzegedyError(f"pair ({x}, {y}) is outside the support")
        return int(k)

    def lift(self, v) -> np.ndarray:
        """T v = sum_x v_x |x, M_x>."""
        v = np.asarray(v)
        return (self.sqrt_w * v[self.pairs[:, 0]]).astype(np.complex128)

    def lower(self, psi) -> np.ndarray:
        """T^dagger psi."""
        return np.add.reduceat(self.sqrt_w * np.asarray(psi), self.offsets[:-1])

    def apply_swap(self, psi) -> np.ndarray:
        return np.asarray(psi)[self.swap]

    def apply_reflection(self, psi) -> np.ndarray:
        """Ref(A) = 2 T T^dagger - I."""
        return 2.0 * self.lift(self.lower(psi)) - psi

    def step(self, psi) -> np.ndarray:
        psi = np.asarray(psi, dtype=np.complex128)
        if psi.shape != (self.size,):
            raise SzegedyError(f"edge state must have shape ({self.size},), got {psi.shape}")
        return kernels.szegedy_step(psi, self.slots, self.blocks, self.swap)

    def T_matrix(self) -> np.ndarray:
        t = np.zeros((self.size, self.n))
        t[np.arange(self.size), self.pairs[:, 0]] = self.sqrt_w
        return t

    def dense_U(self) -> np.ndarray:
        if self.size > DENSE_LIMIT:
            raise SzegedyError(f"dense operator of dimension {self.size} exceeds {DENSE_LIMIT}")
        t = self.T_matrix()
        return (2.0 * t @ t.T - np.eye(self.size))[self.swap]


def dense_full_U(m: np.ndarray) -> np.ndarray:
    """U = SWAP (2 T T^T - I) on the whole N^2-dimensional space, basis index x*N + y."""
    n = m.shape[0]
    if n * n > DENSE_LIMIT:
        raise SzegedyError(f"dense N^2 operator too large for N={n}")
    t = np.zeros((n * n, n))
    for x in range(n):
        t[x * n:(x + 1) * n, x] = np.sqrt(m[x])
    swap = np.arange(n * n).reshape(n, n).T.ravel()
    return (2.0 * t @ t.T - np.eye(n * n))[swap]


def embed_full(space: EdgeSpace, psi) -> np.ndarray:
    out = np.zeros(space.n * space.n, dtype=np.complex128)
    out[space.pairs[:, 0] * space.n + space.pairs[:, 1]] = psi
    return out


# ---------------------------------------------------------------------------
# eigenpairs


@dataclass(frozen=True, eq=False)
class SzegedyEigenpair:
    """Eigenvector of U with eigenvalue ``exp(i * sign * theta)``, lifted from column ``k``."""

    theta: float
    sign: int
    vector: np.ndarray
    k: int

    @property
    def eigenvalue(self) -> complex:
        return complex(np.exp(1j * self.sign * self.theta))


def perp_vector(space: EdgeSpace, a: np.ndarray) -> Optional[np.ndarray]:
    """Unit vector ``(T|lam>)^perp`` in span{a, SWAP a}, orthogonal to ``a``.

    The sign is chosen so that ``(a + i perp)/sqrt(2)`` has eigenvalue
    ``exp(+i theta)``.  Returns ``None`` when SWAP a is parallel to a.
    """
    b = space.apply_swap(a)
    r = b - np.vdot(a, b) * a
    nr = np.linalg.norm(r)
    if nr < PERP_TOL:
        return None
    return -r / nr


def lift_eigenpairs(spec: Spectrum, space: EdgeSpace) -> list:
    """Eigenvectors of U(M) built from the discriminant spectrum of M.

    Non-unit eigenvalues lam = cos(theta) give the pair
    ``(T|lam> +- i (T|lam>)^perp) / sqrt(2)``; lam = +-1 gives ``T|lam>`` alone.
    """
    out = []
    for k, lam in enumerate(spec.eigenvalues):
        a = space.lift(spec.eigenvectors[:, k])
        if abs(lam - 1.0) < UNIT_TOL:
            out.append(SzegedyEigenpair(0.0, 0, a, k))
            continue
        if abs(lam + 1.0) < UNIT_TOL:
            out.append(SzegedyEigenpair(np.pi, 1, a, k))
            continue
        perp = perp_vector(space, a)
        if perp is None:
            raise SzegedyError(f"SWAP T|lam_{k}> is parallel to T|lam_{k}> although lam = {lam:.6g} is not +-1")
        theta = float(np.arccos(np.clip(lam, -1.0, 1.0)))
        out.append(SzegedyEigenpair(theta, 1, (a + 1j * perp) / np.sqrt(2.0), k))
        out.append(SzegedyEigenpair(theta, -1, (a - 1j * perp) / np.sqrt(2.0), k))
    return out


def cotangent_qht_direct(pairs: list, w) -> float:
    """sqrt(sum |<phi|w>|^2 cot^2(theta/2)) over the eigenpairs with eigenvalue != 1."""
    total = 0.0
    for ep in pairs:
        if ep.theta < UNIT_TOL:
            continue
        total += abs(np.vdot(ep.vector, w)) ** 2 / np.tan(ep.theta / 2.0) ** 2
    return float(np.sqrt(total))


def evolve_spectral(pairs: list, w, t: int) -> np.ndarray:
    """U^t w via the eigen-expansion of ``w`` (exact for w in the lifted span)."""
    out = np.zeros_like(np.asarray(w, dtype=np.complex128))
    for ep in pairs:
        out += np.vdot(ep.vector, w) * np.exp(1j * ep.sign * ep.theta * t) * ep.vector
    return out


# ---------------------------------------------------------------------------
# the isometry E and its arc-rule extension


def coin_embedding(space: EdgeSpace, inst: MarkedInstance):
    """Flat coin index and sign for each support pair: (x, y_i) -> |x, e_i>,
    (x, x) -> +|x, loop>, and (m, m) -> -|m, loop>."""
    g = inst.graph
    d = g.degree
    k = d + 1
    slot = np.full((g.n_vertices, g.n_vertices), -1, dtype=np.int64)
    slot[np.repeat(np.arange(g.n_vertices), d), g.neighbors.ravel()] = np.tile(np.arange(d), g.n_vertices)
    xs, ys = space.pairs[:, 0], space.pairs[:, 1]
    diag = xs == ys
    s = np.where(diag, d, slot[xs, ys])
    if np.any(s < 0):
        bad = space.pairs[np.flatnonzero(s < 0)[0]]
        raise SzegedyError(f"support pair ({bad[0]}, {bad[1]}) is neither an arc nor a self-loop")
    sign = np.ones(space.size)
    sign[diag & (xs == inst.marked)] = -1.0
    return xs * k + s, sign


def isometry_E(psi, space: EdgeSpace, inst: MarkedInstance) -> np.ndarray:
    """Edge state -> coin state of shape (N, d + 1)."""
    idx, sign = coin_embedding(space, inst)
    out = np.zeros(inst.n * (inst.d + 1), dtype=np.complex128)
    out[idx] = sign * np.asarray(psi)
    return out.reshape(inst.n, inst.d + 1)


def isometry_E_adjoint(state, space: EdgeSpace, inst: MarkedInstance) -> np.ndarray:
    idx, sign = coin_embedding(space, inst)
    flat = np.asarray(state, dtype=np.complex128).ravel()
    return sign * flat[idx]


# ---------------------------------------------------------------------------
# the pair of interpolated walks P(s), P-hat(s)


@dataclass
class InterpolatedWalks:
    """P(s) and P-hat(s) for one marked instance, with their edge spaces.

    Defaults are ell = d/N and s = 1 - ell/d; the exact correspondences
    between the coined and Szegedy walks hold only for that choice.
    """

    inst: MarkedInstance
    ell: Optional[float] = None
    s: Optional[float] = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        g = self.inst.graph
        if self.ell is None:
            self.ell = g.degree / g.n_vertices
        if self.s is None:
            self.s = 1.0 - self.ell / g.degree
        self.P = walk_matrix(g)
        self.P_s = interpolated_matrix(self.P, self.inst.marked, self.s)
        self.P_hat_s = lazy_interpolated_matrix(g, self.inst.marked, self.ell, self.s)
        self.space = EdgeSpace(self.P_s)
        self.space_hat = EdgeSpace(self.P_hat_s)
        self.pibar = uniform_unmarked(g.n_vertices, self.inst.marked)

    @property
    def coin_config(self) -> CoinConfig:
        return CoinConfig(self.ell)

    def hitting_time(self) -> float:
        if "ht" not in self._cache:
            self._cache["ht"] = hitting_time_exact(self.P, self.inst.marked)
        return self._cache["ht"]

    def spectrum(self) -> Spectrum:
        if "spec" not in self._cache:
            self._cache["spec"] = eigendecompose(discriminant(self.P_s))
        return self._cache["spec"]

    def spectrum_hat(self) -> Spectrum:
        if "spec_hat" not in self._cache:
            self._cache["spec_hat"] = eigendecompose(discriminant(self.P_hat_s))
        return self._cache["spec_hat"]

    def init_ip(self) -> np.ndarray:
        return self.space.lift(np.sqrt(self.pibar))

    def init_ip_hat(self) -> np.ndarray:
        return self.space_hat.lift(np.sqrt(self.pibar))


# ---------------------------------------------------------------------------
# R1 and R2


def support_embedding(space: EdgeSpace, space_hat: EdgeSpace) -> np.ndarray:
    """0/1 matrix including the support of ``space`` into that of ``space_hat``."""
    j = np.zeros((space_hat.size, space.size))
    for i, (x, y) in enumerate(space.pairs):
        j[space_hat.index(int(x), int(y)), i] = 1.0
    return j


def eigen_frame(space: EdgeSpace, vectors: np.ndarray):
    """Orthonormal frame {T|v_k>, (T|v_k>)^perp} of span(A + SWAP A).

    Returns the frame as columns, plus for each column its source index k and
    whether it is the perp partner (1) or T|v_k> itself (0).
    """
    cols, keys = [], []
    for k in range(vectors.shape[1]):
        a = space.lift(vectors[:, k]).real
        cols.append(a)
        keys.append((k, 0))
        p = perp_vector(space, a)
        if p is not None:
            cols.append(p)
            keys.append((k, 1))
    return np.array(cols).T, keys


class FrameIsometries:
    """R1 and R2 between the edge spaces of P(s) and P-hat(s).

    R1 sends T|lam_k> to T-hat|lam_k> and (T|lam_k>)^perp to its hatted
    counterpart, so it carries every eigenvector phi_k^+- of U(P(s)) to the
    matching eigenvector of U(P-hat(s)).  R2 is the orthogonal projector onto
    span(A + SWAP A) of P(s), obtained from an SVD of [T, SWAP T] and hence
    independent of the eigensolver.  Both need the two discriminants to share
    eigenvectors, which holds for ell = d/N, s = 1 - 1/N.
    """

    def __init__(self, walks: InterpolatedWalks):
        vecs = walks.spectrum().eigenvectors
        self.space, self.space_hat = walks.space, walks.space_hat
        f, keys = eigen_frame(walks.space, vecs)
        fh, keys_hat = eigen_frame(walks.space_hat, vecs)
        shared = sorted(set(keys) & set(keys_hat))
        pos = {key: i for i, key in enumerate(keys)}
        pos_hat = {key: i for i, key in enumerate(keys_hat)}
        self.frame = f
        self.dropped = len(keys) - len(shared)
        self.r1 = fh[:, [pos_hat[key] for key in shared]] @ f[:, [pos[key] for key in shared]].T
        t = walks.space.T_matrix()
        u, sv, _ = np.linalg.svd(np.hstack([t, t[walks.space.swap]]), full_matrices=False)
        rank = int(np.sum(sv > 1e-10 * sv[0]))
        self.r2 = u[:, :rank] @ u[:, :rank].T
        self.embedding = support_embedding(walks.space, walks.space_hat)

    def apply_r1(self, psi):
        """Returns ``(R1 psi, truncated)`` with ``truncated`` the squared norm of psi outside span(A + SWAP A)."""
        psi = np.asarray(psi)
        inside = self.frame.T @ psi
        truncated = float(max(np.vdot(psi, psi).real - np.vdot(inside, inside).real, 0.0))
        return self.r1 @ psi, truncated

    def apply_r2(self, psi) -> np.ndarray:
        return self.r2 @ np.asarray(psi)

    def operator_distance(self) -> float:
        """Largest singular value of R1 - J R2, with J the support inclusion."""
        return float(np.linalg.norm(self.r1 - self.embedding @ self.r2, 2))


# ---------------------------------------------------------------------------
# distances between the lackadaisical walk and the interpolated walk


@dataclass(frozen=True)
class Theorem2Distance:
    t: int
    d_exact: float
    d_embed: float

    @property
    def d_total(self) -> float:
        return self.d_exact + self.d_embed


def theorem2_distances(walks: InterpolatedWalks, t_max: int) -> list:
    """Distances for t = 0..t_max.

    ``d_exact`` compares L^t|init_lazy> with E U(P-hat(s))^t |init_ip-hat>
    (zero up to roundoff on locally arc-transitive graphs); ``d_embed``
    compares the latter with U(P(s))^t |init_ip> carried into coin space by
    the same arc rule as E.
    """
    inst = walks.inst
    walker = Walker(inst, walks.coin_config, "G")
    psi_hat = walks.init_ip_hat()
    psi = walks.init_ip()
    idx_hat, sign_hat = coin_embedding(walks.space_hat, inst)
    idx, sign = coin_embedding(walks.space, inst)
    dim = inst.n * (inst.d + 1)
    out = []
    for t in range(t_max + 1):
        if t:
            walker.step()
            psi_hat = walks.space_hat.step(psi_hat)
            psi = walks.space.step(psi)
        e_hat = np.zeros(dim, dtype=np.complex128)
        e_hat[idx_hat] = sign_hat * psi_hat
        e_base = np.zeros(dim, dtype=np.complex128)
        e_base[idx] = sign * psi
        out.append(Theorem2Distance(t, float(np.linalg.norm(walker.state.ravel() - e_hat)),
                                    float(np.linalg.norm(e_hat - e_base))))
    return out


def theorem2_distance(walks: InterpolatedWalks, t: int) -> Theorem2Distance:
    return theorem2_distances(walks, t)[-1]

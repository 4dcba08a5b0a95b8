"""Regular graphs with a fixed arc ordering, family generators and
brute-force symmetry checks."""

from __future__ import annotations

import itertools
import os
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

DEFAULT_BRUTE_FORCE_LIMIT = 16


class GraphError(ValueError):
    """Invalid family parameters or a graph violating the regular-graph invariants."""


class UndecidableError(RuntimeError):
    """Raised when a property cannot be settled by brute force at this size."""


@dataclass(frozen=True, eq=False)
class RegularGraph:
    """A connected d-regular simple graph.

    ``neighbors[x, i]`` is the i-th neighbor of ``x`` (ascending vertex id) and
    ``reverse_index[x, i]`` is the slot ``j`` with ``neighbors[y, j] == x`` for
    ``y = neighbors[x, i]``.  ``arc_transitive`` is a family certificate for
    local arc-transitivity (``None`` when unknown).
    """

    neighbors: np.ndarray
    reverse_index: np.ndarray
    name: str = "graph"
    arc_transitive: Optional[bool] = None

    @property
    def n_vertices(self) -> int:
        return self.neighbors.shape[0]

    @property
    def degree(self) -> int:
        return self.neighbors.shape[1]

    def adjacency(self) -> np.ndarray:
        n = self.n_vertices
        adj = np.zeros((n, n), dtype=bool)
        adj[np.repeat(np.arange(n), self.degree), self.neighbors.ravel()] = True
        return adj

    def slot_of(self, x: int, y: int) -> int:
        """Index i with ``neighbors[x, i] == y``."""
        hits = np.flatnonzero(self.neighbors[x] == y)
        if hits.size == 0:
            raise GraphError(f"{y} is not a neighbor of {x}")
        return int(hits[0])

    def __repr__(self) -> str:
        return f"RegularGraph({self.name}, N={self.n_vertices}, d={self.degree})"


@dataclass(frozen=True)
class MarkedInstance:
    graph: RegularGraph
    marked: int = 0

    def __post_init__(self):
        if not 0 <= self.marked < self.graph.n_vertices:
            raise GraphError(f"marked vertex {self.marked} out of range for N={self.graph.n_vertices}")

    @property
    def n(self) -> int:
        return self.graph.n_vertices

    @property
    def d(self) -> int:
        return self.graph.degree

    def describe(self) -> str:
        return f"{self.graph.name}, m={self.marked}"


@dataclass(frozen=True)
class GraphFamilySpec:
    """Family tag plus its size parameters, e.g. ``GraphFamilySpec("torus", {"rows": 4, "cols": 4})``."""

    family: str
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# construction


def from_adjacency_lists(adj: list, name: str = "graph", arc_transitive: Optional[bool] = None) -> RegularGraph:
    """Validate neighbor sets and build the ordered arc structure."""
    n = len(adj)
    if n < 2:
        raise GraphError("graph needs at least two vertices")
    lists = [sorted(set(int(y) for y in nb)) for nb in adj]
    for x, nb in enumerate(adj):
        if len(lists[x]) != len(nb):
            raise GraphError(f"vertex {x} has repeated neighbors")
    degrees = {len(nb) for nb in lists}
    if len(degrees) != 1:
        raise GraphError(f"graph is not regular (degrees {sorted(degrees)})")
    d = degrees.pop()
    if d == 0:
        raise GraphError("graph has no edges")
    neighbors = np.array(lists, dtype=np.int64)
    if neighbors.min() < 0 or neighbors.max() >= n:
        raise GraphError("neighbor index out of range")
    if np.any(neighbors == np.arange(n)[:, None]):
        raise GraphError("self-loops are not allowed in the base graph")
    position = [{y: i for i, y in enumerate(nb)} for nb in lists]
    reverse = np.empty_like(neighbors)
    for x in range(n):
        for i, y in enumerate(lists[x]):
            j = position[y].get(x)
            if j is None:
                raise GraphError(f"adjacency not symmetric: {x}->{y} without {y}->{x}")
            reverse[x, i] = j
    _check_connected(neighbors)
    neighbors.setflags(write=False)
    reverse.setflags(write=False)
    return RegularGraph(neighbors, reverse, name=name, arc_transitive=arc_transitive)


def _check_connected(neighbors: np.ndarray) -> None:
    n = neighbors.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for y in neighbors[x]:
            if not seen[y]:
                seen[y] = True
                queue.append(y)
    if not seen.all():
        raise GraphError(f"graph is disconnected ({int(seen.sum())} of {n} vertices reachable)")


def cycle(n: int) -> RegularGraph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return from_adjacency_lists([[(x - 1) % n, (x + 1) % n] for x in range(n)], f"cycle({n})", True)


def torus(rows: int, cols: int) -> RegularGraph:
    """2D periodic lattice C_rows x C_cols; vertex id ``r * cols + c``."""
    if rows < 3 or cols < 3:
        raise GraphError("torus needs rows, cols >= 3")
    adj = []
    for r in range(rows):
        for c in range(cols):
            adj.append([((r + 1) % rows) * cols + c, ((r - 1) % rows) * cols + c,
                        r * cols + (c + 1) % cols, r * cols + (c - 1) % cols])
    # only the square torus has an automorphism exchanging the two axes
    return from_adjacency_lists(adj, f"torus({rows},{cols})", rows == cols)


def complete(n: int) -> RegularGraph:
    if n < 2:
        raise GraphError("complete graph needs n >= 2")
    return from_adjacency_lists([[y for y in range(n) if y != x] for x in range(n)], f"complete({n})", True)


def complete_bipartite(n: int) -> RegularGraph:
    """K_{n,n}; sides are ``0..n-1`` and ``n..2n-1``."""
    if n < 1:
        raise GraphError("complete_bipartite needs n >= 1")
    adj = [list(range(n, 2 * n)) if x < n else list(range(n)) for x in range(2 * n)]
    return from_adjacency_lists(adj, f"complete_bipartite({n})", True)


def hypercube(dim: int) -> RegularGraph:
    if dim < 1:
        raise GraphError("hypercube needs dim >= 1")
    n = 1 << dim
    return from_adjacency_lists([[x ^ (1 << b) for b in range(dim)] for x in range(n)], f"hypercube({dim})", True)


def johnson(n: int, k: int) -> RegularGraph:
    """J(n, k): k-subsets of range(n), adjacent when they share k-1 elements."""
    if not 1 <= k < n:
        raise GraphError(f"johnson graph needs 1 <= k < n, got n={n}, k={k}")
    subsets = list(itertools.combinations(range(n), k))
    index = {frozenset(s): i for i, s in enumerate(subsets)}
    adj = []
    for s in subsets:
        s_set = frozenset(s)
        outside = [v for v in range(n) if v not in s_set]
        adj.append([index[(s_set - {a}) | {b}] for a in s for b in outside])
    return from_adjacency_lists(adj, f"johnson({n},{k})", True)


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % p for p in range(2, int(q**0.5) + 1))


def paley(q: int) -> RegularGraph:
    """Paley graph over the prime field Z_q, q = 1 mod 4."""
    if not _is_prime(q) or q % 4 != 1:
        raise GraphError(f"paley graph needs a prime q = 1 mod 4, got {q}")
    residues = {(x * x) % q for x in range(1, q)}
    adj = [[(x + r) % q for r in residues] for x in range(q)]
    return from_adjacency_lists(adj, f"paley({q})", True)


def moebius_ladder(n: int) -> RegularGraph:
    """Cycle on n (even) vertices plus the n/2 diameter chords."""
    if n < 4 or n % 2:
        raise GraphError("moebius_ladder needs an even n >= 4")
    adj = [[(x - 1) % n, (x + 1) % n, (x + n // 2) % n] for x in range(n)]
    # n=4 is K4 and n=6 is K_{3,3}; larger ladders are not locally arc-transitive
    return from_adjacency_lists(adj, f"moebius_ladder({n})", n <= 6)


def parse_edge_list(text: str, name: str = "edges") -> RegularGraph:
    """Parse the plain-text edge list format: header ``N d``, then ``u v`` per line."""
    rows = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    if not rows or len(rows[0]) != 2:
        raise GraphError("edge list must start with a 'N d' header line")
    n, d = (int(t) for t in rows[0])
    adj: list = [[] for _ in range(n)]
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != 2:
            raise GraphError(f"edge list line {lineno}: expected 'u v'")
        u, v = int(r[0]), int(r[1])
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge list line {lineno}: vertex out of range")
        adj[u].append(v)
        adj[v].append(u)
    g = from_adjacency_lists(adj, name)
    if g.degree != d:
        raise GraphError(f"header declares degree {d} but edges give {g.degree}")
    return g


def format_edge_list(g: RegularGraph) -> str:
    lines = [f"{g.n_vertices} {g.degree}"]
    for x in range(g.n_vertices):
        lines.extend(f"{x} {y}" for y in g.neighbors[x] if y > x)
    return "\n".join(lines) + "\n"


def read_edge_list(path) -> RegularGraph:
    with open(path) as fh:
        return parse_edge_list(fh.read(), name=os.path.basename(str(path)))


_FAMILIES = {
    "cycle": (cycle, ("n",)),
    "torus": (torus, ("rows", "cols")),
    "complete": (complete, ("n",)),
    "complete_bipartite": (complete_bipartite, ("n",)),
    "hypercube": (hypercube, ("dim",)),
    "johnson": (johnson, ("n", "k")),
    "paley": (paley, ("q",)),
    "moebius_ladder": (moebius_ladder, ("n",)),
}
FAMILIES = tuple(_FAMILIES) + ("edges",)


def family_parameters(family: str) -> tuple:
    if family == "edges":
        return ("path",)
    try:
        return _FAMILIES[family][1]
    except KeyError:
        raise GraphError(f"unknown graph family {family!r}; choose from {', '.join(FAMILIES)}") from None


def build_graph(spec: GraphFamilySpec) -> RegularGraph:
    names = family_parameters(spec.family)
    missing = [p for p in names if spec.params.get(p) is None]
    if missing:
        raise GraphError(f"family {spec.family!r} needs parameter(s) {', '.join(missing)}")
    if spec.family == "edges":
        if "text" in spec.params:
            return parse_edge_list(spec.params["text"])
        return read_edge_list(spec.params["path"])
    fn = _FAMILIES[spec.family][0]
    return fn(*(int(spec.params[p]) for p in names))


def relabel(g: RegularGraph, perm) -> RegularGraph:
    """Isomorphic copy where old vertex ``x`` becomes ``perm[x]``."""
    perm = np.asarray(perm)
    adj: list = [None] * g.n_vertices
    for x in range(g.n_vertices):
        adj[perm[x]] = [int(perm[y]) for y in g.neighbors[x]]
    return from_adjacency_lists(adj, f"{g.name}~relabelled", g.arc_transitive)


# ---------------------------------------------------------------------------
# automorphisms


def find_automorphism(g: RegularGraph, fixed: dict) -> Optional[np.ndarray]:
    """Backtracking search for an automorphism extending the partial map ``fixed``.

    Vertices are assigned in BFS order from the first fixed vertex so each new
    vertex has an already-mapped neighbor; candidates are then restricted to
    the neighbors of that neighbor's image.
    """
    n = g.n_vertices
    adj = g.adjacency()
    nbrs = g.neighbors
    start = next(iter(fixed)) if fixed else 0
    order, parent = [], {}
    seen = {start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        order.append(x)
        for y in nbrs[x]:
            y = int(y)
            if y not in seen:
                seen.add(y)
                parent[y] = x
                queue.append(y)

    image = np.full(n, -1, dtype=np.int64)
    preimage = np.full(n, -1, dtype=np.int64)
    for x, y in fixed.items():
        if preimage[y] >= 0 or image[x] >= 0:
            return None
        image[x] = y
        preimage[y] = x
    for x in fixed:
        for z in fixed:
            if adj[x, z] != adj[image[x], image[z]]:
                return None
    # distance profiles from the fixed set prune non-matching candidates early
    anchors = list(fixed)
    dist_src = _bfs_distances(g, anchors)
    dist_dst = _bfs_distances(g, [fixed[a] for a in anchors])

    todo = [x for x in order if x not in fixed]

    def consistent(x, y):
        if preimage[y] >= 0 or not np.array_equal(dist_src[:, x], dist_dst[:, y]):
            return False
        for z in nbrs[x]:
            iz = image[z]
            if iz >= 0 and not adj[y, iz]:
                return False
        # non-neighbors of x must not map onto neighbors of y
        for w in nbrs[y]:
            pre = preimage[w]
            if pre >= 0 and not adj[x, pre]:
                return False
        return True

    def extend(pos):
        if pos == len(todo):
            return True
        x = todo[pos]
        p = parent.get(x)
        candidates = nbrs[image[p]] if p is not None and image[p] >= 0 else range(n)
        for y in candidates:
            y = int(y)
            if consistent(x, y):
                image[x] = y
                preimage[y] = x
                if extend(pos + 1):
                    return True
                image[x] = -1
                preimage[y] = -1
        return False

    return image.copy() if extend(0) else None


def _bfs_distances(g: RegularGraph, sources) -> np.ndarray:
    n = g.n_vertices
    out = np.empty((len(sources), n), dtype=np.int64)
    for row, s in enumerate(sources):
        dist = np.full(n, -1, dtype=np.int64)
        dist[s] = 0
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in g.neighbors[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        out[row] = dist
    return out


def is_automorphism(g: RegularGraph, image) -> bool:
    image = np.asarray(image)
    if sorted(image.tolist()) != list(range(g.n_vertices)):
        return False
    adj = g.adjacency()
    return bool(np.array_equal(adj, adj[np.ix_(image, image)]))


def is_locally_arc_transitive(g: RegularGraph, at: Optional[int] = None,
                              limit: int = DEFAULT_BRUTE_FORCE_LIMIT) -> bool:
    """Whether every vertex (or just ``at``) has a stabilizer transitive on its neighbors.

    Graphs with more than ``limit`` vertices are answered from the family
    certificate; without one an :class:`UndecidableError` is raised.
    """
    if g.n_vertices > limit:
        if g.arc_transitive is not None:
            return g.arc_transitive
        raise UndecidableError(
            f"{g.name}: N={g.n_vertices} exceeds the brute-force limit {limit} and has no certificate; "
            "undecidable at desk scale")
    vertices = range(g.n_vertices) if at is None else [at]
    for u in vertices:
        first = int(g.neighbors[u, 0])
        # the stabilizer orbit of one neighbor covering all of them suffices
        for v in g.neighbors[u, 1:]:
            if find_automorphism(g, {int(u): int(u), first: int(v)}) is None:
                return False
    return True


# ---------------------------------------------------------------------------
# marked-arc symmetry of coin states


def marked_arc_spread(state, inst: MarkedInstance) -> float:
    """Largest |amplitude difference| among the d outgoing arcs of the marked vertex."""
    n, d = inst.n, inst.d
    psi = np.asarray(state)
    if psi.size != n * (d + 1):
        raise GraphError(f"state has {psi.size} amplitudes, expected N*(d+1) = {n * (d + 1)}")
    arcs = psi.reshape(n, d + 1)[inst.marked, :d]
    return float(np.max(np.abs(arcs - arcs[0])))


def verify_marked_arc_symmetry(state, inst: MarkedInstance, tol: float = 1e-12) -> bool:
    return marked_arc_spread(state, inst) <= tol

"""
graphs.py — Graphs, permutations and cycles for the Hamiltonian Cycle protocol.

Covers:
  • Immutable Graph / Permutation / Cycle values (vertices are 1..n)
  • Adjacency matrices embedded in 𝔽_q
  • Relabelling by permutations and composition
  • Exhaustive cycle enumeration, Hamiltonian search and the
    minimum-missing-edges count used by the soundness oracle
  • The plain-text graph format (`n m` header, then `u v` lines)
"""

import itertools
import logging
import random
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .config import MAX_CYCLE_ENUMERATION_N, MAX_HAMILTONIAN_SEARCH_N
from .errors import InvalidGraph, SizeMismatch, TooLarge
from .fq import FieldModulus, FqMatrix

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


# ─── Values ──────────────────────────────────────────────────

@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 1..n; edges stored as (u, v) with u < v."""
    n: int
    edges: FrozenSet[Edge]

    def __post_init__(self):
        if self.n < 1:
            raise InvalidGraph(f"vertex count must be positive, got {self.n}")
        for u, v in self.edges:
            if not (1 <= u < v <= self.n):
                raise InvalidGraph(f"edge ({u}, {v}) is not a normalized pair in 1..{self.n}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "Graph":
        """Normalize an edge list, rejecting self-loops and duplicates."""
        seen = set()
        for raw in edges:
            u, v = int(raw[0]), int(raw[1])
            if u == v:
                raise InvalidGraph(f"self-loop at vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise InvalidGraph(f"edge ({u}, {v}) outside 1..{n}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidGraph(f"duplicate edge {key}")
            seen.add(key)
        return cls(n, frozenset(seen))

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return sum(1 for e in self.edges if v in e)


@dataclass(frozen=True)
class Permutation:
    """Bijection π on 1..n; mapping[i − 1] is π(i)."""
    mapping: Tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(1, len(self.mapping) + 1)):
            raise ValueError(f"{self.mapping} is not a permutation of 1..{len(self.mapping)}")

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, v: int) -> int:
        return self.mapping[v - 1]

    def compose(self, other: "Permutation") -> "Permutation":
        """(self ∘ other)(v) = self(other(v))."""
        if other.n != self.n:
            raise SizeMismatch(f"cannot compose S_{self.n} with S_{other.n}")
        return Permutation(tuple(self(other(v)) for v in range(1, self.n + 1)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, image in enumerate(self.mapping, start=1):
            inv[image - 1] = i
        return Permutation(tuple(inv))


@dataclass(frozen=True)
class Cycle:
    """
    Directed Hamiltonian cycle v₁ → v₂ → … → vₙ → v₁ on 1..n.

    Stored rotated so that v₁ is the smallest vertex; orientation is kept,
    so two cycles are equal exactly when their directed couple-sets are.
    """
    vertices: Tuple[int, ...]

    def __post_init__(self):
        n = len(self.vertices)
        if n < 3:
            raise ValueError("a cycle needs at least 3 vertices")
        if sorted(self.vertices) != list(range(1, n + 1)):
            raise ValueError(f"{self.vertices} does not visit each of 1..{n} exactly once")
        start = self.vertices.index(1)
        canonical = self.vertices[start:] + self.vertices[:start]
        object.__setattr__(self, "vertices", canonical)

    @classmethod
    def from_permutation(cls, pi: Permutation) -> "Cycle":
        """The couple-set {(π(1),π(2)), …, (π(n),π(1))}."""
        return cls(pi.mapping)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edges(self) -> Tuple[Edge, ...]:
        """Directed couples (vᵢ, vᵢ₊₁), wrapping around."""
        vs = self.vertices
        return tuple((vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs)))

    def couples(self) -> FrozenSet[Edge]:
        return frozenset(self.edges())


# ─── Operations ──────────────────────────────────────────────

def adjacency_matrix(G: Graph, modulus: FieldModulus) -> FqMatrix:
    """Symmetric 0/1 adjacency matrix of G, entries in 𝔽_q (row i−1 is vertex i)."""
    values = [0] * (G.n * G.n)
    for u, v in G.edges:
        values[(u - 1) * G.n + (v - 1)] = 1
        values[(v - 1) * G.n + (u - 1)] = 1
    return FqMatrix(G.n, G.n, tuple(values), modulus)


def apply_permutation(pi: Permutation, X: Union[Graph, Cycle]) -> Union[Graph, Cycle]:
    """Relabel every vertex v of a graph or cycle as π(v)."""
    if pi.n != X.n:
        raise SizeMismatch(f"permutation on {pi.n} points applied to size {X.n}")
    if isinstance(X, Graph):
        return Graph.from_edges(X.n, [(pi(u), pi(v)) for u, v in X.edges])
    if isinstance(X, Cycle):
        return Cycle(tuple(pi(v) for v in X.vertices))
    raise TypeError(f"cannot permute {type(X).__name__}")


def _check_guard(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise TooLarge(f"{what} is limited to n ≤ {limit}, got n = {n}")


def enumerate_cycles(n: int) -> List[Cycle]:
    """All (n−1)! directed cycles of 1..n in canonical form."""
    if n < 3:
        raise ValueError(f"cycles need n ≥ 3, got {n}")
    _check_guard(n, MAX_CYCLE_ENUMERATION_N, "cycle enumeration")
    return [Cycle((1,) + tail) for tail in itertools.permutations(range(2, n + 1))]


def missing_edges(G: Graph, C: Cycle) -> List[Edge]:
    """Directed couples of C whose underlying edge is absent from G."""
    if C.n != G.n:
        raise SizeMismatch(f"cycle on {C.n} vertices vs graph on {G.n}")
    return [(u, v) for u, v in C.edges() if not G.has_edge(u, v)]


def find_hamiltonian_cycle(G: Graph) -> Optional[Cycle]:
    """Backtracking search from vertex 1; None when G has no Hamiltonian cycle."""
    _check_guard(G.n, MAX_HAMILTONIAN_SEARCH_N, "Hamiltonian search")
    n = G.n
    if n < 3:
        return None
    neighbours = {v: sorted(w for w in range(1, n + 1) if G.has_edge(v, w)) for v in range(1, n + 1)}
    if any(len(neighbours[v]) < 2 for v in neighbours):
        return None

    path = [1]
    visited = {1}

    def extend() -> bool:
        if len(path) == n:
            return G.has_edge(path[-1], 1)
        for w in neighbours[path[-1]]:
            if w not in visited:
                path.append(w)
                visited.add(w)
                if extend():
                    return True
                visited.discard(path.pop())
        return False

    return Cycle(tuple(path)) if extend() else None


def min_missing_edges(G: Graph) -> int:
    """m* = min over all cycles of 1..n of the number of cycle edges missing from G."""
    if G.n < 3:
        raise InvalidGraph(f"no cycle of 1..n exists for n = {G.n}; need n ≥ 3")
    _check_guard(G.n, MAX_CYCLE_ENUMERATION_N, "missing-edge scan")
    best = G.n
    for cycle in enumerate_cycles(G.n):
        best = min(best, len(missing_edges(G, cycle)))
        if best == 0:
            break
    return best


def random_permutation(n: int, rng: random.Random) -> Permutation:
    images = list(range(1, n + 1))
    rng.shuffle(images)
    return Permutation(tuple(images))


# ─── Standard Graphs ─────────────────────────────────────────

def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, itertools.combinations(range(1, n + 1), 2))


def empty_graph(n: int) -> Graph:
    return Graph(n, frozenset())


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(1, n)])


def cycle_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i % n + 1) for i in range(1, n + 1)])


def star_graph(n: int) -> Graph:
    """Vertex 1 joined to every other vertex."""
    return Graph.from_edges(n, [(1, i) for i in range(2, n + 1)])


def petersen_graph() -> Graph:
    """Outer 5-cycle 1..5, inner pentagram 6..10, spokes i to i+5. Not Hamiltonian."""
    outer = [(i, i % 5 + 1) for i in range(1, 6)]
    inner = [(6 + i, 6 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(1, 6)]
    return Graph.from_edges(10, outer + inner + spokes)


# ─── Text Format ─────────────────────────────────────────────

def parse_graph(text: str) -> Graph:
    """
    Parse the graph text format.

    First non-comment line: `n m`; then exactly m lines `u v` (1-indexed,
    whitespace-separated). Lines starting with # and blank lines are ignored.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InvalidGraph("empty graph file")
    try:
        n, m = (int(tok) for tok in lines[0].split())
        pairs = [tuple(int(tok) for tok in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise InvalidGraph(f"malformed graph file: {exc}") from exc
    if len(pairs) != m:
        raise InvalidGraph(f"header announces {m} edges, found {len(pairs)}")
    for pair in pairs:
        if len(pair) != 2:
            raise InvalidGraph(f"edge line must hold two vertices, got {pair}")
    return Graph.from_edges(n, pairs)


def format_graph(G: Graph) -> str:
    lines = [f"{G.n} {G.edge_count}"]
    lines += [f"{u} {v}" for u, v in sorted(G.edges)]
    return "\n".join(lines) + "\n"


def load_graph(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        graph = parse_graph(fh.read())
    logger.debug("Loaded %s: n=%d, m=%d", path, graph.n, graph.edge_count)
    return graph

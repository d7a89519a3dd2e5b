"""Core graph, matching, and alternating-path primitives.

Vertices are dense 0-based integers.  Edges are stored as ``(u, v)`` tuples
with ``u < v`` so that every edge has one canonical form; this keeps all
downstream tie-breaking rules deterministic.  All values are immutable after
construction and safe to share between concurrently simulated nodes.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

INF = float("inf")

# Parity of an alternating path length (or of an edge: odd = matching edge).
EVEN = 0
ODD = 1

Edge = tuple[int, int]


def other_parity(theta: int) -> int:
    """Complement parity: odd <-> even."""
    return theta ^ 1


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class GraphError(ValueError):
    pass


class Graph:
    """Immutable simple undirected graph on vertices ``0..n-1``."""

    __slots__ = ("n", "edges", "adj")

    def __init__(self, n: int, edges: Iterable[Edge]):
        if n < 0:
            raise GraphError("vertex count must be nonnegative")
        normed = set()
        for u, v in edges:
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
            normed.add(norm_edge(u, v))
        self.n = n
        self.edges = frozenset(normed)
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in normed:
            adj[u].append(v)
            adj[v].append(u)
        self.adj = tuple(tuple(sorted(a)) for a in adj)

    @property
    def m(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self.edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph on ``vertices`` relabelled to dense 0-based IDs.

        Returns the subgraph and the sorted list of original IDs; position i
        of that list is the original ID of new vertex i.
        """
        old = sorted(set(vertices))
        index = {v: i for i, v in enumerate(old)}
        keep = set(old)
        edges = [
            (index[u], index[v])
            for u, v in self.edges
            if u in keep and v in keep
        ]
        return Graph(len(old), edges), old

    def connected_components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            stack = [s]
            seen[s] = True
            comp = []
            while stack:
                v = stack.pop()
                comp.append(v)
                for u in self.adj[v]:
                    if not seen[u]:
                        seen[u] = True
                        stack.append(u)
            comps.append(sorted(comp))
        return comps

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def validate_matching(graph: Graph, edges: Iterable[Edge]) -> list[str]:
    """Check a candidate edge set against the matching invariants.

    Returns a list of human-readable violations; an empty list means the set
    is a valid matching of ``graph``.  Violations are data, not exceptions,
    so invalid candidate sets can be inspected.
    """
    violations = []
    seen_at: dict[int, Edge] = {}
    for e in sorted(norm_edge(*e) for e in edges):
        u, v = e
        if not (0 <= u < graph.n and 0 <= v < graph.n):
            violations.append(f"edge {e} out of range")
            continue
        if e not in graph.edges:
            violations.append(f"edge {e} not present in graph")
        for x in (u, v):
            if x in seen_at:
                violations.append(
                    f"shared-endpoint at vertex {x}: {seen_at[x]} and {e}"
                )
            else:
                seen_at[x] = e
    return violations


class Matching:
    """Immutable matching: a set of edges without shared endpoints."""

    __slots__ = ("edges", "mate")

    def __init__(self, graph: Graph, edges: Iterable[Edge] = ()):
        edges = [norm_edge(u, v) for u, v in edges]
        problems = validate_matching(graph, edges)
        if problems:
            raise GraphError("; ".join(problems))
        self.edges = frozenset(edges)
        mate: list[Optional[int]] = [None] * graph.n
        for u, v in self.edges:
            mate[u] = v
            mate[v] = u
        self.mate = tuple(mate)

    def __len__(self) -> int:
        return len(self.edges)

    def is_matched(self, v: int) -> bool:
        return self.mate[v] is not None

    def contains_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self.edges

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Matching) and self.edges == other.edges

    def __hash__(self) -> int:
        return hash(self.edges)

    def __repr__(self) -> str:
        return f"Matching({sorted(self.edges)})"


def edge_parity(matching: Matching, graph: Graph, u: int, v: int) -> int:
    """Parity of an edge: odd for matching edges, even otherwise."""
    if not graph.has_edge(u, v):
        raise GraphError(f"unknown edge ({u}, {v})")
    return ODD if matching.contains_edge(u, v) else EVEN


def path_edges(path: Sequence[int]) -> list[Edge]:
    return [norm_edge(path[i], path[i + 1]) for i in range(len(path) - 1)]


def is_alternating(graph: Graph, matching: Matching, path: Sequence[int]) -> bool:
    """True iff ``path`` is a simple path of ``graph`` whose edges alternate
    between matching and non-matching edges.

    A single vertex is a valid (zero-length) alternating path; the empty
    sequence is not a path.
    """
    if len(path) == 0:
        return False
    if len(set(path)) != len(path):
        return False
    if not all(0 <= v < graph.n for v in path):
        return False
    prev_matched = None
    for i in range(len(path) - 1):
        u, v = path[i], path[i + 1]
        if not graph.has_edge(u, v):
            return False
        matched = matching.contains_edge(u, v)
        if prev_matched is not None and matched == prev_matched:
            return False
        prev_matched = matched
    return True


def is_augmenting(graph: Graph, matching: Matching, path: Sequence[int]) -> bool:
    """True iff ``path`` is alternating, has length >= 1, and joins two
    distinct unmatched vertices."""
    if len(path) < 2:
        return False
    if not is_alternating(graph, matching, path):
        return False
    return not matching.is_matched(path[0]) and not matching.is_matched(path[-1])


def augment(graph: Graph, matching: Matching, path: Sequence[int]) -> Matching:
    """Flip matched/unmatched labels along an augmenting path.

    The result has one more edge than ``matching``; edges off the path are
    untouched.
    """
    if not is_augmenting(graph, matching, path):
        raise GraphError(f"path {list(path)} is not augmenting")
    flipped = set(path_edges(path))
    new_edges = (matching.edges - flipped) | (flipped - matching.edges)
    return Matching(graph, new_edges)

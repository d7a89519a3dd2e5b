"""Brute-force reference computations.

Everything here enumerates simple alternating paths exhaustively, so the
results are exact by construction and serve as the independent ground truth
for the distributed machinery.  Costs are exponential in the worst case;
instances are guarded by a size limit (overridable through the
``CONGEST_ORACLE_LIMIT`` environment variable or per call).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence

from .graphs import (
    EVEN,
    INF,
    GraphError,
    Graph,
    Matching,
    augment,
    norm_edge,
)

DEFAULT_DIST_LIMIT = 24
DEFAULT_ENUM_LIMIT = 14


class OracleLimitError(ValueError):
    """Raised when an instance exceeds the configured brute-force limit."""


def configured_limit(default: int = DEFAULT_DIST_LIMIT) -> int:
    raw = os.environ.get("CONGEST_ORACLE_LIMIT")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise OracleLimitError(f"bad CONGEST_ORACLE_LIMIT: {raw!r}") from exc


def _require_size(n: int, limit: Optional[int], default: int) -> None:
    if limit is None:
        limit = configured_limit(default)
    if n > limit:
        raise OracleLimitError(
            f"instance has {n} vertices, above the brute-force limit {limit}"
        )


def brute_alt_distances(
    graph: Graph,
    matching: Matching,
    f: int,
    cap: Optional[float] = None,
    limit: Optional[int] = None,
) -> list[tuple[float, float]]:
    """Exact shortest alternating-path distances from the free vertex ``f``.

    Returns per-vertex pairs ``(d_even, d_odd)`` indexed by parity constants
    (``pairs[v][EVEN]``, ``pairs[v][ODD]``), with ``INF`` for unreachable
    parities.  Distances above ``cap`` are not explored and report as ``INF``.

    The search walks every simple alternating path from ``f`` once: after an
    unmatched edge the only continuation is the mate edge, after a matched
    edge every unmatched incident edge continues the path.
    """
    _require_size(graph.n, limit, DEFAULT_DIST_LIMIT)
    if matching.is_matched(f):
        raise GraphError(f"distance root {f} must be unmatched")
    n = graph.n
    dist: list[list[float]] = [[INF, INF] for _ in range(n)]
    dist[f][EVEN] = 0
    max_len = n - 1 if cap is None else min(cap, n - 1)
    if max_len <= 0:
        return [tuple(p) for p in dist]

    adj = graph.adj
    mate = matching.mate
    on_path = bytearray(n)
    on_path[f] = 1
    # Each stack frame is (vertex, iterator over continuation neighbors).
    # From f (free) every incident edge is unmatched.
    stack: list[tuple[int, object]] = [(f, iter(adj[f]))]
    depth = 0
    while stack:
        v, it = stack[-1]
        u = next(it, None)
        if u is None:
            stack.pop()
            on_path[v] = 0
            depth -= 1
            continue
        if on_path[u]:
            continue
        d = depth + 1
        row = dist[u]
        p = d & 1
        if d < row[p]:
            row[p] = d
        if d >= max_len:
            continue
        if mate[v] == u:
            # Arrived by the matched edge: branch over unmatched edges.
            mu = mate[u]
            cont = iter([w for w in adj[u] if w != mu])
        else:
            # Arrived by an unmatched edge: the mate edge is forced.
            mu = mate[u]
            cont = iter(()) if mu is None else iter((mu,))
        on_path[u] = 1
        stack.append((u, cont))
        depth = d
    return [tuple(p) for p in dist]


def enumerate_alt_paths(
    graph: Graph,
    matching: Matching,
    f: int,
    cap: Optional[int] = None,
    limit: Optional[int] = None,
) -> list[tuple[int, ...]]:
    """Every simple alternating path from ``f`` (including the trivial one)."""
    _require_size(graph.n, limit, DEFAULT_ENUM_LIMIT)
    if matching.is_matched(f):
        raise GraphError(f"enumeration root {f} must be unmatched")
    adj = graph.adj
    mate = matching.mate
    max_len = graph.n - 1 if cap is None else min(cap, graph.n - 1)
    out: list[tuple[int, ...]] = []
    path = [f]
    on_path = bytearray(graph.n)
    on_path[f] = 1

    def walk(v: int, arrived_matched: bool) -> None:
        out.append(tuple(path))
        if len(path) - 1 >= max_len:
            return
        if arrived_matched:
            conts = [w for w in adj[v] if w != mate[v]]
        else:
            conts = [] if mate[v] is None else [mate[v]]
        for u in conts:
            if on_path[u]:
                continue
            on_path[u] = 1
            path.append(u)
            walk(u, mate[v] == u)
            path.pop()
            on_path[u] = 0

    walk(f, True)  # edges at a free vertex are all unmatched
    return out


def brute_shortest_augmenting(
    graph: Graph,
    matching: Matching,
    limit: Optional[int] = None,
) -> Optional[tuple[int, ...]]:
    """A minimum-length augmenting path, or ``None`` iff the matching is
    maximum.  Ties break to the lexicographically smallest vertex sequence.
    """
    _require_size(graph.n, limit, DEFAULT_DIST_LIMIT)
    adj = graph.adj
    mate = matching.mate
    free = [v for v in range(graph.n) if mate[v] is None]
    best: Optional[tuple[int, ...]] = None
    best_len = graph.n  # path lengths are < n
    for f in free:
        path = [f]
        on_path = bytearray(graph.n)
        on_path[f] = 1

        def walk(v: int, arrived_matched: bool) -> None:
            nonlocal best, best_len
            if len(path) - 1 >= best_len:
                return
            if arrived_matched:
                conts = [w for w in adj[v] if w != mate[v]]
            else:
                conts = [] if mate[v] is None else [mate[v]]
            for u in conts:
                if on_path[u]:
                    continue
                path.append(u)
                if mate[u] is None:
                    # Reached another free vertex by an unmatched edge.
                    cand = tuple(path)
                    key = (len(cand) - 1, cand)
                    if best is None or key < (best_len, best):
                        best, best_len = cand, len(cand) - 1
                else:
                    on_path[u] = 1
                    walk(u, mate[v] == u)
                    on_path[u] = 0
                path.pop()

        walk(f, True)
    return best


def brute_max_matching(
    graph: Graph,
    limit: Optional[int] = None,
) -> tuple[int, Matching]:
    """Maximum matching size and a witness, by repeated augmentation.

    Correct because a matching is maximum exactly when no augmenting path
    exists (Berge).
    """
    _require_size(graph.n, limit, DEFAULT_DIST_LIMIT)
    m = Matching(graph)
    while True:
        path = brute_shortest_augmenting(graph, m, limit=limit)
        if path is None:
            return len(m), m
        m = augment(graph, m, path)


@dataclass(frozen=True)
class ExtendableEnumeration:
    """Complete enumeration of extendable segments for one (s, t, parity)."""

    segments: tuple[tuple[int, ...], ...]
    levels: tuple[tuple[float, float], ...]  # parallel to segments
    min_level: Optional[tuple[float, float]]
    canonical: Optional[tuple[int, ...]]  # lex-min segment of minimum level

    @property
    def empty(self) -> bool:
        return not self.segments


def enumerate_extendable(
    knowledge,
    s: int,
    t: int,
    theta: int,
    limit: Optional[int] = None,
    path_cache: Optional[Sequence[tuple[int, ...]]] = None,
):
    """All extendable segments from ``s`` to ``t`` for parity ``theta``.

    A segment is the ``s..t`` suffix of a shortest ``theta``-alternating path
    from the root to ``t`` that passes through ``s`` and whose level is below
    the level of ``s``'s canonical outgoing edge.  ``knowledge`` is a
    reference structure from :func:`congestmatch.abt.build_knowledge`.
    """
    if not knowledge.is_ancestor(s, t):
        raise GraphError(f"{s} is not an ancestor of {t}")
    if path_cache is None:
        path_cache = enumerate_alt_paths(
            knowledge.graph, knowledge.matching, knowledge.f,
            limit=DEFAULT_ENUM_LIMIT if limit is None else limit,
        )
    target = knowledge.dist[t][theta]
    bound = knowledge.out_level(s)
    segments: dict[tuple[int, ...], tuple[float, float]] = {}
    if target < INF:
        for path in path_cache:
            if path[-1] != t or len(path) - 1 != target:
                continue
            if (len(path) - 1) & 1 != theta:
                continue
            if s not in path:
                continue
            if not knowledge.path_level(path) < bound:
                continue
            seg = path[path.index(s):]
            if seg not in segments:
                segments[seg] = knowledge.path_level(seg)
    ordered = sorted(segments)
    levels = tuple(segments[seg] for seg in ordered)
    if not ordered:
        return ExtendableEnumeration((), (), None, None)
    min_level = min(levels)
    canonical = min(seg for seg, lv in segments.items() if lv == min_level)
    return ExtendableEnumeration(tuple(ordered), levels, min_level, canonical)

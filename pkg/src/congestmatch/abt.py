"""Alternating base tree, edge levels, canonical minimum outgoing edges.

Two implementations live here and must agree exactly:

* :func:`build_knowledge` computes the whole structure centrally from
  injected distance pairs.  It replays the same per-depth aggregation and the
  same deterministic tie-breaks the node programs use, so it doubles as the
  reference for differential tests and as the scheduler's source of the tree
  height.
* The ``build_abt`` / ``broadcast_ancestors`` / ``compute_edge_levels`` /
  ``aggregate_moes`` operations drive a simulated network of node programs
  through the corresponding protocol phases and extract the per-vertex
  results.

The tree is rooted at the free vertex ``f``; a vertex's parent is the
smallest-ID neighbour whose opposite-parity distance is one less than the
vertex's shortest alternating distance.  A non-tree edge's level is the pair
``(sum, max)`` of its endpoints' distances at the edge's parity, compared
lexicographically; tree edges have level ``(0, 0)`` and the virtual outgoing
edge of a subtree without outgoing edges has level ``(inf, inf)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .graphs import EVEN, INF, ODD, Graph, Matching, norm_edge, other_parity
from .sim import Network

Level = tuple[float, float]

LEVEL_ZERO: Level = (0, 0)
LEVEL_INF: Level = (INF, INF)


class AbtError(ValueError):
    pass


def compare_levels(a: Level, b: Level) -> int:
    """Lexicographic comparison: -1 if a < b, 0 if equal, 1 if a > b."""
    if a == b:
        return 0
    return -1 if a < b else 1


@dataclass(frozen=True)
class EdgeInfo:
    level: Level
    lca: int
    lca_depth: int
    rho: int


@dataclass(frozen=True)
class OutInfo:
    """Canonical minimum outgoing edge of one subtree: ``{y, z}`` with ``z``
    inside the subtree."""

    level: Level
    y: int
    z: int
    rho: int
    wave: int  # depth of the edge's least common ancestor


@dataclass
class Knowledge:
    """Complete per-vertex structure derived from one set of distance pairs."""

    graph: Graph
    matching: Matching
    f: int
    dist: tuple[tuple[float, float], ...]
    parent: tuple[Optional[int], ...]
    children: tuple[tuple[int, ...], ...]
    depth: tuple[int, ...]
    gamma: tuple[int, ...]
    anc: tuple[tuple[int, ...], ...]
    height: int
    nontree: dict[tuple[int, int], EdgeInfo]
    out: tuple[Optional[OutInfo], ...]
    routing: tuple[dict[int, tuple[int, int]], ...]
    _tin: tuple[int, ...]
    _tout: tuple[int, ...]

    def is_ancestor(self, s: int, t: int) -> bool:
        """True iff ``s`` is an ancestor of ``t`` in the tree (or ``s == t``)."""
        return self._tin[s] <= self._tin[t] < self._tout[s]

    def edge_level(self, u: int, v: int) -> Level:
        e = norm_edge(u, v)
        info = self.nontree.get(e)
        return LEVEL_ZERO if info is None else info.level

    def path_level(self, path: Sequence[int]) -> Level:
        level = LEVEL_ZERO
        for i in range(len(path) - 1):
            lv = self.edge_level(path[i], path[i + 1])
            if lv > level:
                level = lv
        return level

    def out_level(self, v: int) -> Level:
        info = self.out[v]
        return LEVEL_INF if info is None else info.level

    def subtree(self, v: int) -> list[int]:
        return [u for u in range(self.graph.n) if self.is_ancestor(v, u)]


def _candidate_key(v: int, cand: tuple):
    # (sum, max, prefer incident to the deciding vertex, low ID, high ID)
    s, mx, y, z, _rho = cand
    return (s, mx, 0 if z == v else 1, min(y, z), max(y, z))


def build_knowledge(
    graph: Graph,
    matching: Matching,
    f: int,
    dist: Sequence[tuple[float, float]],
) -> Knowledge:
    """Centralized reference computation of the full structure.

    Requires every vertex to be reachable from ``f`` by some alternating path
    (a guarantee of the region contract); raises :class:`AbtError` otherwise.
    """
    n = graph.n
    gamma: list[int] = [EVEN] * n
    for v in range(n):
        de, do = dist[v][EVEN], dist[v][ODD]
        if de == INF and do == INF:
            raise AbtError(f"vertex {v} unreachable from root {f}")
        gamma[v] = ODD if do < de else EVEN

    parent: list[Optional[int]] = [None] * n
    for v in range(n):
        if v == f:
            continue
        want = dist[v][gamma[v]] - 1
        bar = other_parity(gamma[v])
        cand = [u for u in graph.adj[v] if dist[u][bar] == want]
        if not cand:
            raise AbtError(f"no valid parent for vertex {v}")
        parent[v] = cand[0]  # adjacency is sorted: smallest ID wins

    children: list[list[int]] = [[] for _ in range(n)]
    for v in range(n):
        if parent[v] is not None:
            children[parent[v]].append(v)

    depth = [-1] * n
    depth[f] = 0
    anc: list[tuple[int, ...]] = [()] * n
    order = [f]
    for v in order:
        for c in children[v]:
            depth[c] = depth[v] + 1
            anc[c] = anc[v] + (v,)
            order.append(c)
    if len(order) != n:
        raise AbtError("parent choices do not form a spanning tree")
    height = max(depth)

    # Euler intervals for ancestor tests.
    tin = [0] * n
    tout = [0] * n
    clock = 0
    stack: list[tuple[int, bool]] = [(f, False)]
    while stack:
        v, done = stack.pop()
        if done:
            tout[v] = clock
            continue
        tin[v] = clock
        clock += 1
        stack.append((v, True))
        for c in reversed(children[v]):
            stack.append((c, False))

    tree_edges = {norm_edge(v, parent[v]) for v in range(n) if parent[v] is not None}
    nontree: dict[tuple[int, int], EdgeInfo] = {}
    for u, v in graph.edges:
        e = norm_edge(u, v)
        if e in tree_edges:
            continue
        rho = ODD if matching.contains_edge(u, v) else EVEN
        du, dv = dist[u][rho], dist[v][rho]
        level = LEVEL_INF if du == INF or dv == INF else (du + dv, max(du, dv))
        au = anc[u] + (u,)
        av = anc[v] + (v,)
        k = 0
        while k < len(au) and k < len(av) and au[k] == av[k]:
            k += 1
        nontree[e] = EdgeInfo(level, au[k - 1], k - 1, rho)

    # Per-depth aggregation, deepest vertices first.  ``winners[v]`` maps the
    # lca depth (the wave index) to the best candidate seen in the subtree,
    # ``via[v]`` to the child that supplied it (None for incident edges).
    winners: list[dict[int, tuple]] = [dict() for _ in range(n)]
    via: list[dict[int, Optional[int]]] = [dict() for _ in range(n)]

    def merge(v: int, wave: int, cand: tuple, child: Optional[int]) -> None:
        cur = winners[v].get(wave)
        if cur is None or _candidate_key(v, cand) < _candidate_key(v, cur):
            winners[v][wave] = cand
            via[v][wave] = child

    for v in sorted(range(n), key=lambda x: -depth[x]):
        for u in graph.adj[v]:
            e = norm_edge(u, v)
            info = nontree.get(e)
            if info is None or info.level == LEVEL_INF or info.lca == v:
                continue
            merge(v, info.lca_depth, (*info.level, u, v, info.rho), None)
        p = parent[v]
        if p is None:
            continue
        for wave, cand in winners[v].items():
            if wave < depth[p]:
                merge(p, wave, cand, v)

    out: list[Optional[OutInfo]] = [None] * n
    routing: list[dict[int, tuple[int, int]]] = [dict() for _ in range(n)]
    for v in range(n):
        for wave, cand in winners[v].items():
            child = via[v][wave]
            if child is not None:
                routing[v][wave] = (cand[3], child)
        if winners[v]:
            wave, cand = min(
                winners[v].items(), key=lambda kv: (_candidate_key(v, kv[1]), kv[0])
            )
            s, mx, y, z, rho = cand
            out[v] = OutInfo((s, mx), y, z, rho, wave)

    return Knowledge(
        graph=graph,
        matching=matching,
        f=f,
        dist=tuple((d[EVEN], d[ODD]) for d in dist),
        parent=tuple(parent),
        children=tuple(tuple(c) for c in children),
        depth=tuple(depth),
        gamma=tuple(gamma),
        anc=anc and tuple(anc),
        height=height,
        nontree=nontree,
        out=tuple(out),
        routing=tuple(routing),
        _tin=tuple(tin),
        _tout=tuple(tout),
    )


def knowledge_dump(k: Knowledge) -> list[dict]:
    """JSON-friendly per-vertex view (for the CLI trace command)."""
    rows = []
    for v in range(k.graph.n):
        o = k.out[v]
        rows.append({
            "vertex": v,
            "parent": k.parent[v],
            "gamma": "odd" if k.gamma[v] == ODD else "even",
            "depth": k.depth[v],
            "ancestors": list(k.anc[v]),
            "out": None if o is None else {
                "y": o.y, "z": o.z,
                "level": [_json_inf(o.level[0]), _json_inf(o.level[1])],
                "rho": "odd" if o.rho == ODD else "even",
                "lca_depth": o.wave,
            },
            "routing": {str(w): list(e) for w, e in sorted(k.routing[v].items())},
        })
    return rows


def _json_inf(x: float):
    return None if x == INF else int(x)


# ---------------------------------------------------------------------------
# Distributed phase drivers.  Each advances the network through one window of
# the phase schedule and returns the freshly learned per-vertex knowledge.
# ---------------------------------------------------------------------------


def _check_errors(net: Network) -> None:
    for prog in net.programs:
        if prog.error is not None:
            raise AbtError(f"vertex {prog.vid}: {prog.error}")


def _run_window(net: Network, start: int, length: int) -> None:
    if net.round != start:
        raise AbtError(f"network at round {net.round}, expected phase start {start}")
    net.run(start + length - net.round)
    _check_errors(net)


def build_abt(net: Network, sched):
    """Neighbour distance exchange plus parent claims: after two rounds every
    vertex knows its parent, children, and shortest-path parity."""
    _run_window(net, 0, sched.anc_start)
    parents = tuple(p.parent for p in net.programs)
    kids = tuple(tuple(p.children) for p in net.programs)
    gammas = tuple(p.gamma for p in net.programs)
    return parents, kids, gammas


def broadcast_ancestors(net: Network, sched):
    """Pipelined root-first ancestor broadcast; depth is the list length."""
    _run_window(net, sched.anc_start, sched.anc_len)
    return tuple(tuple(p.anc) for p in net.programs)


def compute_edge_levels(net: Network, sched):
    """Ancestor-list exchange over non-tree edges; both endpoints learn each
    edge's level, least common ancestor, and its depth."""
    _run_window(net, sched.lvl_start, sched.lvl_len)
    levels: dict[tuple[int, int], EdgeInfo] = {}
    for prog in net.programs:
        for u, info in prog.edge_info.items():
            e = norm_edge(prog.vid, u)
            if e in levels and levels[e] != info:
                raise AbtError(f"endpoints disagree on edge {e}")
            levels[e] = info
    return levels


def aggregate_moes(net: Network, sched):
    """Per-depth pipelined aggregation of minimum outgoing edges; vertices on
    a winner's path store the routing entry for that depth."""
    _run_window(net, sched.moe_start, sched.moe_len)
    for prog in net.programs:
        prog.finalize_moes()
    _check_errors(net)
    outs = tuple(p.out for p in net.programs)
    routes = tuple(dict(p.route) for p in net.programs)
    return outs, routes


@dataclass
class PrecomputeResult:
    parents: tuple
    children: tuple
    gammas: tuple
    ancestors: tuple
    levels: dict
    outs: tuple
    routes: tuple
    rounds: int


def precompute(net: Network, sched) -> PrecomputeResult:
    """Run the full pipeline; the round count is bounded by ``8*(height+1)``."""
    parents, kids, gammas = build_abt(net, sched)
    ancs = broadcast_ancestors(net, sched)
    levels = compute_edge_levels(net, sched)
    outs, routes = aggregate_moes(net, sched)
    rounds = net.round
    if rounds > 8 * (sched.height + 1):
        raise AbtError(
            f"precompute took {rounds} rounds, above 8*(height+1)={8 * (sched.height + 1)}"
        )
    return PrecomputeResult(parents, kids, gammas, ancs, levels, outs, routes, rounds)


def distributed_matches_reference(net: Network, ref: Knowledge) -> list[str]:
    """Compare per-vertex protocol state against the reference structure."""
    diffs = []
    for prog in net.programs:
        v = prog.vid
        if prog.parent != ref.parent[v]:
            diffs.append(f"parent[{v}]: {prog.parent} != {ref.parent[v]}")
        if tuple(prog.children) != ref.children[v]:
            diffs.append(f"children[{v}]: {prog.children} != {ref.children[v]}")
        if prog.gamma != ref.gamma[v]:
            diffs.append(f"gamma[{v}]")
        if tuple(prog.anc) != ref.anc[v]:
            diffs.append(f"ancestors[{v}]: {prog.anc} != {ref.anc[v]}")
        if prog.depth != ref.depth[v]:
            diffs.append(f"depth[{v}]")
        for u, info in prog.edge_info.items():
            if ref.nontree.get(norm_edge(u, v)) != info:
                diffs.append(f"edge info {norm_edge(u, v)} at {v}")
        o = prog.out
        r = ref.out[v]
        if (o is None) != (r is None):
            diffs.append(f"out[{v}] virtual mismatch: {o} != {r}")
        elif o is not None and (o.level, o.y, o.z, o.rho, o.wave) != (r.level, r.y, r.z, r.rho, r.wave):
            diffs.append(f"out[{v}]: {o} != {r}")
        if dict(prog.route) != ref.routing[v]:
            diffs.append(f"routing[{v}]: {prog.route} != {ref.routing[v]}")
    return diffs

"""Per-vertex protocol for one region: precompute, path search, flip.

A region network runs seven fixed-budget phase windows back to back:

==========  ======================  ==========================================
window      length                  what happens
==========  ======================  ==========================================
distances   1                       neighbours exchange their distance pairs
claims      1                       each vertex claims its chosen parent
ancestors   2*height                pipelined root-first ancestor broadcast
levels      height + 2              ancestor lists cross every non-tree edge
outgoing    height                  per-depth upward aggregation of candidates
search      2*ell                   trigger messages assemble the path
flip        1                       path vertices flip their edge labels
==========  ======================  ==========================================

Every vertex initially knows its ID, its incident edges and their matched
status, the root's ID, its own distance pair, and the shared schedule; all
other knowledge arrives by messages.  The aggregation window is pipelined per
depth class: a vertex of depth d transmits its depth-i candidate to its
parent at window offset ``i + (height - d)``, so each tree edge carries at
most one candidate per round and a parent reads its children's depth-i
winners exactly when it must forward its own.

Path search is triggered by the non-root free vertex.  A vertex receiving a
trigger for (s, target=itself, parity, orientation) either stops (s reached),
forwards to its parent after recording the tree edge, or routes the trigger
to its subtree-side outgoing-edge endpoint, which crosses the edge and splits
the work into two concurrent sub-searches; the orientation bit flips on the
subtree-side branch because that segment is emitted reversed.  Predecessor
and successor pointers are therefore recorded globally root-to-target without
any post-processing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .abt import EdgeInfo, OutInfo
from .graphs import EVEN, INF, ODD, Matching, Graph, other_parity
from .sim import NodeProgram

# Message tags.
DIST = 0
CLAIM = 1
ANC = 2
LCA = 3
CAND = 4
TRIG_PARENT = 5
TRIG_ROUTE = 6
TRIG_CROSS = 7
FLIP = 8

TAG_NAMES = {
    DIST: "dist", CLAIM: "claim", ANC: "anc", LCA: "lca", CAND: "cand",
    TRIG_PARENT: "parent", TRIG_ROUTE: "route", TRIG_CROSS: "cross",
    FLIP: "flip",
}

FWD = 1
REV = 0


@dataclass(frozen=True)
class PhaseSchedule:
    """Round boundaries of the phase windows, shared by every vertex."""

    height: int
    ell: int

    @property
    def anc_start(self) -> int:
        return 2

    @property
    def anc_len(self) -> int:
        return 2 * self.height

    @property
    def lvl_start(self) -> int:
        return self.anc_start + self.anc_len

    @property
    def lvl_len(self) -> int:
        return self.height + 2

    @property
    def moe_start(self) -> int:
        return self.lvl_start + self.lvl_len

    @property
    def moe_len(self) -> int:
        return self.height

    @property
    def ext_start(self) -> int:
        return self.moe_start + self.moe_len

    @property
    def ext_len(self) -> int:
        return 2 * self.ell

    @property
    def flip_start(self) -> int:
        return self.ext_start + self.ext_len

    @property
    def total(self) -> int:
        return self.flip_start + 1

    @property
    def precompute_rounds(self) -> int:
        return self.ext_start


def _cand_key(vid: int, cand: tuple):
    s, mx, y, z, _rho = cand
    return (s, mx, 0 if z == vid else 1, min(y, z), max(y, z))


class RegionProgram(NodeProgram):
    """State machine run by every vertex of a simulated region."""

    def __init__(self, vid: int, n: int, mate: Optional[int],
                 dist_pair: tuple[float, float], f: int, sched: PhaseSchedule):
        super().__init__(vid)
        self.n = n
        self.mate = mate
        self.dist = dist_pair  # (even, odd), INF allowed
        self.f = f
        self.sched = sched
        self.gamma = ODD if dist_pair[ODD] < dist_pair[EVEN] else EVEN
        self.is_root = vid == f
        self.is_target = mate is None and vid != f
        self._inf = 8 * n

        self.neighbors: tuple[int, ...] = ()  # provided by the network builder
        self.nbr_dist: dict[int, tuple[float, float]] = {}
        self.parent: Optional[int] = None
        self.children: list[int] = []
        self.anc: list[int] = []
        self.depth: Optional[int] = None
        self.nontree: list[int] = []
        self._lvl_recv: dict[int, list[int]] = {}
        self.edge_info: dict[int, tuple] = {}  # nbr -> (level, lca, lca_depth, rho)
        self._pending_own: dict[int, list[tuple]] = {}  # wave -> candidates
        self.winners: dict[int, tuple] = {}
        self._via: dict[int, Optional[int]] = {}
        self.route: dict[int, tuple[int, int]] = {}
        self.out = None  # abt.OutInfo once finalized
        self._moe_final = False
        self._anc_own_round: Optional[int] = None

        self.pred: Optional[int] = None
        self.succ: Optional[int] = None
        self.flip_bits: dict[int, int] = {}
        self.new_mate: Optional[int] = mate
        self.error: Optional[str] = None

        self._outbox: list = []
        self._wakes: list = []

    # -- helpers ----------------------------------------------------------

    def _fail(self, msg: str) -> None:
        if self.error is None:
            self.error = msg

    def _enc(self, x: float) -> int:
        return self._inf if x == INF else int(x)

    def _dec(self, x: int) -> float:
        return INF if x == self._inf else x

    def _send(self, dst: int, tag: int, *fields: int) -> None:
        self._outbox.append((dst, tag, tuple(fields)))

    def _gamma_of(self, u: int) -> int:
        pair = self.nbr_dist[u]
        return ODD if pair[ODD] < pair[EVEN] else EVEN

    def initial_wakes(self):
        wakes = [0, self.sched.flip_start]
        if self.is_target:
            wakes.append(self.sched.ext_start)
        return wakes

    # -- phase logic -------------------------------------------------------

    def step(self, rnd, inbox):
        self._outbox = []
        self._wakes = []
        sched = self.sched
        if rnd == 0:
            pair = (self._enc(self.dist[0]), self._enc(self.dist[1]))
            for u in self.neighbors:
                self._send(u, DIST, *pair)
            return self._outbox, self._wakes

        for src, tag, fields in inbox:
            if tag == DIST:
                self.nbr_dist[src] = (self._dec(fields[0]), self._dec(fields[1]))
            elif tag == CLAIM:
                self.children.append(src)
            elif tag == ANC:
                self._on_anc(rnd, fields[0], fields[1])
            elif tag == LCA:
                self._on_lca(src, fields[0], fields[1])
            elif tag == CAND:
                self._on_cand(rnd, src, fields)
            elif tag == TRIG_PARENT:
                self._on_parent_trigger(src, fields[0], fields[1])
            elif tag == TRIG_ROUTE:
                self._on_route_trigger(fields)
            elif tag == TRIG_CROSS:
                self._on_cross_trigger(src, fields[0], fields[2])

        if rnd == 1:
            self._choose_parent()
        elif rnd == sched.anc_start and self.is_root:
            self.depth = 0
            self._finish_depth(rnd)
            for c in self.children:
                self._send(c, ANC, self.vid, 1)
        elif rnd == self._anc_own_round:
            for c in self.children:
                self._send(c, ANC, self.vid, 1)
        if (self.nontree and self.depth is not None
                and sched.lvl_start <= rnd <= sched.lvl_start + self.depth):
            k = rnd - sched.lvl_start
            item = (self.anc + [self.vid])[k]
            fin = 1 if k == self.depth else 0
            for u in self.nontree:
                self._send(u, LCA, item, fin)
        if (self.depth is not None
                and sched.moe_start <= rnd < sched.moe_start + sched.moe_len):
            self._moe_round(rnd)
        if rnd == sched.ext_start and self.is_target:
            # The non-root free vertex triggers the search for the whole path.
            self._process_call(self.f, ODD, FWD)
        if rnd == sched.flip_start:
            self._flip()
        return self._outbox, self._wakes

    def _choose_parent(self) -> None:
        self.children = []
        if self.is_root:
            return
        want = self.dist[self.gamma] - 1
        bar = other_parity(self.gamma)
        for u in self.neighbors:  # sorted: smallest ID wins
            if self.nbr_dist[u][bar] == want:
                self.parent = u
                self._send(u, CLAIM)
                return
        self._fail("no valid parent (corrupted distance knowledge)")

    def _finish_depth(self, rnd: int) -> None:
        tree = set(self.children)
        if self.parent is not None:
            tree.add(self.parent)
        self.nontree = [u for u in self.neighbors if u not in tree]
        self._lvl_recv = {u: [] for u in self.nontree}
        if self.nontree:
            start = self.sched.lvl_start
            self._wakes.extend(range(start, start + self.depth + 1))

    def _on_anc(self, rnd: int, aid: int, fin: int) -> None:
        self.anc.append(aid)
        for c in self.children:
            self._send(c, ANC, aid, 0)
        if fin:
            self.depth = len(self.anc)
            self._finish_depth(rnd)
            if self.children:
                self._anc_own_round = rnd + 1
                self._wakes.append(rnd + 1)

    def _on_lca(self, src: int, aid: int, fin: int) -> None:
        buf = self._lvl_recv[src]
        buf.append(aid)
        if not fin:
            return
        mine = self.anc + [self.vid]
        k = 0
        while k < len(mine) and k < len(buf) and mine[k] == buf[k]:
            k += 1
        lca, lca_depth = mine[k - 1], k - 1
        rho = ODD if self.mate == src else EVEN
        a, b = self.dist[rho], self.nbr_dist[src][rho]
        level = (INF, INF) if a == INF or b == INF else (a + b, max(a, b))
        self.edge_info[src] = EdgeInfo(level, lca, lca_depth, rho)
        if level[0] == INF or lca == self.vid:
            return  # not a finite outgoing edge of this subtree
        cand = (level[0], level[1], src, self.vid, rho)
        self._pending_own.setdefault(lca_depth, []).append(cand)
        if lca_depth <= self.depth - 2:
            rnd = self.sched.moe_start + lca_depth + (self.sched.height - self.depth)
            self._wakes.append(rnd)

    def _merge(self, wave: int, cand: tuple, child: Optional[int]) -> None:
        cur = self.winners.get(wave)
        if cur is None or _cand_key(self.vid, cand) < _cand_key(self.vid, cur):
            self.winners[wave] = cand
            self._via[wave] = child

    def _wave_now(self, rnd: int) -> int:
        return rnd - self.sched.moe_start - (self.sched.height - self.depth)

    def _on_cand(self, rnd: int, src: int, fields) -> None:
        wave = self._wave_now(rnd)
        if not 0 <= wave < self.depth:
            self._fail(f"candidate outside any wave at round {rnd}")
            return
        w, y, s, mx, rho = fields
        self._merge(wave, (self._dec(s), self._dec(mx), y, w, rho), src)

    def _moe_round(self, rnd: int) -> None:
        wave = self._wave_now(rnd)
        if not 0 <= wave <= self.depth - 2:
            return
        for cand in self._pending_own.pop(wave, ()):
            self._merge(wave, cand, None)
        winner = self.winners.get(wave)
        if winner is not None and self.parent is not None:
            s, mx, y, z, rho = winner
            self._send(self.parent, CAND, z, y, self._enc(s), self._enc(mx), rho)

    def finalize_moes(self):
        if self._moe_final:
            return self.out
        for wave, cands in self._pending_own.items():
            for cand in cands:
                self._merge(wave, cand, None)
        self._pending_own = {}
        for wave, cand in self.winners.items():
            child = self._via[wave]
            if child is not None:
                self.route[wave] = (cand[3], child)
        if self.winners:
            wave, cand = min(
                self.winners.items(), key=lambda kv: (_cand_key(self.vid, kv[1]), kv[0])
            )
            s, mx, y, z, rho = cand
            self.out = OutInfo((s, mx), y, z, rho, wave)
        self._moe_final = True
        return self.out

    # -- path search -------------------------------------------------------

    def _set_pred(self, x: int) -> None:
        if self.pred is not None and self.pred != x:
            self._fail(f"predecessor collision: {self.pred} vs {x}")
        self.pred = x

    def _set_succ(self, x: int) -> None:
        if self.succ is not None and self.succ != x:
            self._fail(f"successor collision: {self.succ} vs {x}")
        self.succ = x

    def _record(self, other_vertex: int, other_is_forward_side: bool, orient: int) -> None:
        # forward side = nearer the root in the final root-to-target order.
        if (orient == FWD) == other_is_forward_side:
            self._set_pred(other_vertex)
        else:
            self._set_succ(other_vertex)

    def _on_parent_trigger(self, child: int, s: int, orient: int) -> None:
        self._record(child, False, orient)
        if self.vid == s:
            return
        theta = other_parity(self._gamma_of(child))
        self._process_call(s, theta, orient)

    def _on_route_trigger(self, fields) -> None:
        s, t, z, wave, orient = fields
        if self.vid == z:
            self._cross_and_split(s, t, wave, orient)
            return
        entry = self.route.get(wave)
        if entry is None or entry[0] != z:
            self._fail(f"no routing entry toward {z} at depth {wave}")
            return
        self._send(entry[1], TRIG_ROUTE, s, t, z, wave, orient)

    def _on_cross_trigger(self, z: int, s: int, orient: int) -> None:
        self._record(z, False, orient)
        if self.vid == s:
            return
        rho = ODD if self.mate == z else EVEN
        self._process_call(s, rho, orient)

    def _cross_and_split(self, s: int, t: int, wave: int, orient: int) -> None:
        winner = self.winners.get(wave)
        if winner is None or winner[3] != self.vid:
            self._fail(f"crossing vertex lacks the depth-{wave} winning edge")
            return
        _s, _mx, y, _z, rho = winner
        local_rho = ODD if self.mate == y else EVEN
        if rho != local_rho:
            self._fail(f"edge parity mismatch on outgoing edge to {y}")
            return
        self._record(y, True, orient)
        self._send(y, TRIG_CROSS, s, t, orient)
        if self.vid != t:
            # Subtree-side branch emits its segment reversed: flip orientation.
            self._process_call(t, rho, orient ^ 1)

    def _process_call(self, s: int, theta: int, orient: int) -> None:
        if self.vid == s:
            return
        if theta == self.gamma:
            if self.parent is None:
                self._fail("tree descent reached the root unexpectedly")
                return
            self._record(self.parent, True, orient)
            self._send(self.parent, TRIG_PARENT, s, orient)
            return
        out = self.finalize_moes()
        if out is None:
            self._fail("branch requires an outgoing edge but none exists")
            return
        if out.z == self.vid:
            self._cross_and_split(s, self.vid, out.wave, orient)
            return
        entry = self.route.get(out.wave)
        if entry is None or entry[0] != out.z:
            self._fail(f"no routing entry toward {out.z} at depth {out.wave}")
            return
        self._send(entry[1], TRIG_ROUTE, s, self.vid, out.z, out.wave, orient)

    # -- augmentation flip ---------------------------------------------------

    def _flip(self) -> None:
        if self.pred is None and self.succ is None:
            return
        new_mates = []
        for x in (self.pred, self.succ):
            if x is None:
                continue
            now_matched = self.mate == x
            bit = 0 if now_matched else 1
            self.flip_bits[x] = bit
            if bit:
                new_mates.append(x)
            self._send(x, FLIP, bit)
        if len(new_mates) != 1:
            self._fail(f"flip produced {len(new_mates)} matched path edges")
            return
        self.new_mate = new_mates[0]


def make_programs(graph: Graph, matching: Matching, f: int,
                  dist_pairs, sched: PhaseSchedule) -> list[RegionProgram]:
    """One program per vertex, seeded with the injected local knowledge."""
    programs = []
    for v in range(graph.n):
        prog = RegionProgram(v, graph.n, matching.mate[v], tuple(dist_pairs[v]), f, sched)
        prog.neighbors = graph.adj[v]
        programs.append(prog)
    return programs

"""Deterministic synchronous message-passing simulator.

Nodes run in lockstep rounds.  In a round every node reads the messages sent
to it in the previous round, performs local computation, and emits at most one
message per incident link direction (violations are reported by the
congestion audit).  Messages carry at most :data:`MAX_FIELDS` integer fields,
each within ``[0, 8n]``, which keeps every message within O(log n) bits.

Execution is fixed-budget: algorithms run for a precomputed number of rounds
and their outputs are read from node-local state afterwards, so there is no
termination detection.  Two runs with identical programs produce bit-identical
traces; node step order and inbox order are fixed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

from .graphs import Graph

MAX_FIELDS = 6

# (src, tag, fields) as seen in an inbox; (dst, tag, fields) in an outbox.
InMessage = tuple[int, int, tuple[int, ...]]
OutMessage = tuple[int, int, tuple[int, ...]]


class SimulationError(RuntimeError):
    pass


def field_bound(n: int) -> int:
    return 8 * n


def bits_per_field(n: int) -> int:
    # Enough bits for any value in [0, 8n].
    return max(1, field_bound(n).bit_length())


class MessageEnvelope(NamedTuple):
    src: int
    dst: int
    tag: int
    fields: tuple[int, ...]
    bits: int


@dataclass
class RoundTrace:
    """Per-round log of message envelopes (optional) and message counts."""

    n: int
    retain: bool = True
    rounds: list[list[MessageEnvelope]] = field(default_factory=list)
    counts: list[int] = field(default_factory=list)
    inline_congestion: list[tuple[int, int, int]] = field(default_factory=list)

    @property
    def num_rounds(self) -> int:
        return len(self.counts)

    def total_messages(self) -> int:
        return sum(self.counts)

    def active_rounds(self, start: int = 0, stop: Optional[int] = None) -> int:
        stop = self.num_rounds if stop is None else stop
        return sum(1 for r in range(start, min(stop, self.num_rounds)) if self.counts[r])


def check_bandwidth(trace: RoundTrace, n: int) -> list[tuple[int, MessageEnvelope, str]]:
    """Every envelope violating the field budget, as (round, envelope, why)."""
    bound = field_bound(n)
    bad = []
    for rnd, envs in enumerate(trace.rounds):
        for env in envs:
            if len(env.fields) > MAX_FIELDS:
                bad.append((rnd, env, f"{len(env.fields)} fields exceed {MAX_FIELDS}"))
            for x in env.fields:
                if not (0 <= x <= bound):
                    bad.append((rnd, env, f"field {x} outside [0, {bound}]"))
    return bad


def check_congestion(trace: RoundTrace) -> list[tuple[int, int, int]]:
    """Every (round, src, dst) link direction carrying two or more envelopes."""
    if not trace.retain:
        return list(trace.inline_congestion)
    bad = []
    for rnd, envs in enumerate(trace.rounds):
        seen: set[tuple[int, int]] = set()
        flagged: set[tuple[int, int]] = set()
        for env in envs:
            key = (env.src, env.dst)
            if key in seen and key not in flagged:
                bad.append((rnd, env.src, env.dst))
                flagged.add(key)
            seen.add(key)
    return bad


def trace_to_csv(trace: RoundTrace, path: str, round_offset: int = 0) -> None:
    with open(path, "w", newline="") as fh:
        _write_trace_rows(trace, csv.writer(fh), round_offset, header=True)


def _write_trace_rows(trace, writer, round_offset: int, header: bool) -> None:
    if header:
        writer.writerow(
            ["round", "src", "dst", "tag"] + [f"f{i}" for i in range(MAX_FIELDS)] + ["bits"]
        )
    for rnd, envs in enumerate(trace.rounds):
        for env in envs:
            pad = [""] * (MAX_FIELDS - len(env.fields))
            writer.writerow(
                [rnd + round_offset, env.src, env.dst, env.tag]
                + list(env.fields) + pad + [env.bits]
            )


class NodeProgram:
    """Base class for per-vertex programs.

    ``step`` receives the round number and the inbox (messages sent to this
    node in the previous round, sorted by sender) and returns an outbox plus
    the rounds at which the node must be scheduled even without input.  A
    step with an empty inbox at a non-requested round must be a no-op; the
    lazy scheduler relies on that.
    """

    def __init__(self, vid: int):
        self.vid = vid

    def initial_wakes(self) -> Iterable[int]:
        return ()

    def step(self, rnd: int, inbox: list[InMessage]) -> tuple[list[OutMessage], Iterable[int]]:
        raise NotImplementedError


class Network:
    """A synchronous network over ``graph`` with one program per vertex."""

    def __init__(self, graph: Graph, programs: Sequence[NodeProgram],
                 retain_trace: bool = True, lazy: bool = False):
        if len(programs) != graph.n or graph.n == 0:
            raise SimulationError(
                f"need exactly one program per vertex ({graph.n}), got {len(programs)}"
            )
        for v, prog in enumerate(programs):
            if prog.vid != v:
                raise SimulationError(f"program at index {v} has vid {prog.vid}")
        self.graph = graph
        self.programs = list(programs)
        self.round = 0
        self.trace = RoundTrace(graph.n, retain=retain_trace)
        self.lazy = lazy
        self._inbox: dict[int, list[InMessage]] = {}
        self._wake: dict[int, set[int]] = {}
        self._bits = bits_per_field(graph.n)
        self._bound = field_bound(graph.n)
        if lazy:
            for prog in programs:
                for r in prog.initial_wakes():
                    self._wake.setdefault(r, set()).add(prog.vid)

    def _active(self) -> list[int]:
        if not self.lazy:
            return range(self.graph.n)  # type: ignore[return-value]
        woken = self._wake.pop(self.round, ())
        if woken:
            return sorted(set(self._inbox) | set(woken))
        return sorted(self._inbox)

    def run_round(self):
        """Execute one round; returns the delivered envelopes (retained mode)
        or their count."""
        rnd = self.round
        nxt: dict[int, list[InMessage]] = {}
        envs: list[MessageEnvelope] = [] if self.trace.retain else None
        count = 0
        seen: set[tuple[int, int]] = set()
        adj = self.graph.adj
        empty: list[InMessage] = []
        for v in self._active():
            prog = self.programs[v]
            inbox = self._inbox.get(v, empty)
            if inbox:
                inbox.sort()
            outbox, wakes = prog.step(rnd, inbox)
            for dst, tag, fields in outbox:
                if dst not in adj[v]:
                    raise SimulationError(
                        f"round {rnd}: {v} sent to non-neighbor {dst}"
                    )
                if len(fields) > MAX_FIELDS:
                    raise SimulationError(
                        f"round {rnd}: {v}->{dst} carries {len(fields)} fields (max {MAX_FIELDS})"
                    )
                for x in fields:
                    if not (0 <= x <= self._bound):
                        raise SimulationError(
                            f"round {rnd}: {v}->{dst} field {x} outside [0, {self._bound}]"
                        )
                key = (v, dst)
                if key in seen:
                    self.trace.inline_congestion.append((rnd, v, dst))
                seen.add(key)
                nxt.setdefault(dst, []).append((v, tag, fields))
                count += 1
                if envs is not None:
                    envs.append(
                        MessageEnvelope(v, dst, tag, tuple(fields), len(fields) * self._bits)
                    )
            for r in wakes:
                if r <= rnd:
                    raise SimulationError(f"wake request for past round {r} at round {rnd}")
                if self.lazy:
                    self._wake.setdefault(r, set()).add(v)
        self._inbox = nxt
        if envs is not None:
            self.trace.rounds.append(envs)
        self.trace.counts.append(count)
        self.round += 1
        return envs if envs is not None else count

    def run(self, budget: int) -> RoundTrace:
        """Execute exactly ``budget`` rounds and return the trace."""
        if budget < 0:
            raise SimulationError("round budget must be nonnegative")
        for _ in range(budget):
            self.run_round()
        return self.trace


def build_network(graph: Graph, programs: Sequence[NodeProgram],
                  retain_trace: bool = True, lazy: bool = False) -> Network:
    return Network(graph, programs, retain_trace=retain_trace, lazy=lazy)


def run_until(net: Network, budget: int) -> RoundTrace:
    return net.run(budget)

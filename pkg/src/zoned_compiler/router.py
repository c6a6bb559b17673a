"""Movement batches between placement points and schedule assembly.

A batch is a set of moves one AOD sweep can carry at once: for every two
members the left/right and below/above order of their start points equals
that of their end points (rows and columns never cross).  Each move travels
along a waypoint path that first hops off its site into an empty lane, so it
never brushes an atom still held in a static trap.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from . import kernels
from .architecture import ArchitectureConfig, SiteTable
from .kernels import RoutingError
from .placement import PlacementPoint, PlacementSequence
from .timing import TimingModel

DEFAULT_CLEARANCE = 2.0
FORMAT_NAME = "zoned-schedule"
FORMAT_VERSION = 1


class ScheduleError(RuntimeError):
    """The assembled timeline breaks a physical invariant."""


@dataclass(frozen=True)
class Move:
    qubit: int
    vector: tuple[float, float, float, float]  # (start_x, end_x, start_y, end_y)
    start_site: int = -1
    end_site: int = -1
    waypoints: tuple[tuple[float, float], ...] = ()

    @property
    def start(self) -> tuple[float, float]:
        return self.vector[0], self.vector[2]

    @property
    def end(self) -> tuple[float, float]:
        return self.vector[1], self.vector[3]

    @property
    def distance(self) -> float:
        return math.dist(self.start, self.end)

    @property
    def path_length(self) -> float:
        if len(self.waypoints) < 2:
            return self.distance
        return math.fsum(math.dist(a, b) for a, b in zip(self.waypoints, self.waypoints[1:]))


@dataclass(frozen=True)
class MoveBatch:
    moves: tuple[Move, ...]
    duration: float  # travel time of the slowest member

    @property
    def qubits(self) -> list[int]:
        return [m.qubit for m in self.moves]


@dataclass(frozen=True)
class MoveConflictDag:
    """``edges[i] = (a, b)``: move ``a`` must run in an earlier batch than move ``b``."""

    n_moves: int
    edges: tuple[tuple[int, int], ...]

    def is_acyclic(self) -> bool:
        indeg = [0] * self.n_moves
        out: list[list[int]] = [[] for _ in range(self.n_moves)]
        for a, b in self.edges:
            out[a].append(b)
            indeg[b] += 1
        stack = [i for i in range(self.n_moves) if indeg[i] == 0]
        seen = 0
        while stack:
            i = stack.pop()
            seen += 1
            for j in out[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    stack.append(j)
        return seen == self.n_moves

    def respects(self, batch_of: Sequence[int]) -> bool:
        return all(batch_of[a] < batch_of[b] for a, b in self.edges)


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def order_preserving(a: Move, b: Move) -> bool:
    """True when ``a`` and ``b`` can share one AOD sweep."""
    ax0, ax1, ay0, ay1 = a.vector
    bx0, bx1, by0, by1 = b.vector
    return _sign(ax0 - bx0) == _sign(ax1 - bx1) and _sign(ay0 - by0) == _sign(ay1 - by1)


def batch_moves(
    moves: Sequence[Move],
    dependencies: Iterable[tuple[int, int]] = (),
    timing: TimingModel = TimingModel(),
) -> tuple[list[MoveBatch], MoveConflictDag, list[int]]:
    """Greedy batching in ``(start_y, start_x, qubit, index)`` order.

    ``dependencies`` holds ``(a, b)`` index pairs where move ``a`` must finish
    before move ``b`` starts.  Returns the batches, the conflict DAG (the
    dependencies plus one edge per incompatible pair, pointing from the earlier
    batch) and the batch index of every move.
    """
    m = len(moves)
    deps = [(int(a), int(b)) for a, b in dependencies]
    preds: list[list[int]] = [[] for _ in range(m)]
    for a, b in deps:
        preds[b].append(a)
    order = sorted(range(m), key=lambda i: (moves[i].vector[2], moves[i].vector[0], moves[i].qubit, i))
    batch_of = [-1] * m
    b = 0
    done = 0
    while done < m:
        members: list[int] = []
        for i in order:
            if batch_of[i] != -1:
                continue
            if any(batch_of[p] == -1 or batch_of[p] == b for p in preds[i]):
                continue
            if all(order_preserving(moves[i], moves[j]) for j in members):
                batch_of[i] = b
                members.append(i)
                done += 1
        if not members:
            raise RoutingError("cyclic move dependencies")
        b += 1
    edges = set(deps)
    for i in range(m):
        for j in range(i + 1, m):
            if not order_preserving(moves[i], moves[j]):
                edges.add((i, j) if batch_of[i] < batch_of[j] else (j, i))
    dag = MoveConflictDag(m, tuple(sorted(edges)))
    batches = []
    for k in range(b):
        mv = tuple(moves[i] for i in range(m) if batch_of[i] == k)
        batches.append(MoveBatch(mv, timing.t_move(max(x.path_length for x in mv))))
    return batches, dag, batch_of


def _lanes(coords: Iterable[float], clearance: float) -> list[float]:
    """Lane coordinates at least ``clearance`` from every value in ``coords``."""
    vals = sorted(set(round(float(c), 9) for c in coords))
    if not vals:
        return [0.0]
    margin = clearance + 1.0
    lanes = [vals[0] - margin, vals[-1] + margin]
    for lo, hi in zip(vals, vals[1:]):
        if hi - lo >= 2 * clearance:
            lanes.append(0.5 * (lo + hi))
    return sorted(lanes)


def _segment_clearance(p: tuple[float, float], q: tuple[float, float], pts: np.ndarray) -> float:
    if len(pts) == 0:
        return math.inf
    px, py = p
    dx, dy = q[0] - px, q[1] - py
    ll = dx * dx + dy * dy
    rx = pts[:, 0] - px
    ry = pts[:, 1] - py
    if ll == 0:
        t = np.zeros(len(pts))
    else:
        t = np.clip((rx * dx + ry * dy) / ll, 0.0, 1.0)
    return float(np.min(np.hypot(rx - t * dx, ry - t * dy)))


def path_clearance(waypoints: Sequence[tuple[float, float]], obstacles: np.ndarray) -> float:
    """Smallest distance between the polyline and any obstacle point."""
    obstacles = np.asarray(obstacles, dtype=float).reshape(-1, 2)
    return min(
        (_segment_clearance(a, b, obstacles) for a, b in zip(waypoints, waypoints[1:])),
        default=math.inf,
    )


def pre_shift_path(
    start: tuple[float, float],
    end: tuple[float, float],
    obstacles: np.ndarray,
    clearance: float = DEFAULT_CLEARANCE,
) -> list[tuple[float, float]]:
    """Waypoints for one move that stay ``clearance`` away from every obstacle.

    The atom hops vertically into the nearest empty row lane and leaves the
    lane the same way onto its target.  In between it flies straight when
    nothing is in the way, otherwise along a clear column lane.
    Returns ``[]`` for a zero-length move.
    """
    start = (float(start[0]), float(start[1]))
    end = (float(end[0]), float(end[1]))
    if start == end:
        return []
    obstacles = np.asarray(obstacles, dtype=float).reshape(-1, 2)
    ys = list(obstacles[:, 1]) + [start[1], end[1]]
    xs = list(obstacles[:, 0]) + [start[0], end[0]]
    ylanes = _lanes(ys, clearance)
    xlanes = _lanes(xs, clearance)
    y0s = sorted(ylanes, key=lambda y: (abs(y - start[1]), y))[:2]
    y1s = sorted(ylanes, key=lambda y: (abs(y - end[1]), y))[:2]
    xcands = sorted(xlanes, key=lambda x: (abs(x - start[0]) + abs(x - end[0]), x))
    candidates = [[start, (start[0], y0), (end[0], y1), end] for y0 in y0s for y1 in y1s]
    candidates += [
        [start, (start[0], y0), (x, y0), (x, y1), (end[0], y1), end]
        for y0 in y0s
        for y1 in y1s
        for x in xcands
    ]
    for raw in candidates:
        path = [raw[0]]
        for pt in raw[1:]:
            if pt != path[-1]:
                path.append(pt)
        if path_clearance(path, obstacles) >= clearance:
            return path
    raise RoutingError(f"no clear lane from {start} to {end}")


def _dependencies(ms: np.ndarray, me: np.ndarray, mq: np.ndarray) -> list[tuple[int, int]]:
    """Move ``a`` before ``b`` when ``a`` vacates ``b``'s target, or is an earlier leg of ``b``."""
    deps = []
    start_at = {int(s): i for i, s in enumerate(ms)}
    for b in range(len(me)):
        a = start_at.get(int(me[b]))
        if a is not None and mq[a] != mq[b]:
            deps.append((a, b))
    # a parked atom's second leg starts where its first leg ended
    for a in range(len(me)):
        for b in range(len(me)):
            if a != b and mq[a] == mq[b] and me[a] == ms[b]:
                deps.append((a, b))
    return sorted(set(deps))


@dataclass(frozen=True)
class TransitionPlan:
    batches: list[MoveBatch]
    dag: MoveConflictDag
    batch_of: list[int]
    obstacles: list[np.ndarray]  # static atom positions during each batch


def plan_transition(
    src: PlacementPoint | np.ndarray,
    dst: PlacementPoint | np.ndarray,
    table: SiteTable,
    timing: TimingModel = TimingModel(),
    clearance: float = DEFAULT_CLEARANCE,
) -> TransitionPlan:
    """Batches that carry every atom from ``src`` to ``dst``."""
    a = np.asarray(src.sites if isinstance(src, PlacementPoint) else src, dtype=np.int64)
    b = np.asarray(dst.sites if isinstance(dst, PlacementPoint) else dst, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError("placements cover different qubit counts")
    mq, ms, me, bt, nb = kernels.route_transition(a, b, table.xs, table.ys)
    moves = [
        Move(
            int(q),
            (float(table.xs[s]), float(table.xs[e]), float(table.ys[s]), float(table.ys[e])),
            int(s),
            int(e),
        )
        for q, s, e in zip(mq, ms, me)
    ]
    deps = _dependencies(ms, me, mq)
    batches0, dag, batch_of = batch_moves(moves, deps, timing)
    if batch_of != [int(x) for x in bt]:
        raise RoutingError("kernel batching disagrees with the reference batching")

    pos = {q: int(s) for q, s in enumerate(a)}
    batches: list[MoveBatch] = []
    obstacle_sets: list[np.ndarray] = []
    for k, batch in enumerate(batches0):
        moving = {m.qubit for m in batch.moves}
        static = [pos[q] for q in pos if q not in moving]
        obs = np.column_stack([table.xs[static], table.ys[static]]) if static else np.zeros((0, 2))
        routed = []
        for m in batch.moves:
            try:
                wp = pre_shift_path(m.start, m.end, obs, clearance)
            except RoutingError as exc:
                raise RoutingError(f"q{m.qubit}: {exc}") from None
            routed.append(Move(m.qubit, m.vector, m.start_site, m.end_site, tuple(wp)))
        for m in routed:
            pos[m.qubit] = m.end_site
        batches.append(MoveBatch(tuple(routed), timing.t_move(max(x.path_length for x in routed))))
        obstacle_sets.append(obs)
    if [pos[q] for q in range(len(b))] != [int(x) for x in b]:
        raise RoutingError("batches do not realize the target placement")
    return TransitionPlan(batches, dag, batch_of, obstacle_sets)


# --- schedule ---------------------------------------------------------------


@dataclass(frozen=True)
class MoveEvent:
    start: float
    duration: float  # travel plus pick and drop
    transition: int
    batch: MoveBatch
    type: str = "move"


@dataclass(frozen=True)
class PulseEvent:
    start: float
    duration: float
    stage: int
    gates: tuple[tuple[int, int, int], ...]  # (gate id, qubit a, qubit b)
    type: str = "pulse"


@dataclass(frozen=True)
class SingleQubitEvent:
    start: float
    duration: float
    boundary: int
    gates: tuple[tuple[int, str, int, tuple[float, ...]], ...]  # (gate id, name, qubit, params)
    type: str = "1q"


Event = Union[MoveEvent, PulseEvent, SingleQubitEvent]


@dataclass(frozen=True)
class Counters:
    g1: int
    g2: int
    n_trans: int
    n_res: int
    n_moves: int
    n_batches: int
    n_stages: int
    total_time: float


@dataclass
class Schedule:
    n_qubits: int
    config: ArchitectureConfig
    timing: TimingModel
    initial_sites: np.ndarray
    events: list[Event]
    counters: Counters
    qubit_time: np.ndarray  # per-qubit span excluding its own transfer durations
    qubit_transfers: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def pulses(self) -> list[PulseEvent]:
        return [e for e in self.events if isinstance(e, PulseEvent)]

    @property
    def move_events(self) -> list[MoveEvent]:
        return [e for e in self.events if isinstance(e, MoveEvent)]

    def save(self, path: str | Path) -> None:
        Path(path).write_text(dumps_schedule(self), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Schedule":
        return loads_schedule(Path(path).read_text(encoding="utf-8"))


def _ent_pairs(xs: np.ndarray, ys: np.ndarray, qubits: Sequence[int], radius: float) -> set[tuple[int, int]]:
    pairs = set()
    for i, qa in enumerate(qubits):
        for qb in qubits[i + 1 :]:
            if math.hypot(xs[qa] - xs[qb], ys[qa] - ys[qb]) < radius:
                pairs.add((min(qa, qb), max(qa, qb)))
    return pairs


def assemble_schedule(
    seq: PlacementSequence,
    timing: TimingModel = TimingModel(),
    clearance: float = DEFAULT_CLEARANCE,
) -> Schedule:
    """Lay out moves, pulses and single-qubit layers on one timeline.

    Order: single-qubit layer 0, moves into stage 0, pulse 0, moves into
    layer 0, single-qubit layer 1, moves into stage 1, and so on, ending with
    the single-qubit layer after the last stage.
    """
    circuit, plan, table = seq.circuit, seq.plan, seq.table
    n = circuit.n_qubits
    ns = table.n_storage
    arr = seq.as_array()
    boundary = plan.boundary_gates(circuit)
    events: list[Event] = []
    t = 0.0
    first = np.full(n, math.nan)
    last = np.full(n, math.nan)
    transfers = np.zeros(n, dtype=np.int64)
    n_moves = n_batches = n_res = 0

    def touch(q: int, t0: float, t1: float) -> None:
        if math.isnan(first[q]):
            first[q] = t0
        last[q] = t1

    def single_layer(k: int) -> None:
        nonlocal t
        gids = boundary[k] if k < len(boundary) else []
        if not gids:
            return
        per_q: dict[int, int] = {}
        gates = []
        for g in gids:
            gate = circuit.gates[g]
            q = gate.qubits[0]
            per_q[q] = per_q.get(q, 0) + 1
            gates.append((g, gate.name, q, tuple(gate.params)))
        dur = timing.single_qubit_time * max(per_q.values())
        events.append(SingleQubitEvent(t, dur, k, tuple(gates)))
        for q in per_q:
            touch(q, t, t + dur)
        t += dur

    def transition(p: int) -> None:
        nonlocal t, n_moves, n_batches
        tp = plan_transition(arr[p], arr[p + 1], table, timing, clearance)
        for batch in tp.batches:
            dur = batch.duration + 2 * timing.transfer_time
            events.append(MoveEvent(t, dur, p, batch))
            for m in batch.moves:
                touch(m.qubit, t, t + dur)
                transfers[m.qubit] += 2
            n_moves += len(batch.moves)
            n_batches += 1
            t += dur

    if n == 0 or arr.shape[0] == 0:
        counters = Counters(circuit.n_single, circuit.n_cz, 0, 0, 0, 0, plan.n_stages, 0.0)
        return Schedule(n, table.config, timing, np.zeros(0, dtype=np.int64), [], counters,
                        np.zeros(0), np.zeros(0, dtype=np.int64))

    single_layer(0)
    for k in range(plan.n_stages):
        transition(2 * k)
        stage_sites = arr[2 * k + 1]
        gates = tuple((g, *circuit.gates[g].qubits) for g in plan.stages[k])
        want = {(min(a, b), max(a, b)) for _, a, b in gates}
        in_ent = [q for q in range(n) if stage_sites[q] >= ns]
        stray = [q for q in in_ent if not any(q in pr for pr in want)]
        n_res += len(stray)
        got = _ent_pairs(table.xs[stage_sites], table.ys[stage_sites], in_ent, table.config.rydberg_radius)
        if got != want or stray:
            raise ScheduleError(f"stage {k}: blockade pairs {sorted(got)} != gates {sorted(want)}")
        events.append(PulseEvent(t, timing.pulse_time, k, gates))
        for _, a, b in gates:
            touch(a, t, t + timing.pulse_time)
            touch(b, t, t + timing.pulse_time)
        t += timing.pulse_time
        transition(2 * k + 1)
        single_layer(k + 1)

    span = np.where(np.isnan(first), 0.0, last - first)
    qubit_time = span - transfers * timing.transfer_time
    counters = Counters(
        g1=circuit.n_single,
        g2=circuit.n_cz,
        n_trans=2 * n_moves,
        n_res=n_res,
        n_moves=n_moves,
        n_batches=n_batches,
        n_stages=plan.n_stages,
        total_time=t,
    )
    if n_res:
        raise ScheduleError(f"{n_res} idle atoms exposed to a pulse")
    return Schedule(n, table.config, timing, arr[0].copy(), events, counters, qubit_time, transfers)


# --- serialization ----------------------------------------------------------


def _event_record(e: Event) -> dict:
    if isinstance(e, MoveEvent):
        return {
            "type": "move",
            "start": e.start,
            "duration": e.duration,
            "travel": e.batch.duration,
            "transition": e.transition,
            "moves": [
                {
                    "qubit": m.qubit,
                    "vector": list(m.vector),
                    "from": m.start_site,
                    "to": m.end_site,
                    "waypoints": [list(w) for w in m.waypoints],
                }
                for m in e.batch.moves
            ],
        }
    if isinstance(e, PulseEvent):
        return {"type": "pulse", "start": e.start, "duration": e.duration, "stage": e.stage,
                "gates": [list(g) for g in e.gates]}
    return {"type": "1q", "start": e.start, "duration": e.duration, "boundary": e.boundary,
            "gates": [[g, name, q, list(p)] for g, name, q, p in e.gates]}


def dumps_schedule(s: Schedule) -> str:
    """Serialize as JSON Lines: header, one line per event, counters."""
    head = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "n_qubits": s.n_qubits,
        "config": s.config.to_dict(),
        "timing": s.timing.to_dict(),
        "initial_sites": [int(v) for v in s.initial_sites],
        "meta": s.meta,
    }
    lines = [json.dumps(head)]
    lines += [json.dumps(_event_record(e)) for e in s.events]
    tail = {"type": "counters", **s.counters.__dict__,
            "qubit_time": [float(v) for v in s.qubit_time],
            "qubit_transfers": [int(v) for v in s.qubit_transfers]}
    lines.append(json.dumps(tail))
    return "\n".join(lines) + "\n"


def loads_schedule(text: str) -> Schedule:
    rows = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not rows or rows[0].get("format") != FORMAT_NAME:
        raise ValueError("not a schedule file")
    head = rows[0]
    if head.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported schedule version {head.get('version')}")
    tail = rows[-1]
    if tail.get("type") != "counters":
        raise ValueError("schedule file is truncated (no counters record)")
    events: list[Event] = []
    for r in rows[1:-1]:
        if r["type"] == "move":
            moves = tuple(
                Move(m["qubit"], tuple(m["vector"]), m["from"], m["to"], tuple(tuple(w) for w in m["waypoints"]))
                for m in r["moves"]
            )
            events.append(MoveEvent(r["start"], r["duration"], r["transition"], MoveBatch(moves, r["travel"])))
        elif r["type"] == "pulse":
            events.append(PulseEvent(r["start"], r["duration"], r["stage"], tuple(tuple(g) for g in r["gates"])))
        elif r["type"] == "1q":
            events.append(SingleQubitEvent(
                r["start"], r["duration"], r["boundary"],
                tuple((g, name, q, tuple(p)) for g, name, q, p in r["gates"]),
            ))
        else:
            raise ValueError(f"unknown event type {r['type']!r}")
    counters = Counters(**{k: tail[k] for k in Counters.__dataclass_fields__})
    return Schedule(
        head["n_qubits"],
        ArchitectureConfig(**head["config"]),
        TimingModel(**head["timing"]),
        np.array(head["initial_sites"], dtype=np.int64),
        events,
        counters,
        np.array(tail["qubit_time"], dtype=float),
        np.array(tail["qubit_transfers"], dtype=np.int64),
        head.get("meta", {}),
    )

"""Qubit placement across the compile timeline and its simulated-annealing refinement.

The timeline is the point sequence ``Init, Stage0, Layer0, Stage1, Layer1, ...``.
A point stores, for every qubit, the dense site index it occupies (see
:class:`~zoned_compiler.architecture.SiteTable`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import kernels
from .architecture import ArchitectureConfig, ArchitectureError, Occupancy, SiteTable
from .ir import Circuit
from .scheduler import StagePlan
from .timing import TimingModel


class PointKind(str, Enum):
    INITIAL = "initial"
    STAGE = "stage"
    LAYER = "layer"


_KIND_CODE = {PointKind.INITIAL: 0, PointKind.STAGE: 1, PointKind.LAYER: 2}


@dataclass(frozen=True)
class PlacementPoint:
    kind: PointKind
    index: int  # stage number; -1 for the initial layer
    sites: np.ndarray  # site index per qubit

    def occupancy(self, table: SiteTable) -> Occupancy:
        return Occupancy({q: table.sites[int(s)] for q, s in enumerate(self.sites)})

    @property
    def label(self) -> str:
        if self.kind is PointKind.INITIAL:
            return "init"
        return f"{self.kind.value}{self.index}"


@dataclass(frozen=True)
class PlacementSequence:
    circuit: Circuit
    plan: StagePlan
    table: SiteTable
    points: tuple[PlacementPoint, ...]

    @property
    def config(self) -> ArchitectureConfig:
        return self.table.config

    def as_array(self) -> np.ndarray:
        n = self.circuit.n_qubits
        if not self.points:
            return np.zeros((0, n), dtype=np.int64)
        return np.ascontiguousarray(np.stack([p.sites for p in self.points]).astype(np.int64))

    def with_sites(self, sites: np.ndarray) -> "PlacementSequence":
        pts = tuple(replace(p, sites=np.array(sites[i], dtype=np.int64)) for i, p in enumerate(self.points))
        return replace(self, points=pts)

    def gate_pairs(self, k: int) -> list[tuple[int, int]]:
        return [self.circuit.gates[g].qubits for g in self.plan.stages[k]]


class PlacementError(ArchitectureError):
    pass


def _retained(plan: StagePlan, circuit: Circuit, k: int) -> set[int]:
    """Qubits used by both stage ``k`` and stage ``k + 1``."""
    if k + 1 >= plan.n_stages:
        return set()
    now = {q for g in plan.stages[k] for q in circuit.gates[g].qubits}
    nxt = {q for g in plan.stages[k + 1] for q in circuit.gates[g].qubits}
    return now & nxt


def initial_placement(config: ArchitectureConfig, circuit: Circuit) -> PlacementPoint:
    """Qubit ``i`` at storage site ``(i // cols, i % cols)``."""
    if circuit.n_qubits > config.storage_capacity:
        raise PlacementError(
            f"storage holds {config.storage_capacity} atoms, circuit needs {circuit.n_qubits}"
        )
    return PlacementPoint(PointKind.INITIAL, -1, np.arange(circuit.n_qubits, dtype=np.int64))


def propose_stage_placement(
    plan: StagePlan,
    k: int,
    previous: PlacementPoint,
    config: ArchitectureConfig,
    circuit: Circuit,
    table: SiteTable | None = None,
) -> PlacementPoint:
    """Put each stage-``k`` gate on one pair site.

    Gates with a qubit already sitting in the entanglement zone claim that
    qubit's pair site, so retained atoms stay put; the rest take the free pair
    site closest to their qubits.  Within a fresh site the qubit further left
    takes the Left slot.
    """
    table = table or SiteTable(config)
    ns = table.n_storage
    if len(plan.stages[k]) > table.n_pairs:
        raise PlacementError(f"stage {k} has {len(plan.stages[k])} gates, only {table.n_pairs} pair sites")
    prev = previous.sites
    sites = prev.copy()
    claimed: dict[int, int] = {}  # pair -> gate
    assign: dict[int, tuple[int, int, int]] = {}  # gate -> (pair, slot of a, slot of b)
    gates = [circuit.gates[g] for g in plan.stages[k]]

    for g in gates:
        a, b = g.qubits
        for q, partner in ((a, b), (b, a)):
            if prev[q] >= ns:
                pair = (int(prev[q]) - ns) // 2
                if pair in claimed:
                    continue
                slot = (int(prev[q]) - ns) % 2
                claimed[pair] = g.id
                assign[g.id] = (pair, slot, 1 - slot) if q == a else (pair, 1 - slot, slot)
                break

    for g in gates:
        if g.id in assign:
            continue
        a, b = g.qubits
        cx = 0.5 * (table.xs[prev[a]] + table.xs[prev[b]])
        cy = 0.5 * (table.ys[prev[a]] + table.ys[prev[b]])
        best, best_d = -1, math.inf
        for pair in range(table.n_pairs):
            if pair in claimed:
                continue
            left = table.slot_index(pair, 0)
            px = table.xs[left] + 0.5 * config.intra_pair_gap
            d = (px - cx) ** 2 + (table.ys[left] - cy) ** 2
            if d < best_d:
                best, best_d = pair, d
        claimed[best] = g.id
        left_a = (table.xs[prev[a]], a) <= (table.xs[prev[b]], b)
        assign[g.id] = (best, 0, 1) if left_a else (best, 1, 0)

    for g in gates:
        pair, sa, sb = assign[g.id]
        sites[g.qubits[0]] = table.slot_index(pair, sa)
        sites[g.qubits[1]] = table.slot_index(pair, sb)
    # qubits that sat in the entanglement zone but are not in this stage cannot
    # exist: the previous layer only keeps qubits of this stage
    return PlacementPoint(PointKind.STAGE, k, sites)


def _nearest_free_storage(table: SiteTable, taken: set[int], x: float, y: float) -> int:
    best, best_d = -1, math.inf
    for s in range(table.n_storage):
        if s in taken:
            continue
        d = (table.xs[s] - x) ** 2 + (table.ys[s] - y) ** 2
        if d < best_d:
            best, best_d = s, d
    if best < 0:
        raise PlacementError("storage zone is full")
    return best


def propose_layer_placement(
    plan: StagePlan,
    k: int,
    stage: PlacementPoint,
    home: np.ndarray,
    circuit: Circuit,
    table: SiteTable,
    reuse: bool = True,
) -> PlacementPoint:
    """Keep qubits needed by stage ``k + 1`` in their slots; send the rest home."""
    ns = table.n_storage
    keep = _retained(plan, circuit, k) if reuse else set()
    sites = stage.sites.copy()
    taken = {int(s) for s in sites if s < ns}
    for q in range(circuit.n_qubits):
        if sites[q] >= ns and q not in keep:
            target = int(home[q])
            if target in taken:
                target = _nearest_free_storage(table, taken, *table.position(int(home[q])))
            sites[q] = target
            taken.add(target)
    return PlacementPoint(PointKind.LAYER, k, sites)


def build_proposal(
    circuit: Circuit, plan: StagePlan, config: ArchitectureConfig, reuse: bool = True
) -> PlacementSequence:
    """The unannealed placement sequence."""
    table = SiteTable(config)
    if plan.max_width > table.n_pairs:
        raise PlacementError(f"widest stage needs {plan.max_width} pair sites, have {table.n_pairs}")
    init = initial_placement(config, circuit)
    points = [init]
    for k in range(plan.n_stages):
        stage = propose_stage_placement(plan, k, points[-1], config, circuit, table)
        points.append(stage)
        points.append(propose_layer_placement(plan, k, stage, init.sites, circuit, table, reuse))
    return PlacementSequence(circuit, plan, table, tuple(points))


def check_sequence(seq: PlacementSequence, reuse: bool = True) -> list[str]:
    """Every broken point invariant, as readable messages (empty when valid)."""
    problems: list[str] = []
    table, circuit, plan = seq.table, seq.circuit, seq.plan
    ns = table.n_storage
    n = circuit.n_qubits
    for p in seq.points:
        s = [int(v) for v in p.sites]
        if len(s) != n:
            problems.append(f"{p.label}: {len(s)} entries for {n} qubits")
            continue
        if len(set(s)) != n:
            problems.append(f"{p.label}: two qubits share a site")
        if any(not 0 <= v < table.n_sites for v in s):
            problems.append(f"{p.label}: site index out of range")
            continue
        in_ent = {q for q in range(n) if s[q] >= ns}
        if p.kind is PointKind.INITIAL:
            if in_ent:
                problems.append(f"{p.label}: qubits {sorted(in_ent)} outside storage")
        elif p.kind is PointKind.STAGE:
            pairs = seq.gate_pairs(p.index)
            want = {q for pr in pairs for q in pr}
            if in_ent != want:
                problems.append(f"{p.label}: entanglement-zone qubits {sorted(in_ent)} != stage qubits {sorted(want)}")
            for a, b in pairs:
                if s[a] >= ns and s[b] >= ns and table.pair_of(s[a]) != table.pair_of(s[b]):
                    problems.append(f"{p.label}: gate ({a},{b}) split across pair sites")
        else:
            want = _retained(plan, circuit, p.index) if reuse else set()
            if in_ent != want:
                problems.append(f"{p.label}: retained {sorted(in_ent)} != {sorted(want)}")
    return problems


@dataclass(frozen=True)
class CostBreakdown:
    movement_cost: float
    n_batches: int
    weight: float
    parallelism_penalty: float
    total: float


def _transition_table(seq: PlacementSequence, timing: TimingModel, backend=None):
    k = backend or kernels
    arr = seq.as_array()
    tcost = np.zeros(max(len(arr) - 1, 0))
    tbatch = np.zeros(max(len(arr) - 1, 0), dtype=np.int64)
    tbtime = np.zeros(max(len(arr) - 1, 0))
    for t in range(len(arr) - 1):
        tcost[t], tbatch[t], tbtime[t] = k.transition_cost(
            arr[t], arr[t + 1], seq.table.xs, seq.table.ys, timing.t0, timing.d0
        )
    return tcost, tbatch, tbtime


def default_weight(seq: PlacementSequence, timing: TimingModel = TimingModel()) -> float:
    """Mean duration of one movement batch in ``seq`` (0 when nothing moves)."""
    _, tbatch, tbtime = _transition_table(seq, timing)
    nb = int(tbatch.sum())
    return math.fsum(tbtime) / nb if nb else 0.0


def placement_cost(
    seq: PlacementSequence, timing: TimingModel = TimingModel(), weight: float | None = None
) -> CostBreakdown:
    """Travel time of every move plus ``weight`` per movement batch."""
    tcost, tbatch, tbtime = _transition_table(seq, timing)
    nb = int(tbatch.sum())
    if weight is None:
        weight = math.fsum(tbtime) / nb if nb else 0.0
    move = math.fsum(tcost)
    pen = weight * nb
    return CostBreakdown(move, nb, weight, pen, move + pen)


@dataclass(frozen=True)
class SAParams:
    cooling: float = 0.95
    iterations_per_qubit: int = 100
    t_init: float | None = None  # default: initial cost / ln 2
    t_frozen: float | None = None  # default: frozen_ratio * t_init
    frozen_ratio: float = 1e-3
    weight: float | None = None  # batch weight; default: mean batch time of the proposal
    slack: int = 0
    seed: int = 0
    restarts: int = 1

    def __post_init__(self) -> None:
        if not 0 < self.cooling < 1:
            raise ValueError("cooling must lie in (0, 1)")
        if self.iterations_per_qubit < 0 or self.restarts < 1 or self.slack < 0:
            raise ValueError("iterations_per_qubit, slack must be >= 0 and restarts >= 1")
        if not 0 < self.frozen_ratio < 1:
            raise ValueError("frozen_ratio must lie in (0, 1)")


@dataclass
class AuditLog:
    """Metropolis decisions (proposals with ``batches <= current + slack`` not taken greedily)."""

    temperature: np.ndarray
    delta: np.ndarray
    probability: np.ndarray
    accepted: np.ndarray

    def __len__(self) -> int:
        return len(self.delta)


@dataclass
class AnnealResult:
    sequence: PlacementSequence
    initial_cost: float
    cost: float  # recomputed from scratch for ``sequence``
    weight: float
    temperatures: list[float] = field(default_factory=list)
    best_trace: list[float] = field(default_factory=list)  # best-so-far after each temperature
    current_trace: list[float] = field(default_factory=list)
    n_iterations: int = 0
    n_accepted: int = 0
    audit: AuditLog | None = None


def _kernel_state(seq: PlacementSequence):
    arr = seq.as_array()
    table = seq.table
    P = len(arr)
    occ = np.full((P, table.n_sites), -1, dtype=np.int64)
    for p in range(P):
        occ[p, arr[p]] = np.arange(arr.shape[1])
    kinds = np.array([_KIND_CODE[pt.kind] for pt in seq.points], dtype=np.int64)
    gstart = [0]
    ga: list[int] = []
    gb: list[int] = []
    for pt in seq.points:
        if pt.kind is PointKind.STAGE:
            for a, b in seq.gate_pairs(pt.index):
                ga.append(a)
                gb.append(b)
        gstart.append(len(ga))
    return (
        arr,
        occ,
        kinds,
        np.array(gstart, dtype=np.int64),
        np.array(ga, dtype=np.int64),
        np.array(gb, dtype=np.int64),
        np.ascontiguousarray(table.xs, dtype=np.float64),
        np.ascontiguousarray(table.ys, dtype=np.float64),
        table.n_storage,
        table.n_pairs,
    )


def _anneal_once(seq, params: SAParams, timing: TimingModel, seed, backend, weight, c0):
    k = backend or kernels
    state = list(_kernel_state(seq))
    tcost, tbatch, _ = _transition_table(seq, timing, backend)
    state += [tcost, tbatch]
    state = tuple(state)
    sites = state[0]
    best_sites = sites.copy()
    totals = np.array([math.fsum(tcost), float(tbatch.sum())])
    best = np.array([totals[0] + weight * totals[1]])
    n = seq.circuit.n_qubits
    iters = params.iterations_per_qubit * n
    t = params.t_init if params.t_init is not None else c0 / math.log(2)
    t_frozen = params.t_frozen if params.t_frozen is not None else params.frozen_ratio * t
    rng = np.random.default_rng(seed)
    temps, best_trace, cur_trace = [], [], []
    log_t, log_d, log_p, log_a = [], [], [], []
    buf_d = np.empty(iters)
    buf_p = np.empty(iters)
    buf_a = np.empty(iters, dtype=np.int8)
    n_acc = 0
    n_it = 0
    if len(sites) >= 2 and n > 0 and iters > 0:
        while t > t_frozen and t > 0:
            u = rng.random((iters, 4))
            acc, logged = k.anneal_sweep(
                state, t, u, weight, params.slack, timing.t0, timing.d0,
                totals, best_sites, best, buf_d, buf_p, buf_a,
            )
            n_acc += acc
            n_it += iters
            # refresh the running totals from the per-transition table to stop drift
            totals[0] = math.fsum(state[10])
            totals[1] = float(state[11].sum())
            temps.append(t)
            best_trace.append(float(best[0]))
            cur_trace.append(float(totals[0] + weight * totals[1]))
            log_t.append(np.full(logged, t))
            log_d.append(buf_d[:logged].copy())
            log_p.append(buf_p[:logged].copy())
            log_a.append(buf_a[:logged].astype(bool))
            t *= params.cooling
    audit = AuditLog(
        np.concatenate(log_t) if log_t else np.zeros(0),
        np.concatenate(log_d) if log_d else np.zeros(0),
        np.concatenate(log_p) if log_p else np.zeros(0),
        np.concatenate(log_a) if log_a else np.zeros(0, dtype=bool),
    )
    return best_sites, temps, best_trace, cur_trace, n_it, n_acc, audit


def anneal(
    seq: PlacementSequence,
    params: SAParams = SAParams(),
    timing: TimingModel = TimingModel(),
    backend=None,
) -> AnnealResult:
    """Refine ``seq`` by simulated annealing and return the best sequence seen.

    ``backend`` selects the kernel module (default: the import-time choice).
    """
    weight = params.weight if params.weight is not None else default_weight(seq, timing)
    c0 = placement_cost(seq, timing, weight).total
    seeds = np.random.SeedSequence(params.seed).spawn(params.restarts) if params.restarts > 1 else [params.seed]
    result = AnnealResult(seq, c0, c0, weight)
    for seed in seeds:
        best_sites, temps, btrace, ctrace, n_it, n_acc, audit = _anneal_once(
            seq, params, timing, seed, backend, weight, c0
        )
        cand = seq.with_sites(best_sites)
        cost = placement_cost(cand, timing, weight).total
        if result.audit is None:
            result.temperatures, result.best_trace, result.current_trace = temps, btrace, ctrace
            result.audit = audit
        result.n_iterations += n_it
        result.n_accepted += n_acc
        # incremental totals can drift by rounding; keep the proposal unless
        # the recomputed cost is really no worse
        if cost <= result.cost:
            result.sequence, result.cost = cand, cost
    return result

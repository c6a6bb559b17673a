import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import batch_violations, compatible, min_distance
from strategies import circuits
from zoned_compiler.architecture import ArchitectureConfig, SiteTable
from zoned_compiler.ir import Circuit
from zoned_compiler.kernels import RoutingError
from zoned_compiler.placement import build_proposal
from zoned_compiler.router import (
    Move,
    MoveConflictDag,
    PulseEvent,
    Schedule,
    ScheduleError,
    assemble_schedule,
    batch_moves,
    dumps_schedule,
    loads_schedule,
    order_preserving,
    path_clearance,
    plan_transition,
    pre_shift_path,
)
from zoned_compiler.scheduler import asap_schedule
from zoned_compiler.timing import TimingModel

CFG = ArchitectureConfig()
TABLE = SiteTable(CFG)


def mv(q, sx, ex, sy, ey):
    return Move(q, (float(sx), float(ex), float(sy), float(ey)))


def test_noop_transition():
    p = np.arange(7)
    plan = plan_transition(p, p, TABLE)
    assert plan.batches == [] and plan.dag.n_moves == 0


def test_inversion_splits_batches():
    a, b = mv(0, 0, 10, 0, 0), mv(1, 6, 4, 0, 0)
    assert not order_preserving(a, b)
    batches, dag, batch_of = batch_moves([a, b])
    assert len(batches) == 2 and batch_of[0] != batch_of[1]
    assert dag.edges and dag.is_acyclic() and dag.respects(batch_of)


def test_same_column_must_move_together():
    assert not order_preserving(mv(0, 0, 5, 0, 0), mv(1, 0, 6, 6, 6))
    assert order_preserving(mv(0, 0, 5, 0, 0), mv(1, 0, 5, 6, 6))


def test_parallel_translation_is_one_batch():
    moves = [mv(i, 6 * i, 6 * i + 3, 0, 12) for i in range(8)]
    batches, _, _ = batch_moves(moves)
    assert len(batches) == 1
    assert batches[0].duration == pytest.approx(TimingModel().t_move(math.hypot(3, 12)))


@pytest.mark.parametrize("n", [2, 3, 6])
def test_mutual_crossings(n):
    # start left to right, end right to left, also inverted in y
    moves = [mv(i, 6 * i, 6 * (n - 1 - i), 0, 0) for i in range(n)]
    batches, dag, batch_of = batch_moves(moves)
    assert len(batches) == n
    assert dag.is_acyclic() and dag.respects(batch_of)


@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9), st.integers(0, 3), st.integers(0, 3)),
                min_size=1, max_size=20))
def test_random_batches_against_pairwise_oracle(raw):
    moves = [mv(i, 6 * a, 6 * b, 6 * c, 6 * d) for i, (a, b, c, d) in enumerate(raw)]
    batches, dag, batch_of = batch_moves(moves)
    assert sorted(m.qubit for bt in batches for m in bt.moves) == list(range(len(moves)))
    for bt in batches:
        assert batch_violations([m.vector for m in bt.moves]) == []
    assert dag.is_acyclic() and dag.respects(batch_of)
    # greedy maximality: each move is blocked from every earlier batch
    for i, m in enumerate(moves):
        for k in range(batch_of[i]):
            assert any(not compatible(m.vector, o.vector) for o in batches[k].moves)


def test_dependencies_are_respected():
    moves = [mv(0, 0, 6, 0, 0), mv(1, 6, 12, 0, 0)]
    _, dag, batch_of = batch_moves(moves, [(1, 0)])
    assert batch_of[1] < batch_of[0]
    with pytest.raises(RoutingError):
        batch_moves(moves, [(0, 1), (1, 0)])


def test_dag_cycle_detection():
    assert not MoveConflictDag(2, ((0, 1), (1, 0))).is_acyclic()


def test_pre_shift_examples():
    assert pre_shift_path((0, 0), (0, 0), np.zeros((0, 2))) == []
    path = pre_shift_path((0, 0), (12, 24), np.zeros((0, 2)))
    assert path[0] == (0, 0) and path[-1] == (12, 24)
    assert len(path) == 4
    # straight flight would pass right over the atom at (6, 0)
    obstacle = np.array([[6.0, 0.0]])
    path = pre_shift_path((0, 0), (12, 0), obstacle)
    assert path[0] == (0, 0) and path[-1] == (12, 0)
    assert min_distance(path, obstacle) >= 2.0 - 1e-9
    assert path_clearance(path, obstacle) >= 2.0


def test_pre_shift_through_dense_grid():
    static = [TABLE.position(s) for s in range(TABLE.n_storage) if s not in (0, 39)]
    obs = np.array(static)
    path = pre_shift_path(TABLE.position(0), TABLE.position(39), obs)
    assert min_distance(path, obs) >= 2.0 - 1e-9


def test_pre_shift_unroutable():
    obs = np.array([[x, y] for x in (-1.0, 0.0, 1.0) for y in (-1.0, 1.0)] + [[-1.0, 0.0], [1.0, 0.0]])
    with pytest.raises(RoutingError):
        pre_shift_path((0, 0), (12, 0), obs, clearance=2.0)


def test_example_layer0_returns_q2_q3(example7):
    seq = build_proposal(example7, asap_schedule(example7), CFG)
    plan = plan_transition(seq.points[1], seq.points[2], seq.table)
    assert sorted(m.qubit for b in plan.batches for m in b.moves) == [2, 3]
    assert len(plan.batches) == 1


def _compile(circuit, cfg=CFG):
    seq = build_proposal(circuit, asap_schedule(circuit), cfg)
    return seq, assemble_schedule(seq)


def test_example_schedule(example7):
    seq, s = _compile(example7)
    assert len(s.pulses) == 5
    assert [p.stage for p in s.pulses] == list(range(5))
    assert s.counters.n_res == 0
    assert s.counters.n_trans == 2 * s.counters.n_moves
    assert s.counters.g2 == 10
    starts = [e.start for e in s.events]
    assert starts == sorted(starts)


def test_empty_schedule():
    _, s = _compile(Circuit(0))
    assert s.events == [] and s.counters.total_time == 0.0
    _, s = _compile(Circuit(3))
    assert s.events == [] and s.counters.n_trans == 0


def test_one_gate_schedule():
    _, s = _compile(Circuit.from_ops(2, [("cz", (0, 1))]))
    kinds = [e.type for e in s.events]
    assert kinds == ["move", "pulse", "move"]
    assert s.counters.n_trans == 8
    assert list(s.qubit_transfers) == [4, 4]
    t = TimingModel()
    move = s.events[0].duration
    assert move == pytest.approx(s.events[0].batch.duration + 2 * t.transfer_time)
    assert s.counters.total_time == pytest.approx(s.events[0].duration + t.pulse_time + s.events[2].duration)
    # span minus own transfers
    np.testing.assert_allclose(s.qubit_time, s.counters.total_time - 4 * t.transfer_time)


def test_stray_atom_is_rejected(example7):
    seq, _ = _compile(example7)
    arr = seq.as_array().copy()
    ns = seq.table.n_storage
    free = sorted(set(range(ns, seq.table.n_sites)) - set(arr[1]))
    arr[1, 4] = free[0]  # q4 is idle in stage 0
    arr[2, 4] = free[0]
    with pytest.raises(ScheduleError):
        assemble_schedule(seq.with_sites(arr))


def test_replay_conserves_atoms_and_clearance(example7):
    seq, s = _compile(example7)
    pos = {q: TABLE.position(int(v)) for q, v in enumerate(s.initial_sites)}
    for e in s.move_events:
        movers = {m.qubit for m in e.batch.moves}
        static = np.array([pos[q] for q in pos if q not in movers]).reshape(-1, 2)
        assert batch_violations([m.vector for m in e.batch.moves]) == []
        for m in e.batch.moves:
            assert pos[m.qubit] == pytest.approx(m.start)
            assert min_distance(m.waypoints, static) >= 2.0 - 1e-9
        for m in e.batch.moves:
            pos[m.qubit] = m.end
        assert len(set(pos.values())) == len(pos)


def test_jsonl_round_trip(example7, tmp_path):
    _, s = _compile(example7)
    text = dumps_schedule(s)
    lines = text.splitlines()
    assert json.loads(lines[0])["format"] == "zoned-schedule"
    assert json.loads(lines[-1])["type"] == "counters"
    back = loads_schedule(text)
    assert dumps_schedule(back) == text
    s.save(tmp_path / "s.jsonl")
    assert Schedule.load(tmp_path / "s.jsonl").counters == s.counters
    assert isinstance(back.pulses[0], PulseEvent)
    with pytest.raises(ValueError):
        loads_schedule("\n".join(lines[:-1]))
    with pytest.raises(ValueError):
        loads_schedule('{"format": "other"}')


@given(circuits(max_qubits=9, max_gates=16, single_qubit=True))
def test_compiled_pulses_match_stages(circuit):
    plan = asap_schedule(circuit)
    cfg = ArchitectureConfig.for_circuit(circuit.n_qubits, max(plan.max_width, 1))
    _, s = _compile(circuit, cfg)
    assert s.counters.n_res == 0
    assert len(s.pulses) == plan.n_stages
    for p, stage in zip(s.pulses, plan.stages):
        assert [g for g, _, _ in p.gates] == list(stage)

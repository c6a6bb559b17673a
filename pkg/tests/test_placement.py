import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from strategies import circuits
from zoned_compiler.architecture import ArchitectureConfig, SiteTable
from zoned_compiler.ir import Circuit
from zoned_compiler.placement import (
    PlacementError,
    PlacementPoint,
    PlacementSequence,
    PointKind,
    SAParams,
    anneal,
    build_proposal,
    check_sequence,
    initial_placement,
    placement_cost,
)
from zoned_compiler.scheduler import asap_schedule
from zoned_compiler.timing import TimingModel

T_MOVE_12 = 66.057825907581636336491624939306  # 200*sqrt(12/110), 50-digit reference
CFG = ArchitectureConfig()


def _seq(circuit, cfg=CFG, reuse=True):
    return build_proposal(circuit, asap_schedule(circuit), cfg, reuse)


def test_initial_placement_row_major():
    table = SiteTable(CFG)
    p = initial_placement(CFG, Circuit(7))
    assert [table.sites[s] for s in p.sites] == [table.sites[c] for c in range(7)]
    assert [(table.sites[s].row, table.sites[s].col) for s in p.sites] == [(0, c) for c in range(7)]
    assert len(initial_placement(CFG, Circuit(0)).sites) == 0
    p = initial_placement(CFG, Circuit(25))
    assert [(table.sites[s].row, table.sites[s].col) for s in p.sites] == [divmod(i, 10) for i in range(25)]
    with pytest.raises(PlacementError):
        initial_placement(CFG, Circuit(41))


def _pair(table, s):
    return table.pair_of(int(s))


def test_example_stage_proposals(example7):
    seq = _seq(example7)
    table = seq.table
    ns = table.n_storage
    st0, layer0, st1 = seq.points[1:4]
    ent0 = {q for q in range(7) if st0.sites[q] >= ns}
    assert ent0 == {0, 1, 2, 3, 5, 6}
    assert {_pair(table, st0.sites[a]) == _pair(table, st0.sites[b]) for a, b in [(0, 1), (2, 3), (5, 6)]} == {True}
    assert len({_pair(table, st0.sites[q]) for q in ent0}) == 3
    # layer 0 keeps exactly q0, q1, q5, q6 in place; q2 and q3 go home
    assert {q for q in range(7) if layer0.sites[q] >= ns} == {0, 1, 5, 6}
    for q in (0, 1, 5, 6):
        assert layer0.sites[q] == st0.sites[q]
    assert layer0.sites[2] == 2 and layer0.sites[3] == 3
    # stage 1 pairs q0 with q5 and q1 with q6
    assert _pair(table, st1.sites[0]) == _pair(table, st1.sites[5])
    assert _pair(table, st1.sites[1]) == _pair(table, st1.sites[6])
    assert check_sequence(seq) == []


def test_single_gate_proposal():
    c = Circuit.from_ops(4, [("cz", (1, 2))])
    seq = _seq(c)
    ns = seq.table.n_storage
    assert [s >= ns for s in seq.points[1].sites] == [False, True, True, False]
    assert len(seq.points) == 3


def test_no_reuse_returns_everything(example7):
    seq = _seq(example7, reuse=False)
    ns = seq.table.n_storage
    for p in seq.points:
        if p.kind is PointKind.LAYER:
            assert (p.sites < ns).all()
    assert check_sequence(seq, reuse=False) == []
    assert check_sequence(seq, reuse=True) != []


def _two_point(a, b, table):
    c = Circuit(len(a))
    plan = asap_schedule(c)
    pts = (PlacementPoint(PointKind.INITIAL, -1, np.array(a)), PlacementPoint(PointKind.STAGE, 0, np.array(b)))
    return PlacementSequence(c, plan, table, pts)


def test_cost_examples():
    table = SiteTable(CFG)
    assert placement_cost(_two_point([0, 1], [0, 1], table)).total == 0.0
    one = placement_cost(_two_point([0], [2], table))  # 12 um along the row
    assert one.movement_cost == pytest.approx(T_MOVE_12, rel=1e-14)
    assert one.n_batches == 1
    assert math.isclose(one.total, one.movement_cost + one.parallelism_penalty)
    # storage row 0 sites 0,1 -> row 1 sites 10,11: parallel; crossed: 11,10
    par = placement_cost(_two_point([0, 1], [10, 11], table), weight=50.0)
    cross = placement_cost(_two_point([0, 1], [11, 10], table), weight=50.0)
    assert par.n_batches == 1 and cross.n_batches == 2
    assert cross.parallelism_penalty > par.parallelism_penalty


def _batches(moves):
    """Independent batch count for one transition of at most two non-chained moves."""
    if len(moves) < 2:
        return len(moves)
    (ax0, ay0, ax1, ay1), (bx0, by0, bx1, by1) = moves
    ok = np.sign(ax0 - bx0) == np.sign(ax1 - bx1) and np.sign(ay0 - by0) == np.sign(ay1 - by1)
    return 1 if ok else 2


def _brute_force(seq, weight, timing, free_returns):
    """Minimum cost of a one-gate circuit over every pair site, orientation and
    (optionally) every pair of storage return sites, scored independently."""
    table = seq.table
    n = seq.circuit.n_qubits
    a, b = seq.gate_pairs(0)[0]
    ns = table.n_storage

    def transition(src, dst):
        mv = [(s, e) for s, e in zip(src, dst) if s != e]
        geo = [(*table.position(s), *table.position(e)) for s, e in mv]
        return math.fsum(timing.t_move(math.dist(table.position(s), table.position(e))) for s, e in mv) \
            + weight * _batches(geo)

    home = list(range(n))
    best = math.inf
    for pair in range(table.n_pairs):
        for sa, sb in ((0, 1), (1, 0)):
            stage = list(home)
            stage[a], stage[b] = ns + 2 * pair + sa, ns + 2 * pair + sb
            returns = [(a_, b_) for a_, b_ in itertools.permutations(range(ns), 2)
                       if a_ in (a, b) or a_ >= n if b_ in (a, b) or b_ >= n] if free_returns else [(a, b)]
            for ra, rb in returns:
                layer = list(home)
                layer[a], layer[b] = ra, rb
                best = min(best, transition(home, stage) + transition(stage, layer))
    return best


@pytest.mark.parametrize("gate", [(0, 1), (1, 0), (0, 5), (3, 8)])
def test_single_gate_anneal_against_brute_force(gate):
    timing = TimingModel()
    c = Circuit.from_ops(10, [("cz", gate)])
    seq = _seq(c)
    res = anneal(seq, SAParams(seed=3), timing)
    over_sites = _brute_force(seq, res.weight, timing, free_returns=False)
    everything = _brute_force(seq, res.weight, timing, free_returns=True)
    assert everything - 1e-9 <= res.cost <= over_sites + 1e-9
    if gate in ((0, 1), (1, 0)):
        assert res.cost == pytest.approx(over_sites, rel=1e-12)
    assert check_sequence(res.sequence) == []


@pytest.fixture(scope="module")
def example_runs():
    c = Circuit.from_ops(7, [("cz", p) for p in
                             [(0, 1), (2, 3), (5, 6), (0, 5), (1, 6), (3, 6), (4, 6), (0, 1), (2, 4), (3, 5)]])
    seq = _seq(c)
    return seq, [anneal(seq, SAParams(seed=s)) for s in range(3)]


def test_example_anneal_improves_and_reuses(example_runs):
    seq, runs = example_runs
    ns = seq.table.n_storage
    for res in runs:
        assert res.cost <= res.initial_cost
        assert res.cost == pytest.approx(placement_cost(res.sequence, weight=res.weight).total)
        layer0 = res.sequence.points[2]
        assert {q for q in range(7) if layer0.sites[q] >= ns} == {0, 1, 5, 6}
        assert check_sequence(res.sequence) == []
        assert all(b >= a for a, b in zip(res.best_trace[1:], res.best_trace))
        assert res.temperatures == sorted(res.temperatures, reverse=True)


def test_audit_probabilities(example_runs):
    _, runs = example_runs
    for res in runs:
        a = res.audit
        assert len(a) > 0
        pos = a.delta > 0
        np.testing.assert_allclose(a.probability[pos], np.exp(-a.delta[pos] / a.temperature[pos]), rtol=1e-12)
        assert (a.probability[~pos] == 1.0).all()
        assert a.accepted[~pos].all()


def test_reproducible(example_runs):
    seq, runs = example_runs
    again = anneal(seq, SAParams(seed=0))
    np.testing.assert_array_equal(again.sequence.as_array(), runs[0].sequence.as_array())
    assert again.best_trace == runs[0].best_trace


def test_frozen_start_returns_input(example7):
    seq = _seq(example7)
    res = anneal(seq, SAParams(t_init=1.0, t_frozen=2.0))
    assert res.n_iterations == 0
    np.testing.assert_array_equal(res.sequence.as_array(), seq.as_array())
    assert res.cost == res.initial_cost


def test_zero_stage_circuit():
    seq = _seq(Circuit.from_ops(3, [("h", (0,))]))
    res = anneal(seq)
    assert len(seq.points) == 1
    assert res.cost == 0.0 and res.n_iterations == 0


def test_restarts_never_worse(example7):
    seq = _seq(example7)
    one = anneal(seq, SAParams(seed=5, iterations_per_qubit=10))
    many = anneal(seq, SAParams(seed=5, iterations_per_qubit=10, restarts=3))
    assert many.cost <= many.initial_cost
    assert one.initial_cost == many.initial_cost


def test_params_validation():
    for bad in (dict(cooling=1.0), dict(cooling=0.0), dict(restarts=0), dict(slack=-1), dict(frozen_ratio=2.0)):
        with pytest.raises(ValueError):
            SAParams(**bad)


@given(circuits(max_qubits=8, max_gates=14, single_qubit=False), st.integers(0, 100), st.booleans())
def test_anneal_keeps_invariants(circuit, seed, reuse):
    cfg = ArchitectureConfig.for_circuit(circuit.n_qubits, max(asap_schedule(circuit).max_width, 1))
    seq = _seq(circuit, cfg, reuse)
    assert check_sequence(seq, reuse) == []
    res = anneal(seq, SAParams(seed=seed, iterations_per_qubit=5, frozen_ratio=0.1))
    assert check_sequence(res.sequence, reuse) == []
    assert res.cost <= res.initial_cost

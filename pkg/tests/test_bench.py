import csv
import io

import pytest

from zoned_compiler import circuits as gen
from zoned_compiler.bench import (
    STANDARD_SUITE,
    BenchmarkSpec,
    RunRecord,
    format_table,
    generate_benchmark,
    records_csv,
    run_one,
    run_suite,
    scaling_suite,
    summarize,
    terms_csv,
    write_outputs,
)
from zoned_compiler.placement import SAParams
from zoned_compiler.scheduler import asap_schedule

FAST = SAParams(iterations_per_qubit=5, frozen_ratio=0.05)


@pytest.mark.parametrize("spec", STANDARD_SUITE, ids=lambda s: s.label)
def test_table1_counts(spec):
    c = generate_benchmark(spec)
    assert c.n_qubits == spec.n_qubits and c.n_cz == spec.expected_cz


def test_cat_and_bv_stage_counts():
    assert asap_schedule(gen.cat(35)).n_stages == 34
    assert asap_schedule(gen.bernstein_vazirani(14)).n_stages == 13
    assert gen.bernstein_vazirani(5, 0b0101).n_cz == 2
    with pytest.raises(ValueError):
        gen.bernstein_vazirani(3, 8)


def test_random_regular_k4():
    c = gen.random_regular(4, 3, seed=11)
    pairs = {g.qubits for g in c.cz_gates}
    assert c.n_cz == 6
    assert {tuple(sorted(p)) for p in pairs} == {(a, b) for a in range(4) for b in range(a + 1, 4)}


def test_random_regular_is_regular_and_seeded():
    edges = gen.regular_graph_edges(20, 3, 4)
    deg = [0] * 20
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    assert set(deg) == {3} and len(set(edges)) == 30
    assert edges == gen.regular_graph_edges(20, 3, 4)
    assert edges != gen.regular_graph_edges(20, 3, 5)


def test_infeasible_regular_graph():
    with pytest.raises(ValueError):
        gen.random_regular(5, 3)
    with pytest.raises(ValueError):
        gen.regular_graph_edges(3, 3, 0)


def test_unknown_benchmark():
    with pytest.raises(ValueError):
        generate_benchmark(BenchmarkSpec("Grover", 4))
    with pytest.raises(ValueError):
        generate_benchmark(BenchmarkSpec("Adder", 5))


def test_generators_are_deterministic():
    for spec in STANDARD_SUITE:
        assert generate_benchmark(spec).to_text() == generate_benchmark(spec).to_text()


def test_qft_and_ising_counts():
    assert gen.qft(10).n_cz == 2 * 45 + 3 * 5
    assert gen.ising(26).n_cz == 50
    assert asap_schedule(gen.ising(26)).n_stages == 4
    assert gen.qaoa(6, 3, 3, 0).n_cz == 54


def test_failing_entry_does_not_stop_suite():
    specs = [BenchmarkSpec("Cat", 4), BenchmarkSpec("Nope", 3), BenchmarkSpec("BV", 5)]
    recs = run_suite(specs, sa=FAST)
    assert [r.ok for r in recs] == [True, False, True]
    assert "unknown benchmark" in recs[1].error
    assert "FAILED" in format_table(recs)


def test_empty_suite(tmp_path):
    assert run_suite([]) == []
    assert summarize([]) == []
    write_outputs([], tmp_path)
    rows = list(csv.reader(io.StringIO((tmp_path / "runs.csv").read_text())))
    assert len(rows) == 1


def test_record_matches_schedule():
    r = run_one(BenchmarkSpec("Cat", 6), 0, sa=FAST)
    assert r.ok and r.stages == 5 and r.n_cz == 5 and r.n_res == 0
    assert r.terms["crosstalk"] == 1.0
    assert r.n_trans > 0 and 0 < r.fidelity < 1


def test_seeded_suite_is_deterministic():
    specs = scaling_suite([10, 12])
    a = run_suite(specs, sa=FAST, seeds=[0, 1])
    b = run_suite(specs, sa=FAST, seeds=[0, 1])
    assert [(r.fidelity, r.batches) for r in a] == [(r.fidelity, r.batches) for r in b]
    s = summarize(a)
    assert [x.label for x in s] == ["RandomRegular-10", "RandomRegular-12"]
    assert all(x.runs == 2 for x in s)


def test_csv_outputs(tmp_path):
    recs = run_suite([BenchmarkSpec("Cat", 4)], sa=FAST, seeds=[0, 1])
    rows = list(csv.DictReader(io.StringIO(records_csv(recs))))
    assert len(rows) == 2 and rows[0]["benchmark"] == "Cat"
    trows = list(csv.DictReader(io.StringIO(terms_csv(recs))))
    assert {r["term"] for r in trows} == {"gate", "crosstalk", "transfer", "decoherence", "total"}
    paths = write_outputs(recs, tmp_path / "out")
    assert sorted(p.name for p in paths) == ["runs.csv", "table.txt", "terms.csv"]
    assert "mean_fid" in (tmp_path / "out" / "table.txt").read_text()


def test_summary_handles_failures():
    bad = RunRecord(BenchmarkSpec("Cat", 4), 0, error="boom")
    (s,) = summarize([bad])
    assert s.failures == 1 and s.runs == 1

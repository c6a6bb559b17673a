import json
import math

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zoned_compiler.architecture import ArchitectureConfig
from zoned_compiler.fidelity import (
    DEFAULTS_NOTE,
    DecoherenceOverflowError,
    PhysicalParams,
    evaluate_fidelity,
    fidelity_from_counts,
    sensitivity_sweep,
)
from zoned_compiler.ir import Circuit
from zoned_compiler.placement import build_proposal
from zoned_compiler.router import assemble_schedule
from zoned_compiler.scheduler import asap_schedule

EXAMPLE = 0.98983694296731241074874005  # mpmath, 50 digits: .9999^2 * .995 * .999^4 * (1 - 1500/1.5e6)


def _schedule(circuit):
    return assemble_schedule(build_proposal(circuit, asap_schedule(circuit), ArchitectureConfig()))


def test_empty_is_exactly_one():
    r = fidelity_from_counts(0, 0, 0, 0)
    assert r.total == 1.0 and r.log_total == 0.0
    assert evaluate_fidelity(_schedule(Circuit(0))).total == 1.0


def test_single_cz():
    assert fidelity_from_counts(0, 1, 0, 0).total == pytest.approx(0.995, rel=1e-15)


def test_frozen_example():
    r = fidelity_from_counts(2, 1, 0, 4, [1500.0], [0], PhysicalParams())
    assert r.total == pytest.approx(EXAMPLE, rel=1e-14)
    # the same budget split into gate time and transfer time
    r2 = fidelity_from_counts(2, 1, 0, 4, [1470.0], [2], PhysicalParams())
    assert r2.total == pytest.approx(EXAMPLE, rel=1e-14)


counts = st.integers(0, 10_000)


@given(counts, counts, st.integers(0, 500), counts,
       st.lists(st.floats(0, 5e4), max_size=8),
       st.floats(0.9, 1.0, exclude_min=True), st.floats(0.9, 1.0, exclude_min=True))
def test_log_identity(g1, g2, nres, ntr, times, f1, f2):
    p = PhysicalParams(f1=f1, f2=f2)
    r = fidelity_from_counts(g1, g2, nres, ntr, times, [], p)
    mpmath.mp.dps = 40
    ref = (g1 * mpmath.log(f1) + g2 * mpmath.log(f2) + nres * mpmath.log(p.f_exc)
           + ntr * mpmath.log(p.f_trans) + mpmath.fsum(mpmath.log(1 - mpmath.mpf(t) / p.T2) for t in times))
    assert r.log_total == pytest.approx(float(ref), rel=1e-12, abs=1e-300)
    assert math.fsum([r.log_gate, r.log_crosstalk, r.log_transfer, r.log_decoherence]) == \
        pytest.approx(r.log_total, rel=1e-12, abs=1e-300)
    for v in r.terms().values():
        assert 0 <= v <= 1


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50),
       st.sampled_from(["g1", "g2", "n_res", "n_trans"]))
def test_adding_events_lowers_fidelity(g1, g2, nres, ntr, which):
    base = dict(g1=g1, g2=g2, n_res=nres, n_trans=ntr)
    more = dict(base)
    more[which] += 1
    assert fidelity_from_counts(**more, qubit_time=[100.0]).total < fidelity_from_counts(**base, qubit_time=[100.0]).total


def test_decoherence_overflow():
    with pytest.raises(DecoherenceOverflowError):
        fidelity_from_counts(0, 0, 0, 0, [1.5e6])
    with pytest.raises(DecoherenceOverflowError):
        fidelity_from_counts(0, 0, 0, 0, [1.5e6 - 15.0], [1])


def test_bad_inputs():
    with pytest.raises(ValueError):
        fidelity_from_counts(-1, 0, 0, 0)
    with pytest.raises(ValueError):
        fidelity_from_counts(0, 0, 0, 0, [1.0, 2.0], [1])
    with pytest.raises(ValueError):
        PhysicalParams(f2=1.01)
    with pytest.raises(ValueError):
        PhysicalParams(T2=0)


def test_sweeps(example7):
    s = _schedule(example7)
    rows = sensitivity_sweep(s, PhysicalParams(), "f2", [0.99, 0.995, 0.999])
    totals = [t for _, t in rows]
    assert totals[0] < totals[1] < totals[2]
    rows = sensitivity_sweep(s, PhysicalParams(), "T2", [1e5, 1e6, 1e7])
    assert rows[0][1] <= rows[1][1] <= rows[2][1]
    one = sensitivity_sweep(s, PhysicalParams(), "f1", [0.9999])
    assert one == [(0.9999, evaluate_fidelity(s).total)]
    with pytest.raises(ValueError):
        sensitivity_sweep(s, PhysicalParams(), "f2", [1.5])
    with pytest.raises(ValueError):
        sensitivity_sweep(s, PhysicalParams(), "nope", [1.0])


def test_compiled_schedule_has_no_crosstalk(example7):
    r = evaluate_fidelity(_schedule(example7))
    assert r.n_res == 0 and r.crosstalk_term == 1.0
    assert r.g2 == 10 and r.n_trans > 0
    assert 0 < r.total < 1


def test_report_text(example7):
    text = evaluate_fidelity(_schedule(example7)).to_text()
    assert DEFAULTS_NOTE in text
    block = json.loads(text.split("--- json\n")[1])
    assert set(block["terms"]) == {"gate", "crosstalk", "transfer", "decoherence", "total"}
    custom = evaluate_fidelity(_schedule(example7), PhysicalParams(f2=0.99)).to_text()
    assert DEFAULTS_NOTE not in custom

"""Benchmark suites: generate circuits, compile them, tabulate the results."""

from __future__ import annotations

import csv
import io
import math
import statistics
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from . import circuits
from .fidelity import PhysicalParams
from .ir import Circuit
from .pipeline import compile_circuit
from .placement import SAParams
from .timing import TimingModel

RANDOMIZED = {"RandomRegular", "QAOA"}


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str  # Adder | Shor | QAOA | QFT | BV | Ising | Cat | RandomRegular
    n_qubits: int
    params: tuple[tuple[str, object], ...] = ()
    expected_cz: int | None = None

    def param(self, key: str, default=None):
        return dict(self.params).get(key, default)

    @property
    def label(self) -> str:
        return f"{self.name}-{self.n_qubits}"


def generate_benchmark(spec: BenchmarkSpec, seed: int | None = None) -> Circuit:
    """Build the circuit for ``spec``; ``seed`` overrides the benchmark's own seed."""
    n = spec.n_qubits
    s = spec.param("seed", 0) if seed is None else seed
    name = spec.name
    if name == "Cat":
        c = circuits.cat(n)
    elif name == "BV":
        c = circuits.bernstein_vazirani(n, spec.param("secret"))
    elif name == "RandomRegular":
        c = circuits.random_regular(n, spec.param("degree", 3), s)
    elif name == "QFT":
        c = circuits.qft(n)
    elif name == "Ising":
        c = circuits.ising(n, spec.param("steps", 1))
    elif name == "QAOA":
        c = circuits.qaoa(n, spec.param("degree", 3), spec.param("p", 1), s)
    elif name == "Adder":
        if n != 4:
            raise ValueError("only the 4-qubit adder is available")
        c = circuits.adder4()
    elif name == "Shor":
        if n != 5:
            raise ValueError("only the 5-qubit toy instance is available")
        c = circuits.shor5()
    else:
        raise ValueError(f"unknown benchmark {name!r}")
    if c.n_qubits != n:
        raise AssertionError(f"{spec.label}: generated {c.n_qubits} qubits")
    if spec.expected_cz is not None and c.n_cz != spec.expected_cz:
        raise AssertionError(f"{spec.label}: generated {c.n_cz} CZ, expected {spec.expected_cz}")
    return c


STANDARD_SUITE: tuple[BenchmarkSpec, ...] = (
    BenchmarkSpec("Adder", 4, expected_cz=10),
    BenchmarkSpec("Shor", 5, expected_cz=30),
    BenchmarkSpec("QAOA", 6, (("degree", 3), ("p", 3), ("seed", 0)), expected_cz=54),
    BenchmarkSpec("QFT", 10, expected_cz=105),
    BenchmarkSpec("BV", 14, expected_cz=13),
    BenchmarkSpec("Ising", 26, (("steps", 1),), expected_cz=50),
    BenchmarkSpec("Cat", 35, expected_cz=34),
)


def scaling_suite(sizes: Iterable[int] = range(10, 101, 10), degree: int = 3) -> tuple[BenchmarkSpec, ...]:
    return tuple(
        BenchmarkSpec("RandomRegular", n, (("degree", degree),), expected_cz=n * degree // 2) for n in sizes
    )


@dataclass
class RunRecord:
    spec: BenchmarkSpec
    seed: int
    n_cz: int = 0
    stages: int = 0
    batches: int = 0
    n_trans: int = 0
    n_res: int = 0
    total_time: float = 0.0
    fidelity: float = math.nan
    terms: dict[str, float] = field(default_factory=dict)
    wall_time: float = 0.0
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run_one(
    spec: BenchmarkSpec,
    seed: int,
    arch: dict | None = None,
    sa: SAParams | None = SAParams(),
    timing: TimingModel = TimingModel(),
    physical: PhysicalParams = PhysicalParams(),
) -> RunRecord:
    rec = RunRecord(spec, seed)
    t = time.perf_counter()
    try:
        circ = generate_benchmark(spec, seed if spec.name in RANDOMIZED else None)
        res = compile_circuit(circ, arch, replace(sa, seed=seed) if sa else None, timing, physical)
        c = res.schedule.counters
        rec.n_cz = circ.n_cz
        rec.stages = c.n_stages
        rec.batches = c.n_batches
        rec.n_trans = c.n_trans
        rec.n_res = c.n_res
        rec.total_time = c.total_time
        rec.fidelity = res.fidelity.total
        rec.terms = res.fidelity.terms()
    except Exception as exc:  # a failing entry must not stop the suite
        rec.error = f"{type(exc).__name__}: {exc}"
    rec.wall_time = time.perf_counter() - t
    return rec


def run_suite(
    specs: Sequence[BenchmarkSpec],
    arch: dict | None = None,
    sa: SAParams | None = SAParams(),
    seeds: Sequence[int] = (0,),
    timing: TimingModel = TimingModel(),
    physical: PhysicalParams = PhysicalParams(),
) -> list[RunRecord]:
    """One record per (spec, seed); deterministic benchmarks run once per seed as well."""
    return [run_one(spec, s, arch, sa, timing, physical) for spec in specs for s in seeds]


@dataclass(frozen=True)
class Summary:
    label: str
    n: int
    runs: int
    failures: int
    mean_fidelity: float
    std_fidelity: float
    mean_stages: float
    mean_batches: float


def summarize(records: Sequence[RunRecord]) -> list[Summary]:
    groups: dict[str, list[RunRecord]] = {}
    for r in records:
        groups.setdefault(r.spec.label, []).append(r)
    out = []
    for label, rs in groups.items():
        good = [r for r in rs if r.ok]
        fids = [r.fidelity for r in good]
        out.append(
            Summary(
                label,
                rs[0].spec.n_qubits,
                len(rs),
                len(rs) - len(good),
                statistics.fmean(fids) if fids else math.nan,
                statistics.stdev(fids) if len(fids) > 1 else 0.0,
                statistics.fmean(r.stages for r in good) if good else math.nan,
                statistics.fmean(r.batches for r in good) if good else math.nan,
            )
        )
    return out


def format_table(records: Sequence[RunRecord]) -> str:
    head = f"{'benchmark':<18}{'seed':>5}{'CZ':>6}{'stages':>8}{'batches':>9}{'N_trans':>9}{'time_us':>12}{'fidelity':>11}{'wall_s':>9}"
    lines = [head, "-" * len(head)]
    for r in records:
        if not r.ok:
            lines.append(f"{r.spec.label:<18}{r.seed:>5}  FAILED {r.error}")
            continue
        lines.append(
            f"{r.spec.label:<18}{r.seed:>5}{r.n_cz:>6}{r.stages:>8}{r.batches:>9}{r.n_trans:>9}"
            f"{r.total_time:>12.1f}{r.fidelity:>11.5f}{r.wall_time:>9.2f}"
        )
    sums = summarize(records)
    if any(s.runs > 1 for s in sums):
        lines += ["", f"{'benchmark':<18}{'runs':>5}{'mean_fid':>11}{'std_fid':>11}{'stages':>9}"]
        for s in sums:
            lines.append(f"{s.label:<18}{s.runs:>5}{s.mean_fidelity:>11.5f}{s.std_fidelity:>11.5f}{s.mean_stages:>9.1f}")
    return "\n".join(lines) + "\n"


def records_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["benchmark", "n_qubits", "seed", "n_cz", "stages", "batches", "n_trans", "n_res",
                "total_time_us", "fidelity", "wall_s", "error"])
    for r in records:
        w.writerow([r.spec.name, r.spec.n_qubits, r.seed, r.n_cz, r.stages, r.batches, r.n_trans,
                    r.n_res, r.total_time, r.fidelity, r.wall_time, r.error or ""])
    return buf.getvalue()


def terms_csv(records: Sequence[RunRecord]) -> str:
    """Long-format ``benchmark, n_qubits, seed, term, value`` rows for stacked charts."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["benchmark", "n_qubits", "seed", "term", "value"])
    for r in records:
        if r.ok:
            for term, value in r.terms.items():
                w.writerow([r.spec.name, r.spec.n_qubits, r.seed, term, value])
    return buf.getvalue()


def write_outputs(records: Sequence[RunRecord], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "runs.csv": records_csv(records),
        "terms.csv": terms_csv(records),
        "table.txt": format_table(records),
    }
    paths = []
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
        paths.append(out / name)
    return paths

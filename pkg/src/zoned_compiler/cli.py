"""Command line: ``compile``, ``verify``, ``bench`` and ``report``.

Exit codes: 0 success, 2 usage, 3 bad input (syntax, config, file), 4
insufficient capacity, 5 routing or schedule failure, 6 verification
mismatch, 7 decoherence overflow, 8 some benchmark entries failed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import kernels
from .architecture import ArchitectureError
from .bench import STANDARD_SUITE, run_suite, scaling_suite, format_table, write_outputs
from .config import ConfigError, load_arch_overrides, load_physical, load_sa_params, load_timing
from .fidelity import DecoherenceOverflowError, PhysicalParams, evaluate_fidelity
from .ir import CircuitError
from .kernels import RoutingError
from .parser import load_circuit
from .pipeline import compile_circuit
from .placement import SAParams
from .router import Schedule, ScheduleError
from .simulator import (
    ScheduleCorruptionError,
    SimulationCapError,
    overlap,
    simulate_circuit,
    simulate_schedule,
)
from .timing import TimingModel

EXIT_INPUT, EXIT_CAPACITY, EXIT_ROUTING, EXIT_MISMATCH, EXIT_DECOHERENCE, EXIT_BENCH = 3, 4, 5, 6, 7, 8


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--arch", help="architecture key=value file")
    p.add_argument("--sa", help="annealer key=value file")
    p.add_argument("--timing", help="timing key=value file")
    p.add_argument("--physics", help="fidelity parameter key=value file")
    p.add_argument("--seed", type=int, help="annealer seed (overrides the --sa file)")
    p.add_argument("--no-anneal", action="store_true", help="keep the unannealed placement")
    p.add_argument("--no-reuse", action="store_true", help="return every atom to storage after each stage")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="zoned-compiler", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 (kernels: {kernels.BACKEND})")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a circuit into a schedule")
    p.add_argument("file")
    p.add_argument("--format", choices=("native", "qasm"), help="input format (default: by extension)")
    p.add_argument("--out", help="write the schedule (JSON Lines) here")
    p.add_argument("--stages", action="store_true", help="print the stage plan")
    _common(p)

    p = sub.add_parser("verify", help="check a compiled schedule against the circuit by simulation")
    p.add_argument("file")
    p.add_argument("--format", choices=("native", "qasm"))
    p.add_argument("--tol", type=float, default=1e-9)
    _common(p)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--suite", choices=("table1", "scaling"), default="table1")
    p.add_argument("--seeds", type=int, default=1, help="number of seeds (0..K-1)")
    p.add_argument("--out", help="directory for runs.csv, terms.csv and table.txt")
    _common(p)

    p = sub.add_parser("report", help="fidelity breakdown of a saved schedule")
    p.add_argument("schedule")
    p.add_argument("--physics", help="fidelity parameter key=value file")
    return ap


def _settings(args):
    arch = load_arch_overrides(args.arch) if args.arch else None
    sa = load_sa_params(args.sa) if args.sa else SAParams()
    if args.seed is not None:
        sa = replace(sa, seed=args.seed)
    if args.no_anneal:
        sa = None
    timing = load_timing(args.timing) if args.timing else TimingModel()
    physical = load_physical(args.physics) if args.physics else PhysicalParams()
    return arch, sa, timing, physical


def _compile(args):
    circuit = load_circuit(args.file, args.format)
    arch, sa, timing, physical = _settings(args)
    return circuit, compile_circuit(circuit, arch, sa, timing, physical, reuse=not args.no_reuse)


def cmd_compile(args) -> int:
    circuit, res = _compile(args)
    c = res.schedule.counters
    if args.stages:
        print(res.plan.to_text(circuit), end="")
    print(f"qubits {circuit.n_qubits}  cz {c.g2}  1q {c.g1}  stages {c.n_stages}")
    print(f"moves {c.n_moves}  batches {c.n_batches}  N_trans {c.n_trans}  N_res {c.n_res}")
    print(f"schedule time {c.total_time:.2f} us")
    if res.anneal is not None:
        print(f"placement cost {res.anneal.initial_cost:.2f} -> {res.anneal.cost:.2f}")
    print(f"fidelity {res.fidelity.total:.6f}")
    if args.out:
        res.schedule.save(args.out)
        print(f"schedule written to {args.out}")
    return 0


def cmd_verify(args) -> int:
    circuit, res = _compile(args)
    ov = overlap(simulate_circuit(circuit), simulate_schedule(res.schedule))
    ok = ov >= 1 - args.tol
    print(f"{'PASS' if ok else 'FAIL'} {args.file}: overlap {ov:.15f}")
    return 0 if ok else EXIT_MISMATCH


def cmd_bench(args) -> int:
    arch, sa, timing, physical = _settings(args)
    specs = STANDARD_SUITE if args.suite == "table1" else scaling_suite()
    base = sa.seed if sa is not None else 0
    records = run_suite(specs, arch, sa, [base + k for k in range(max(args.seeds, 1))], timing, physical)
    print(format_table(records), end="")
    if args.out:
        for path in write_outputs(records, args.out):
            print(f"wrote {path}")
    return 0 if all(r.ok for r in records) else EXIT_BENCH


def cmd_report(args) -> int:
    schedule = Schedule.load(args.schedule)
    physical = load_physical(args.physics) if args.physics else PhysicalParams()
    print("# architecture: " + ", ".join(f"{k}={v:g}" for k, v in schedule.config.to_dict().items()))
    print("# timing: " + ", ".join(f"{k}={v:g}" for k, v in schedule.timing.to_dict().items()))
    print(evaluate_fidelity(schedule, physical).to_text(), end="")
    return 0


_COMMANDS = {"compile": cmd_compile, "verify": cmd_verify, "bench": cmd_bench, "report": cmd_report}


# checked in order, so subclasses come before their bases
_FAILURES = (
    (DecoherenceOverflowError, EXIT_DECOHERENCE),
    (ArchitectureError, EXIT_CAPACITY),
    (SimulationCapError, EXIT_MISMATCH),
    (ScheduleCorruptionError, EXIT_MISMATCH),
    (RoutingError, EXIT_ROUTING),
    (ScheduleError, EXIT_ROUTING),
    (CircuitError, EXIT_INPUT),
    (ConfigError, EXIT_INPUT),
    (OSError, EXIT_INPUT),
    (ValueError, EXIT_INPUT),
)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except tuple(cls for cls, _ in _FAILURES) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return next(code for cls, code in _FAILURES if isinstance(exc, cls))


if __name__ == "__main__":
    sys.exit(main())

"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--transitions 2000] [--qubits 30] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from zoned_compiler import circuits
from zoned_compiler.architecture import ArchitectureConfig, SiteTable
from zoned_compiler.kernels import _fallback
from zoned_compiler.placement import SAParams, anneal, build_proposal
from zoned_compiler.scheduler import asap_schedule


def _best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def _transitions(n_transitions: int, n_qubits: int, table: SiteTable, seed: int = 0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_transitions):
        src = rng.choice(table.n_sites, n_qubits, replace=False)
        dst = src.copy()
        k = int(rng.integers(1, n_qubits + 1))
        who = rng.choice(n_qubits, k, replace=False)
        dst[who] = rng.permutation(src[who])
        out.append((src, dst))
    return out


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--transitions", type=int, default=2000)
    ap.add_argument("--qubits", type=int, default=30)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    try:
        from zoned_compiler.kernels import _core
    except ImportError:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation` first")
        return 1
    backends = {"python": _fallback, "cython": _core}

    table = SiteTable(ArchitectureConfig.for_circuit(args.qubits, args.qubits // 2))
    work = _transitions(args.transitions, args.qubits, table)

    def cost_loop(mod):
        return lambda: [mod.transition_cost(s, d, table.xs, table.ys, 200.0, 110.0) for s, d in work]

    qft = circuits.qft(10)
    plan = asap_schedule(qft)
    seq = build_proposal(qft, plan, ArchitectureConfig.for_circuit(10, plan.max_width))
    params = SAParams(seed=0, iterations_per_qubit=20)

    rows = []
    for label, make in (
        (f"transition_cost x{args.transitions} ({args.qubits} qubits)", cost_loop),
        ("anneal QFT(10), 20 iterations/qubit", lambda mod: lambda: anneal(seq, params, backend=mod)),
    ):
        t = {name: _best_of(make(mod), args.repeat) for name, mod in backends.items()}
        rows.append((label, t["python"], t["cython"]))

    same = anneal(seq, params, backend=_fallback).cost == anneal(seq, params, backend=_core).cost
    print(f"{'kernel':<46}{'python s':>10}{'cython s':>10}{'speedup':>9}")
    for label, tp, tc in rows:
        print(f"{label:<46}{tp:>10.3f}{tc:>10.3f}{tp / tc:>8.1f}x")
    print(f"identical anneal result: {same}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""End-to-end fidelity estimate of a compiled schedule.

    F = f1^g1 * f2^g2 * f_exc^N_res * f_trans^N_trans * prod_q (1 - (t_q + T_q) / T2)

``t_q`` is qubit ``q``'s elapsed schedule time without its own transfers and
``T_q`` its transfer time.  The product is evaluated in log space.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Sequence

import numpy as np

DEFAULTS_NOTE = "representative defaults, not measured values"


class DecoherenceOverflowError(ValueError):
    """A qubit's elapsed time reaches T2, so its decoherence factor is not positive."""


@dataclass(frozen=True)
class PhysicalParams:
    f1: float = 0.9999
    f2: float = 0.995
    f_exc: float = 0.9975
    f_trans: float = 0.999
    T2: float = 1.5e6  # µs
    T_trans_per_op: float = 15.0  # µs

    def __post_init__(self) -> None:
        for name in ("f1", "f2", "f_exc", "f_trans"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        for name in ("T2", "T_trans_per_op"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class FidelityReport:
    g1: int
    g2: int
    n_res: int
    n_trans: int
    qubit_time: tuple[float, ...]
    qubit_transfer_time: tuple[float, ...]
    log_gate: float
    log_crosstalk: float
    log_transfer: float
    log_decoherence: float
    log_total: float
    params: PhysicalParams

    @property
    def gate_term(self) -> float:
        return math.exp(self.log_gate)

    @property
    def crosstalk_term(self) -> float:
        return math.exp(self.log_crosstalk)

    @property
    def transfer_term(self) -> float:
        return math.exp(self.log_transfer)

    @property
    def decoherence_term(self) -> float:
        return math.exp(self.log_decoherence)

    @property
    def total(self) -> float:
        return math.exp(self.log_total)

    def terms(self) -> dict[str, float]:
        return {
            "gate": self.gate_term,
            "crosstalk": self.crosstalk_term,
            "transfer": self.transfer_term,
            "decoherence": self.decoherence_term,
            "total": self.total,
        }

    def to_text(self) -> str:
        lines = [
            f"# fidelity parameters: {DEFAULTS_NOTE}" if self.params == PhysicalParams()
            else "# fidelity parameters: user supplied",
            "  " + ", ".join(f"{k}={v:g}" for k, v in self.params.to_dict().items()),
            f"g1={self.g1} g2={self.g2} N_res={self.n_res} N_trans={self.n_trans}",
            f"max qubit time {max(self.qubit_time, default=0.0):.3f} us, "
            f"max transfer time {max(self.qubit_transfer_time, default=0.0):.3f} us",
        ]
        for name, value in self.terms().items():
            lines.append(f"{name:>12s}  {value:.10f}")
        block = {"terms": self.terms(), "log_terms": {
            "gate": self.log_gate, "crosstalk": self.log_crosstalk,
            "transfer": self.log_transfer, "decoherence": self.log_decoherence,
            "total": self.log_total,
        }}
        lines += ["--- json", json.dumps(block, sort_keys=True)]
        return "\n".join(lines) + "\n"


def fidelity_from_counts(
    g1: int,
    g2: int,
    n_res: int,
    n_trans: int,
    qubit_time: Sequence[float] = (),
    qubit_transfers: Sequence[int] = (),
    params: PhysicalParams = PhysicalParams(),
) -> FidelityReport:
    """Evaluate the model from raw counters.

    ``qubit_transfers[q]`` counts transfers; each costs ``T_trans_per_op``.
    """
    for name, v in (("g1", g1), ("g2", g2), ("n_res", n_res), ("n_trans", n_trans)):
        if v < 0:
            raise ValueError(f"{name} must be non-negative")
    times = [float(t) for t in qubit_time]
    ttrans = [float(k) * params.T_trans_per_op for k in qubit_transfers] or [0.0] * len(times)
    if len(ttrans) != len(times):
        raise ValueError("qubit_time and qubit_transfers differ in length")
    logs = []
    for q, (t, tt) in enumerate(zip(times, ttrans)):
        if t < 0:
            raise ValueError(f"negative time for q{q}")
        x = (t + tt) / params.T2
        if x >= 1:
            raise DecoherenceOverflowError(f"q{q}: elapsed {t + tt:g} us >= T2 = {params.T2:g} us")
        logs.append(math.log1p(-x))
    log_gate = math.fsum([g1 * math.log(params.f1), g2 * math.log(params.f2)])
    log_x = n_res * math.log(params.f_exc)
    log_tr = n_trans * math.log(params.f_trans)
    log_dec = math.fsum(logs)
    total = math.fsum([g1 * math.log(params.f1), g2 * math.log(params.f2), log_x, log_tr, *logs])
    return FidelityReport(
        g1, g2, n_res, n_trans, tuple(times), tuple(ttrans),
        log_gate, log_x, log_tr, log_dec, total, params,
    )


def evaluate_fidelity(schedule, params: PhysicalParams = PhysicalParams()) -> FidelityReport:
    c = schedule.counters
    return fidelity_from_counts(
        c.g1, c.g2, c.n_res, c.n_trans,
        np.asarray(schedule.qubit_time, dtype=float).tolist(),
        np.asarray(schedule.qubit_transfers, dtype=np.int64).tolist(),
        params,
    )


def sensitivity_sweep(
    schedule, params: PhysicalParams, name: str, values: Sequence[float]
) -> list[tuple[float, float]]:
    """``(value, total)`` rows, varying one parameter of ``params``."""
    if name not in {f.name for f in fields(PhysicalParams)}:
        raise ValueError(f"unknown parameter {name!r}")
    rows = []
    for v in values:
        p = replace(params, **{name: float(v)})  # raises ValueError when out of range
        rows.append((float(v), evaluate_fidelity(schedule, p).total))
    return rows

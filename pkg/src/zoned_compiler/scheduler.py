"""ASAP partition of two-qubit gates into parallel stages."""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir import Circuit, GateDag


@dataclass(frozen=True)
class StagePlan:
    """CZ stages in execution order.

    ``single_qubit_attachment[g]`` is the boundary index at which single-qubit
    gate ``g`` runs: boundary ``k`` precedes the pulse of stage ``k`` and
    boundary ``len(stages)`` follows the last stage.
    """

    stages: tuple[tuple[int, ...], ...]
    single_qubit_attachment: dict[int, int] = field(default_factory=dict)

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    @property
    def max_width(self) -> int:
        return max((len(s) for s in self.stages), default=0)

    def stage_of(self) -> dict[int, int]:
        return {g: k for k, stage in enumerate(self.stages) for g in stage}

    def boundary_gates(self, circuit: Circuit) -> list[list[int]]:
        """Single-qubit gate ids per boundary, in program order."""
        out: list[list[int]] = [[] for _ in range(self.n_stages + 1)]
        for g in sorted(self.single_qubit_attachment):
            out[self.single_qubit_attachment[g]].append(g)
        return out

    def to_text(self, circuit: Circuit | None = None) -> str:
        lines = [f"stages {self.n_stages}"]
        for k, stage in enumerate(self.stages):
            if circuit is None:
                body = " ".join(f"g{g}" for g in stage)
            else:
                body = " ".join(
                    f"g{g}({circuit.gates[g].qubits[0]},{circuit.gates[g].qubits[1]})" for g in stage
                )
            lines.append(f"stage {k}: {body}")
        by_boundary: dict[int, list[int]] = {}
        for g, b in sorted(self.single_qubit_attachment.items()):
            by_boundary.setdefault(b, []).append(g)
        for b in sorted(by_boundary):
            lines.append(f"boundary {b}: " + " ".join(f"g{g}" for g in by_boundary[b]))
        return "\n".join(lines) + "\n"


def asap_schedule(circuit: Circuit, dag: GateDag | None = None) -> StagePlan:
    """Place every CZ in the earliest stage after all CZs it depends on.

    Gates are visited in program order; a gate whose qubits are still free in
    an already open stage joins that stage, otherwise a new stage is opened.
    """
    # per-qubit index of the latest stage that used it (-1: none yet)
    level = [-1] * circuit.n_qubits
    stages: list[list[int]] = []
    for g in circuit.gates:
        if not g.is_cz:
            continue
        a, b = g.qubits
        k = max(level[a], level[b]) + 1
        if k == len(stages):
            stages.append([])
        stages[k].append(g.id)
        level[a] = level[b] = k

    # single-qubit gates attach to the stage of the next CZ on their qubit
    n_stages = len(stages)
    next_stage = [n_stages] * circuit.n_qubits
    stage_of = {g: k for k, st in enumerate(stages) for g in st}
    attach: dict[int, int] = {}
    for g in reversed(circuit.gates):
        if g.is_cz:
            for q in g.qubits:
                next_stage[q] = stage_of[g.id]
        else:
            attach[g.id] = next_stage[g.qubits[0]]
    return StagePlan(tuple(tuple(s) for s in stages), dict(sorted(attach.items())))


@dataclass(frozen=True)
class Violation:
    kind: str  # duplicate | missing | not-cz | qubit-conflict | dependency-inversion | attachment
    gates: tuple[int, ...]
    qubit: int | None = None
    detail: str = ""

    def __str__(self) -> str:
        where = f" on q{self.qubit}" if self.qubit is not None else ""
        gates = ", ".join(f"g{g}" for g in self.gates)
        return f"{self.kind}{where}: {gates}" + (f" ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class Verdict:
    ok: bool
    violation: Violation | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_stage_plan(plan: StagePlan, dag: GateDag) -> Verdict:
    """Check every StagePlan invariant, reporting the first violation."""
    circuit = dag.circuit
    seen: dict[int, int] = {}
    for k, stage in enumerate(plan.stages):
        for g in stage:
            if not 0 <= g < len(circuit.gates) or not circuit.gates[g].is_cz:
                return Verdict(False, Violation("not-cz", (g,), detail=f"stage {k}"))
            if g in seen:
                return Verdict(False, Violation("duplicate", (g,), detail=f"stages {seen[g]} and {k}"))
            seen[g] = k
    missing = [g.id for g in circuit.gates if g.is_cz and g.id not in seen]
    if missing:
        return Verdict(False, Violation("missing", tuple(missing)))

    for k, stage in enumerate(plan.stages):
        holder: dict[int, int] = {}
        for g in sorted(stage):
            for q in circuit.gates[g].qubits:
                if q in holder:
                    return Verdict(
                        False,
                        Violation("qubit-conflict", (holder[q], g), qubit=q, detail=f"stage {k}"),
                    )
                holder[q] = g

    # CZ-to-CZ order along every qubit wire, and single-qubit attachments
    last_cz: list[int] = [-1] * circuit.n_qubits
    pending: list[list[int]] = [[] for _ in range(circuit.n_qubits)]
    last_attach: list[tuple[int, int]] = [(-1, -1)] * circuit.n_qubits
    for g in circuit.gates:
        if g.is_cz:
            for q in g.qubits:
                p = last_cz[q]
                if p >= 0 and seen[p] >= seen[g.id]:
                    return Verdict(False, Violation("dependency-inversion", (p, g.id), qubit=q))
                for s in pending[q]:
                    if plan.single_qubit_attachment.get(s, -1) > seen[g.id]:
                        return Verdict(False, Violation("attachment", (s, g.id), qubit=q))
                pending[q] = []
                last_cz[q] = g.id
        else:
            q = g.qubits[0]
            b = plan.single_qubit_attachment.get(g.id)
            if b is None or not 0 <= b <= plan.n_stages:
                return Verdict(False, Violation("attachment", (g.id,), qubit=q, detail="unattached"))
            if last_cz[q] >= 0 and b <= seen[last_cz[q]]:
                return Verdict(False, Violation("attachment", (last_cz[q], g.id), qubit=q))
            prev_gate, prev_b = last_attach[q]
            if b < prev_b:
                return Verdict(False, Violation("attachment", (prev_gate, g.id), qubit=q))
            last_attach[q] = (g.id, b)
            pending[q].append(g.id)
    return Verdict(True)

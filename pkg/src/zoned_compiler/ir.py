"""Gate-level circuit representation and the gate dependency DAG."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

# name -> number of angle parameters
SINGLE_QUBIT_GATES: dict[str, int] = {
    "h": 0,
    "x": 0,
    "y": 0,
    "z": 0,
    "s": 0,
    "sdg": 0,
    "t": 0,
    "tdg": 0,
    "rx": 1,
    "ry": 1,
    "rz": 1,
    "r": 2,  # (theta, phi) laser rotation
}

CZ = "cz"


class CircuitError(ValueError):
    """Raised for structurally invalid circuits."""


@dataclass(frozen=True)
class Gate:
    id: int
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    @property
    def is_cz(self) -> bool:
        return self.name == CZ

    def __str__(self) -> str:
        head = self.name
        if self.params:
            head += "(" + ", ".join(repr(float(p)) for p in self.params) + ")"
        return head + " " + " ".join(str(q) for q in self.qubits) + ";"


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        if self.n_qubits < 0:
            raise CircuitError("negative qubit count")
        for i, g in enumerate(self.gates):
            if g.id != i:
                raise CircuitError(f"gate ids must be dense: position {i} has id {g.id}")
            _check_gate(g, self.n_qubits)

    @classmethod
    def from_ops(cls, n_qubits: int, ops: Iterable[tuple]) -> "Circuit":
        """Build from ``(name, qubits)`` or ``(name, qubits, params)`` tuples."""
        gates = []
        for i, op in enumerate(ops):
            name, qubits = op[0], tuple(int(q) for q in op[1])
            params = tuple(float(p) for p in op[2]) if len(op) > 2 else ()
            gates.append(Gate(i, name, qubits, params))
        return cls(n_qubits, tuple(gates))

    @property
    def cz_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.is_cz]

    @property
    def n_cz(self) -> int:
        return sum(1 for g in self.gates if g.is_cz)

    @property
    def n_single(self) -> int:
        return len(self.gates) - self.n_cz

    def to_text(self) -> str:
        """Canonical one-gate-per-line form; parses back to an equal circuit."""
        lines = [f"qubits {self.n_qubits};"]
        lines.extend(str(g) for g in self.gates)
        return "\n".join(lines) + "\n"


def _check_gate(g: Gate, n_qubits: int) -> None:
    if g.name == CZ:
        if len(g.qubits) != 2 or g.qubits[0] == g.qubits[1]:
            raise CircuitError(f"cz needs two distinct qubits, got {g.qubits}")
        if g.params:
            raise CircuitError("cz takes no parameters")
    elif g.name in SINGLE_QUBIT_GATES:
        if len(g.qubits) != 1:
            raise CircuitError(f"{g.name} acts on exactly one qubit")
        if len(g.params) != SINGLE_QUBIT_GATES[g.name]:
            raise CircuitError(
                f"{g.name} takes {SINGLE_QUBIT_GATES[g.name]} parameter(s), got {len(g.params)}"
            )
    else:
        raise CircuitError(f"unsupported gate {g.name!r}")
    for q in g.qubits:
        if not 0 <= q < n_qubits:
            raise CircuitError(f"qubit {q} out of range [0, {n_qubits})")


@dataclass(frozen=True)
class GateDag:
    """Immediate-predecessor dependency graph over the gates of a circuit.

    There is an edge ``a -> b`` when ``a`` is the last gate before ``b`` on
    one of ``b``'s qubits.
    """

    circuit: Circuit
    preds: tuple[tuple[int, ...], ...]
    succs: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def nodes(self) -> range:
        return range(len(self.preds))

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(a, b) for b, ps in enumerate(self.preds) for a in ps]

    def topological_order(self) -> list[int]:
        # program order is a topological order by construction
        return list(self.nodes)


def build_dag(circuit: Circuit) -> GateDag:
    last: list[int] = [-1] * circuit.n_qubits
    preds: list[list[int]] = []
    succs: list[list[int]] = [[] for _ in circuit.gates]
    for g in circuit.gates:
        ps: list[int] = []
        for q in g.qubits:
            p = last[q]
            if p >= 0 and p not in ps:
                ps.append(p)
                succs[p].append(g.id)
            last[q] = g.id
        preds.append(ps)
    return GateDag(circuit, tuple(tuple(p) for p in preds), tuple(tuple(s) for s in succs))


def cz_pairs(circuit: Circuit, ids: Sequence[int]) -> list[tuple[int, int]]:
    return [tuple(circuit.gates[i].qubits) for i in ids]  # type: ignore[misc]

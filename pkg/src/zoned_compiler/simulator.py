"""Dense statevector simulation for checking compiled schedules (small circuits only).

Qubit 0 is the most significant bit of the basis index.
"""

from __future__ import annotations

import math

import numpy as np

from .architecture import SiteTable
from .ir import Circuit, Gate
from .router import MoveEvent, PulseEvent, Schedule, SingleQubitEvent

DEFAULT_CAP = 12


class SimulationCapError(ValueError):
    pass


class ScheduleCorruptionError(RuntimeError):
    pass


def r_gate(theta: float, phi: float) -> np.ndarray:
    """Laser rotation ``r(theta, phi)``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array(
        [[c, -1j * np.exp(1j * phi) * s], [-1j * np.exp(-1j * phi) * s, c]], dtype=complex
    )


_S2 = 1 / math.sqrt(2)
_FIXED = {
    "h": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "sdg": np.array([[1, 0], [0, -1j]], dtype=complex),
    "t": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    "tdg": np.array([[1, 0], [0, np.exp(-1j * math.pi / 4)]], dtype=complex),
}

CZ_MATRIX = np.diag([1, 1, 1, -1]).astype(complex)


def gate_matrix(name: str, params: tuple[float, ...] = ()) -> np.ndarray:
    if name in _FIXED:
        return _FIXED[name]
    if name == "rx":
        return r_gate(params[0] / 2, 0.0)
    if name == "ry":
        return r_gate(params[0] / 2, math.pi / 2)
    if name == "rz":
        a = params[0] / 2
        return np.array([[np.exp(-1j * a), 0], [0, np.exp(1j * a)]], dtype=complex)
    if name == "r":
        return r_gate(params[0], params[1])
    raise ValueError(f"no matrix for gate {name!r}")


def zero_state(n: int, cap: int = DEFAULT_CAP) -> np.ndarray:
    if n > cap:
        raise SimulationCapError(f"{n} qubits exceeds the simulation cap of {cap}")
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    return psi


def apply_1q(psi: np.ndarray, n: int, q: int, u: np.ndarray) -> np.ndarray:
    t = psi.reshape([2] * n)
    t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
    return t.reshape(-1)


def apply_cz(psi: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    t = psi.reshape([2] * n).copy()
    idx: list = [slice(None)] * n
    idx[a] = 1
    idx[b] = 1
    t[tuple(idx)] *= -1
    return t.reshape(-1)


def _apply(psi: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    if gate.is_cz:
        return apply_cz(psi, n, *gate.qubits)
    return apply_1q(psi, n, gate.qubits[0], gate_matrix(gate.name, gate.params))


def _check_norm(psi: np.ndarray) -> None:
    if abs(np.vdot(psi, psi).real - 1.0) > 1e-12:
        raise ArithmeticError("state norm drifted")


def simulate_circuit(circuit: Circuit, cap: int = DEFAULT_CAP) -> np.ndarray:
    n = circuit.n_qubits
    psi = zero_state(n, cap)
    for g in circuit.gates:
        psi = _apply(psi, n, g)
        _check_norm(psi)
    return psi


def simulate_schedule(schedule: Schedule, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Replay pulses and single-qubit layers in time order; moves only relocate atoms.

    Each pulse applies CZ to every pair of entanglement-zone atoms closer than
    the blockade radius, after checking these are exactly the pulse's gates.
    """
    n = schedule.n_qubits
    psi = zero_state(n, cap)
    if n == 0:
        return psi
    table = SiteTable(schedule.config)
    cfg = schedule.config
    sites = {q: int(s) for q, s in enumerate(schedule.initial_sites)}
    pos = {q: table.position(s) for q, s in sites.items()}
    zone_y = cfg.ent_origin_y - 0.5 * cfg.zone_gap
    for ev in sorted(schedule.events, key=lambda e: e.start):
        if isinstance(ev, MoveEvent):
            for m in ev.batch.moves:
                if pos[m.qubit] != m.start:
                    raise ScheduleCorruptionError(f"q{m.qubit} is not at the start of its move")
            for m in ev.batch.moves:
                pos[m.qubit] = m.end
            if len(set(pos.values())) != n:
                raise ScheduleCorruptionError("two atoms share a trap")
        elif isinstance(ev, PulseEvent):
            ent = [q for q in range(n) if pos[q][1] > zone_y]
            pairs = set()
            for i, a in enumerate(ent):
                for b in ent[i + 1 :]:
                    if math.dist(pos[a], pos[b]) < cfg.rydberg_radius:
                        pairs.add((min(a, b), max(a, b)))
            want = {(min(a, b), max(a, b)) for _, a, b in ev.gates}
            if pairs != want:
                raise ScheduleCorruptionError(
                    f"pulse {ev.stage}: blockade pairs {sorted(pairs)} != gates {sorted(want)}"
                )
            for a, b in sorted(pairs):
                psi = apply_cz(psi, n, a, b)
                _check_norm(psi)
        elif isinstance(ev, SingleQubitEvent):
            for _, name, q, params in ev.gates:
                psi = apply_1q(psi, n, q, gate_matrix(name, tuple(params)))
                _check_norm(psi)
    return psi


def overlap(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(abs(np.vdot(a, b)))


def equivalent_up_to_global_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    return overlap(a, b) >= 1 - tol

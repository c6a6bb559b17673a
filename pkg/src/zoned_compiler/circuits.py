"""Benchmark circuit generators over {single-qubit gates, CZ}.

``cx c t`` is always emitted as ``h t; cz c t; h t``.
"""

from __future__ import annotations

import math

import networkx as nx
import numpy as np

from .ir import Circuit


class _Ops:
    def __init__(self) -> None:
        self.ops: list[tuple] = []

    def g(self, name: str, *qubits: int, params: tuple[float, ...] = ()) -> None:
        self.ops.append((name, qubits, params))

    def cx(self, c: int, t: int) -> None:
        self.g("h", t)
        self.g("cz", c, t)
        self.g("h", t)

    def zz(self, a: int, b: int, theta: float) -> None:
        """``exp(-i theta/2 Z_a Z_b)``."""
        self.cx(a, b)
        self.g("rz", b, params=(theta,))
        self.cx(a, b)

    def cphase(self, a: int, b: int, theta: float) -> None:
        """Controlled phase ``diag(1, 1, 1, e^{i theta})`` up to global phase."""
        self.g("rz", a, params=(theta / 2,))
        self.cx(a, b)
        self.g("rz", b, params=(-theta / 2,))
        self.cx(a, b)
        self.g("rz", b, params=(theta / 2,))

    def swap(self, a: int, b: int) -> None:
        self.cx(a, b)
        self.cx(b, a)
        self.cx(a, b)

    def ccx(self, a: int, b: int, t: int) -> None:
        self.g("h", t)
        self.cx(b, t)
        self.g("tdg", t)
        self.cx(a, t)
        self.g("t", t)
        self.cx(b, t)
        self.g("tdg", t)
        self.cx(a, t)
        self.g("t", b)
        self.g("t", t)
        self.g("h", t)
        self.cx(a, b)
        self.g("t", a)
        self.g("tdg", b)
        self.cx(a, b)

    def build(self, n: int) -> Circuit:
        return Circuit.from_ops(n, self.ops)


def cat(n: int) -> Circuit:
    """GHZ preparation along a line: ``n - 1`` CZ, each waiting for the previous."""
    if n < 1:
        raise ValueError("cat needs at least one qubit")
    o = _Ops()
    o.g("h", 0)
    for i in range(n - 1):
        o.cx(i, i + 1)
    return o.build(n)


def bernstein_vazirani(n: int, secret: int | None = None) -> Circuit:
    """Data qubits ``0..n-2``, target ``n-1``; one CZ per set bit of ``secret`` (default all ones)."""
    if n < 2:
        raise ValueError("bernstein-vazirani needs at least two qubits")
    if secret is None:
        secret = (1 << (n - 1)) - 1
    if not 0 <= secret < (1 << (n - 1)):
        raise ValueError("secret does not fit the data register")
    o = _Ops()
    t = n - 1
    o.g("x", t)
    for q in range(n):
        o.g("h", q)
    for i in range(n - 1):
        if secret >> i & 1:
            o.cx(i, t)
    for q in range(n - 1):
        o.g("h", q)
    return o.build(n)


def regular_graph_edges(n: int, d: int, seed: int) -> list[tuple[int, int]]:
    """Edges of a uniformly sampled ``d``-regular graph, in a seeded random order."""
    if n * d % 2 or d >= n or d < 0:
        raise ValueError(f"no {d}-regular graph on {n} vertices")
    g = nx.random_regular_graph(d, n, seed=seed)
    edges = sorted((min(a, b), max(a, b)) for a, b in g.edges())
    order = np.random.default_rng(seed).permutation(len(edges))
    return [edges[i] for i in order]


def random_regular(n: int, d: int = 3, seed: int = 0) -> Circuit:
    """Hadamard layer then one CZ per edge of a random ``d``-regular graph."""
    o = _Ops()
    edges = regular_graph_edges(n, d, seed)
    for q in range(n):
        o.g("h", q)
    for a, b in edges:
        o.g("cz", a, b)
    return o.build(n)


def qft(n: int) -> Circuit:
    """Textbook QFT: controlled phases (2 CZ each) and final swaps (3 CZ each)."""
    o = _Ops()
    for j in range(n):
        o.g("h", j)
        for k in range(j + 1, n):
            o.cphase(k, j, math.pi / 2 ** (k - j))
    for i in range(n // 2):
        o.swap(i, n - 1 - i)
    return o.build(n)


def ising(n: int, steps: int = 1, theta: float = 0.4, field: float = 0.3) -> Circuit:
    """Trotterized 1D transverse-field Ising chain: even bonds, odd bonds, then X field."""
    o = _Ops()
    for q in range(n):
        o.g("h", q)
    for _ in range(steps):
        for start in (0, 1):
            for i in range(start, n - 1, 2):
                o.zz(i, i + 1, theta)
        for q in range(n):
            o.g("rx", q, params=(field,))
    return o.build(n)


def qaoa(n: int, d: int = 3, p: int = 1, seed: int = 0, gamma: float = 0.7, beta: float = 0.3) -> Circuit:
    """MaxCut QAOA on a random ``d``-regular graph: ``p`` cost/mixer rounds."""
    edges = regular_graph_edges(n, d, seed)
    o = _Ops()
    for q in range(n):
        o.g("h", q)
    for layer in range(p):
        for a, b in edges:
            o.zz(a, b, gamma * (layer + 1))
        for q in range(n):
            o.g("rx", q, params=(2 * beta,))
    return o.build(n)


def adder4() -> Circuit:
    """Fixed 4-qubit adder kernel with 10 CZ."""
    o = _Ops()
    o.g("x", 0)
    o.g("x", 1)
    o.g("h", 3)
    o.cx(2, 3)
    o.g("t", 0)
    o.g("t", 1)
    o.g("t", 2)
    o.g("tdg", 3)
    o.cx(0, 1)
    o.cx(2, 3)
    o.cx(3, 0)
    o.cx(1, 2)
    o.cx(0, 1)
    o.cx(2, 3)
    o.g("tdg", 0)
    o.g("tdg", 1)
    o.g("tdg", 2)
    o.g("t", 3)
    o.cx(0, 1)
    o.cx(2, 3)
    o.g("s", 3)
    o.cx(3, 0)
    o.g("h", 3)
    return o.build(4)


def shor5() -> Circuit:
    """Toy 5-qubit order finding: 3 counting qubits, 2 work qubits, 30 CZ.

    Each controlled power of the modular multiplier is a controlled swap of
    the work qubits (8 CZ); an inverse QFT without swaps (6 CZ) reads out.
    """
    o = _Ops()
    c = (0, 1, 2)
    w0, w1 = 3, 4
    for q in c:
        o.g("h", q)
    o.g("x", w0)
    for ctrl in c:
        o.cx(w1, w0)
        o.ccx(ctrl, w0, w1)
        o.cx(w1, w0)
    # inverse QFT on the counting register, bit order reversed by relabeling
    for j in reversed(range(3)):
        for k in reversed(range(j + 1, 3)):
            o.cphase(c[k], c[j], -math.pi / 2 ** (k - j))
        o.g("h", c[j])
    return o.build(5)

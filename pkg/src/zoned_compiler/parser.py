"""Circuit text front ends.

Two inputs are accepted:

* the native line-oriented format::

      qubits 3;
      h 0;
      rz(pi/4) 1;
      cz 0 1;

* a small subset of OpenQASM 2 (``qreg``, ``h``/``x``/``rz``/... , ``cz``,
  ``cx``).  ``creg``, ``barrier`` and ``measure`` are skipped.

``cx c t`` is rewritten to ``h t; cz c t; h t`` in both front ends.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from pathlib import Path

from .ir import CZ, SINGLE_QUBIT_GATES, Circuit, CircuitError, Gate


class CircuitSyntaxError(CircuitError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def eval_angle(expr: str) -> float:
    """Evaluate an arithmetic angle expression (numbers, ``pi``, + - * / **)."""

    def ev(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported expression {expr!r}")

    try:
        return ev(ast.parse(expr.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise ValueError(f"bad angle expression {expr!r}") from exc


def _strip_comments(text: str) -> str:
    # blank out comments but keep columns stable for error messages
    out = []
    for line in text.split("\n"):
        cut = len(line)
        for marker in ("//", "#"):
            i = line.find(marker)
            if i >= 0:
                cut = min(cut, i)
        out.append(line[:cut] + " " * (len(line) - cut))
    return "\n".join(out)


def _statements(text: str):
    """Yield ``(statement, line, col)`` for each ``;``-terminated statement."""
    text = _strip_comments(text)
    line, col = 1, 1
    buf: list[str] = []
    start = None
    for ch in text:
        if start is None and not ch.isspace() and ch != ";":
            start = (line, col)
        if ch == ";":
            stmt = "".join(buf).strip()
            if stmt:
                yield stmt, start[0], start[1]
            buf, start = [], None
        else:
            buf.append(ch)
        if ch == "\n":
            line, col = line + 1, 1
        else:
            col += 1
    if "".join(buf).strip():
        raise CircuitSyntaxError("missing ';' at end of statement", *start)


_HEAD = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*(.*)$", re.S)


def _split_head(stmt: str, line: int, col: int) -> tuple[str, tuple[float, ...], str]:
    m = _HEAD.match(stmt)
    if not m:
        raise CircuitSyntaxError(f"cannot parse statement {stmt!r}", line, col)
    name, params, rest = m.group(1).lower(), m.group(2), m.group(3)
    values: tuple[float, ...] = ()
    if params is not None and params.strip():
        try:
            values = tuple(eval_angle(p) for p in params.split(","))
        except ValueError as exc:
            raise CircuitSyntaxError(str(exc), line, col) from None
    return name, values, rest


class _Builder:
    def __init__(self, n_qubits: int):
        self.n_qubits = n_qubits
        self.gates: list[Gate] = []

    def add(self, name, qubits, params, line, col):
        if name == "cx":
            if params:
                raise CircuitSyntaxError("cx takes no parameters", line, col)
            self._check(name, qubits, 2, line, col)
            c, t = qubits
            self._emit("h", (t,), ())
            self._emit(CZ, (c, t), ())
            self._emit("h", (t,), ())
            return
        if name == CZ:
            arity = 2
        elif name in SINGLE_QUBIT_GATES:
            arity = 1
            if len(params) != SINGLE_QUBIT_GATES[name]:
                raise CircuitSyntaxError(
                    f"{name} takes {SINGLE_QUBIT_GATES[name]} parameter(s)", line, col
                )
        else:
            raise CircuitSyntaxError(f"unsupported gate {name!r}", line, col)
        self._check(name, qubits, arity, line, col)
        self._emit(name, tuple(qubits), params)

    def _check(self, name, qubits, arity, line, col):
        if len(qubits) != arity:
            raise CircuitSyntaxError(f"{name} expects {arity} qubit(s), got {len(qubits)}", line, col)
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise CircuitSyntaxError(
                    f"qubit {q} out of declared range [0, {self.n_qubits})", line, col
                )
        if arity == 2 and qubits[0] == qubits[1]:
            raise CircuitSyntaxError(f"{name} on identical qubits", line, col)

    def _emit(self, name, qubits, params):
        self.gates.append(Gate(len(self.gates), name, tuple(qubits), tuple(params)))

    def build(self) -> Circuit:
        return Circuit(self.n_qubits, tuple(self.gates))


def parse_circuit(text: str) -> Circuit:
    """Parse the native format."""
    builder: _Builder | None = None
    for stmt, line, col in _statements(text):
        if builder is None:
            m = re.fullmatch(r"qubits\s+(\d+)", stmt)
            if not m:
                raise CircuitSyntaxError("expected 'qubits N' header", line, col)
            builder = _Builder(int(m.group(1)))
            continue
        name, params, rest = _split_head(stmt, line, col)
        if name == "qubits":
            raise CircuitSyntaxError("duplicate 'qubits' header", line, col)
        try:
            qubits = [int(tok) for tok in rest.split()]
        except ValueError:
            raise CircuitSyntaxError(f"bad qubit list {rest!r}", line, col) from None
        builder.add(name, qubits, params, line, col)
    if builder is None:
        raise CircuitSyntaxError("empty program: missing 'qubits N' header", 1, 1)
    return builder.build()


_QARG = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]$")


def parse_qasm(text: str) -> Circuit:
    """Parse the supported OpenQASM 2 subset."""
    regs: dict[str, tuple[int, int]] = {}
    total = 0
    pending: list[tuple[str, tuple[float, ...], list[tuple[str, int]], int, int]] = []
    for stmt, line, col in _statements(text):
        low = stmt.lower()
        if low.startswith("openqasm") or low.startswith("include"):
            continue
        if low.startswith("creg") or low.startswith("barrier") or low.startswith("measure"):
            continue
        if low.startswith("if"):
            raise CircuitSyntaxError("classical conditionals are not supported", line, col)
        if low.startswith("gate ") or low.startswith("opaque"):
            raise CircuitSyntaxError("custom gate definitions are not supported", line, col)
        if low.startswith("qreg"):
            m = re.fullmatch(r"qreg\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]", stmt)
            if not m:
                raise CircuitSyntaxError(f"bad qreg declaration {stmt!r}", line, col)
            regs[m.group(1)] = (total, int(m.group(2)))
            total += int(m.group(2))
            continue
        name, params, rest = _split_head(stmt, line, col)
        args = []
        for arg in (a.strip() for a in rest.split(",")):
            m = _QARG.match(arg)
            if not m:
                raise CircuitSyntaxError(f"bad qubit argument {arg!r}", line, col)
            args.append((m.group(1), int(m.group(2))))
        pending.append((name, params, args, line, col))

    builder = _Builder(total)
    for name, params, args, line, col in pending:
        qubits = []
        for reg, idx in args:
            if reg not in regs:
                raise CircuitSyntaxError(f"undeclared register {reg!r}", line, col)
            offset, size = regs[reg]
            if idx >= size:
                raise CircuitSyntaxError(f"index {idx} out of range for {reg}[{size}]", line, col)
            qubits.append(offset + idx)
        builder.add(name, qubits, params, line, col)
    return builder.build()


def load_circuit(path: str | Path, fmt: str | None = None) -> Circuit:
    """Read a circuit file; ``fmt`` is ``"native"`` or ``"qasm"`` (default: by extension)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if fmt is None:
        fmt = "qasm" if path.suffix.lower() == ".qasm" else "native"
    if fmt == "qasm":
        return parse_qasm(text)
    if fmt == "native":
        return parse_circuit(text)
    raise ValueError(f"unknown circuit format {fmt!r}")

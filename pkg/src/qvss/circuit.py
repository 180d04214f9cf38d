"""Gate-list circuits over named qubits, simulation, and assembly emission.

The assembly dialect is a deterministic OpenQASM 2.0 subset: UTF-8, LF line
endings, a prologue declaring the qubit and classical-bit registers, then
one gate per line using the opcodes h/x/z/cx/ccx.  Circuit qubit j maps to
register slot j-1 (the file is zero-based while the in-memory naming is
one-based).  Identical circuits always emit byte-identical text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import statevector as sv
from .errors import FormatError
from .statevector import StateVector

#: Gate kind -> operand count.
GATE_ARITY = {"H": 1, "X": 1, "Z": 1, "CNOT": 2, "TOFFOLI": 3}

_OPCODES = {"H": "h", "X": "x", "Z": "z", "CNOT": "cx", "TOFFOLI": "ccx"}
_KINDS_BY_OPCODE = {v: k for k, v in _OPCODES.items()}


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != GATE_ARITY[self.kind]:
            raise ValueError(
                f"{self.kind} takes {GATE_ARITY[self.kind]} operand(s), "
                f"got {self.qubits!r}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} operands must be distinct: {self.qubits!r}")


@dataclass(frozen=True)
class CircuitDescription:
    """Ordered gate list over qubits 1..num_qubits."""

    num_qubits: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError(f"circuit needs at least one qubit, got {self.num_qubits}")
        for gate in self.gates:
            for q in gate.qubits:
                if q < 1 or q > self.num_qubits:
                    raise ValueError(
                        f"{gate.kind} operand {q} out of range 1..{self.num_qubits}"
                    )


def simulate_circuit(circuit: CircuitDescription, initial: StateVector) -> StateVector:
    """Apply the circuit's gates in order, starting from `initial`."""
    if circuit.num_qubits != initial.num_qubits:
        raise ValueError(
            f"circuit is over {circuit.num_qubits} qubits but the state has "
            f"{initial.num_qubits}"
        )
    state = initial
    for gate in circuit.gates:
        if gate.kind == "H":
            state = sv.apply_h(state, gate.qubits[0])
        elif gate.kind == "X":
            state = sv.apply_x(state, gate.qubits[0])
        elif gate.kind == "Z":
            state = sv.apply_z(state, gate.qubits[0])
        elif gate.kind == "CNOT":
            state = sv.apply_cnot(state, gate.qubits[0], gate.qubits[1])
        else:
            state = sv.apply_toffoli(state, *gate.qubits)
    return state


def emit_assembly(circuit: CircuitDescription) -> str:
    """Render the circuit as portable quantum-assembly text."""
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"qreg q[{circuit.num_qubits}];",
        f"creg c[{circuit.num_qubits}];",
    ]
    for gate in circuit.gates:
        operands = ",".join(f"q[{q - 1}]" for q in gate.qubits)
        lines.append(f"{_OPCODES[gate.kind]} {operands};")
    return "\n".join(lines) + "\n"


_QREG_RE = re.compile(r"^qreg q\[(\d+)\];$")
_GATE_RE = re.compile(r"^([a-z]+) (q\[\d+\](?:,q\[\d+\])*);$")


def parse_assembly(text: str) -> CircuitDescription:
    """Read back the dialect produced by :func:`emit_assembly`."""
    num_qubits = None
    gates: list[Gate] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith(("OPENQASM", "include", "creg")):
            continue
        m = _QREG_RE.match(line)
        if m:
            if num_qubits is not None:
                raise FormatError(f"line {lineno}: duplicate qreg declaration")
            num_qubits = int(m.group(1))
            continue
        m = _GATE_RE.match(line)
        if m is None:
            raise FormatError(f"line {lineno}: unrecognized statement {line!r}")
        opcode, operands = m.groups()
        kind = _KINDS_BY_OPCODE.get(opcode)
        if kind is None:
            raise FormatError(f"line {lineno}: unknown opcode {opcode!r}")
        if num_qubits is None:
            raise FormatError(f"line {lineno}: gate before qreg declaration")
        qubits = tuple(int(s[2:-1]) + 1 for s in operands.split(","))
        gates.append(Gate(kind, qubits))
    if num_qubits is None:
        raise FormatError("missing qreg declaration")
    return CircuitDescription(num_qubits, tuple(gates))

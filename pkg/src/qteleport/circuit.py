"""Circuit data model and structural validation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Union

from .qcore import GATE_NAMES

__all__ = [
    "MAX_QUBITS",
    "MAX_CLASSICAL_BITS",
    "ADVISORY_QUBITS",
    "SINGLE_QUBIT_GATES",
    "ParseError",
    "QubitLimitWarning",
    "Gate1",
    "CNOT",
    "Measure",
    "CondGate1",
    "Instruction",
    "Circuit",
    "validate",
]

MAX_QUBITS = 24
MAX_CLASSICAL_BITS = 24
ADVISORY_QUBITS = 5
SINGLE_QUBIT_GATES = tuple(g for g in GATE_NAMES if g != "CNOT")

ERROR_KINDS = (
    "syntax",
    "unknown-gate",
    "index-out-of-range",
    "classical-bit-undefined",
    "qubit-after-measure",
)


class ParseError(ValueError):
    """A positioned error in a circuit program.

    ``line`` and ``column`` are 1-based. For circuits built in code, the
    position refers to the line the instruction occupies in the serialized
    program (header on line 1).
    """

    def __init__(self, message: str, line: int, column: int, kind: str):
        if kind not in ERROR_KINDS:
            raise ValueError(f"unknown ParseError kind {kind!r}")
        super().__init__(f"line {line}, column {column}: {message} [{kind}]")
        self.message = message
        self.line = line
        self.column = column
        self.kind = kind

    def __reduce__(self):
        return (type(self), (self.message, self.line, self.column, self.kind))


class QubitLimitWarning(UserWarning):
    """Circuit uses more qubits than the 5-qubit reference processor."""


@dataclass(frozen=True)
class Gate1:
    gate: str
    target: int


@dataclass(frozen=True)
class CNOT:
    control: int
    target: int


@dataclass(frozen=True)
class Measure:
    qubit: int
    cbit: int


@dataclass(frozen=True)
class CondGate1:
    """Apply ``gate`` to ``target`` iff classical bit ``cbit`` equals ``value``."""

    gate: str
    target: int
    cbit: int
    value: int


Instruction = Union[Gate1, CNOT, Measure, CondGate1]


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    instructions: tuple = ()
    n_classical_bits: int = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if self.n_classical_bits is None:
            written = [i.cbit for i in self.instructions if isinstance(i, Measure)]
            object.__setattr__(self, "n_classical_bits", max(written) + 1 if written else 0)

    @property
    def has_measurement(self) -> bool:
        return any(isinstance(i, Measure) for i in self.instructions)

    def __len__(self) -> int:
        return len(self.instructions)


def _is_index(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


# default columns of each field in the canonical single-digit serialization
_DEFAULT_COLUMNS = {
    Gate1: {"gate": 1, "target": 3},
    CNOT: {"gate": 1, "control": 4, "target": 6},
    Measure: {"gate": 1, "qubit": 9, "cbit": 14},
    CondGate1: {"gate": 16, "cbit": 4, "value": 9, "target": 18},
}


def validate(c: Circuit, positions=None) -> None:
    """Check every circuit invariant; raise :class:`ParseError` on the first violation.

    ``positions`` optionally gives, per instruction, ``(line, {field: column})``
    so errors point into the original source. Emits
    :class:`QubitLimitWarning` above five qubits.
    """
    if not _is_index(c.n_qubits) or not 1 <= c.n_qubits <= MAX_QUBITS:
        raise ParseError(
            f"qubit count must be between 1 and {MAX_QUBITS}, got {c.n_qubits!r}", 1, 1, "index-out-of-range"
        )
    if not _is_index(c.n_classical_bits) or not 0 <= c.n_classical_bits <= MAX_CLASSICAL_BITS:
        bad = next(
            (i for i, ins in enumerate(c.instructions) if isinstance(ins, Measure) and not 0 <= ins.cbit < MAX_CLASSICAL_BITS),
            None,
        )
        line, column = (1, 1)
        if bad is not None:
            line, columns = positions[bad] if positions is not None else (bad + 2, _DEFAULT_COLUMNS[Measure])
            column = columns["cbit"]
        raise ParseError(
            f"classical bit count must be between 0 and {MAX_CLASSICAL_BITS}, got {c.n_classical_bits!r}",
            line,
            column,
            "index-out-of-range",
        )
    if c.n_qubits > ADVISORY_QUBITS:
        warnings.warn(
            f"circuit uses {c.n_qubits} qubits; the reference processor has {ADVISORY_QUBITS}",
            QubitLimitWarning,
            stacklevel=2,
        )

    measured: set[int] = set()
    written: set[int] = set()

    for pos, ins in enumerate(c.instructions):
        if positions is not None:
            line, columns = positions[pos]
        else:
            line, columns = pos + 2, _DEFAULT_COLUMNS.get(type(ins), {})

        def fail(msg, kind, fld="gate"):
            raise ParseError(msg, line, columns.get(fld, 1), kind)

        def check_qubit(fld):
            q = getattr(ins, fld)
            if not _is_index(q) or not 0 <= q < c.n_qubits:
                fail(f"qubit {q!r} out of range for {c.n_qubits}-qubit circuit", "index-out-of-range", fld)
            if q in measured:
                fail(f"qubit {q} is acted upon after being measured", "qubit-after-measure", fld)

        def check_cbit():
            if not _is_index(ins.cbit) or not 0 <= ins.cbit < c.n_classical_bits:
                fail(f"classical bit {ins.cbit!r} out of range", "index-out-of-range", "cbit")

        if isinstance(ins, Gate1):
            if ins.gate not in SINGLE_QUBIT_GATES:
                fail(f"unknown single-qubit gate {ins.gate!r}", "unknown-gate")
            check_qubit("target")
        elif isinstance(ins, CNOT):
            if ins.control == ins.target:
                fail("CNOT control and target must differ", "index-out-of-range", "target")
            check_qubit("control")
            check_qubit("target")
        elif isinstance(ins, Measure):
            q = ins.qubit
            if not _is_index(q) or not 0 <= q < c.n_qubits:
                fail(f"qubit {q!r} out of range for {c.n_qubits}-qubit circuit", "index-out-of-range", "qubit")
            check_cbit()
            measured.add(q)
            written.add(ins.cbit)
        elif isinstance(ins, CondGate1):
            if not _is_index(ins.cbit) or not 0 <= ins.cbit < MAX_CLASSICAL_BITS:
                fail(f"classical bit {ins.cbit!r} out of range", "index-out-of-range", "cbit")
            if ins.cbit not in written:
                fail(
                    f"classical bit {ins.cbit} is read before any measurement writes it",
                    "classical-bit-undefined",
                    "cbit",
                )
            if isinstance(ins.value, bool) or ins.value not in (0, 1):
                fail(f"conditional value must be 0 or 1, got {ins.value!r}", "syntax", "value")
            if ins.gate not in SINGLE_QUBIT_GATES:
                fail(f"unknown single-qubit gate {ins.gate!r}", "unknown-gate")
            check_qubit("target")
        else:
            fail(f"unsupported instruction {ins!r}", "syntax")

"""Line-oriented circuit text format (``.qc`` files).

Grammar, one statement per line::

    qubits N                 header, must come first
    i|x|y|z|h|s|t Q          single-qubit gate
    cx QC QT                 CNOT
    measure Q -> C           Z measurement of qubit Q into classical bit C
    if C == V then G Q       apply gate G to Q iff classical bit C equals V

``#`` starts a comment. Blank lines are ignored. Mnemonics are
case-insensitive on input and lowercase on output.
"""

from __future__ import annotations

import re
from pathlib import Path

from .circuit import (
    CNOT,
    MAX_QUBITS,
    SINGLE_QUBIT_GATES,
    Circuit,
    CondGate1,
    Gate1,
    Measure,
    ParseError,
    validate,
)

__all__ = ["ParseError", "parse", "parse_file", "serialize", "validate"]

_TOKEN = re.compile(r"\S+")
_INT = re.compile(r"[0-9]+")
_GATES = {g.lower() for g in SINGLE_QUBIT_GATES}
# cap on digits so huge literals fail fast instead of building bignums
_MAX_DIGITS = 9


class _Line:
    def __init__(self, number: int, text: str):
        self.number = number
        self.text = text
        self.tokens = [(m.group(), m.start() + 1) for m in _TOKEN.finditer(text)]

    def error(self, message, kind, column=None):
        if column is None:
            column = self.tokens[0][1] if self.tokens else 1
        return ParseError(message, self.number, column, kind)

    def end_column(self) -> int:
        return len(self.text.rstrip()) + 1 if self.text.strip() else 1


def _int(line: _Line, pos: int, what: str) -> tuple[int, int]:
    if pos >= len(line.tokens):
        raise line.error(f"expected {what}", "syntax", line.end_column())
    tok, col = line.tokens[pos]
    if not _INT.fullmatch(tok):
        raise line.error(f"expected {what}, got {tok!r}", "syntax", col)
    if len(tok) > _MAX_DIGITS:
        raise line.error(f"{what} {tok} is too large", "index-out-of-range", col)
    return int(tok), col


def _expect(line: _Line, pos: int, literal: str) -> None:
    if pos >= len(line.tokens):
        raise line.error(f"expected {literal!r}", "syntax", line.end_column())
    tok, col = line.tokens[pos]
    if tok.lower() != literal:
        raise line.error(f"expected {literal!r}, got {tok!r}", "syntax", col)


def _finish(line: _Line, pos: int) -> None:
    if pos < len(line.tokens):
        tok, col = line.tokens[pos]
        raise line.error(f"unexpected trailing token {tok!r}", "syntax", col)


def _statement(line: _Line):
    head, head_col = line.tokens[0]
    op = head.lower()
    if op in _GATES:
        target, tcol = _int(line, 1, "qubit index")
        _finish(line, 2)
        return Gate1(op.upper(), target), {"gate": head_col, "target": tcol}
    if op == "cx":
        control, ccol = _int(line, 1, "control qubit")
        target, tcol = _int(line, 2, "target qubit")
        _finish(line, 3)
        return CNOT(control, target), {"gate": head_col, "control": ccol, "target": tcol}
    if op == "measure":
        qubit, qcol = _int(line, 1, "qubit index")
        _expect(line, 2, "->")
        cbit, bcol = _int(line, 3, "classical bit index")
        _finish(line, 4)
        return Measure(qubit, cbit), {"gate": head_col, "qubit": qcol, "cbit": bcol}
    if op == "if":
        cbit, bcol = _int(line, 1, "classical bit index")
        _expect(line, 2, "==")
        value, vcol = _int(line, 3, "0 or 1")
        if value not in (0, 1):
            raise line.error(f"conditional value must be 0 or 1, got {value}", "syntax", vcol)
        _expect(line, 4, "then")
        if len(line.tokens) <= 5:
            raise line.error("expected a gate after 'then'", "syntax", line.end_column())
        gate, gcol = line.tokens[5]
        if gate.lower() not in _GATES:
            raise line.error(f"unknown single-qubit gate {gate!r}", "unknown-gate", gcol)
        target, tcol = _int(line, 6, "qubit index")
        _finish(line, 7)
        fields = {"gate": gcol, "cbit": bcol, "value": vcol, "target": tcol}
        return CondGate1(gate.upper(), target, cbit, value), fields
    if op == "qubits":
        raise line.error("duplicate 'qubits' header", "syntax", head_col)
    raise line.error(f"unknown gate or statement {head!r}", "unknown-gate", head_col)


def parse(src) -> Circuit:
    """Parse program text (``str`` or UTF-8 ``bytes``) into a validated :class:`Circuit`.

    Raises :class:`ParseError` with the position and kind of the first error.
    """
    if isinstance(src, (bytes, bytearray)):
        try:
            src = bytes(src).decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = bytes(src)[: exc.start].decode("utf-8")
            line = prefix.count("\n") + 1
            column = len(prefix) - (prefix.rfind("\n") + 1) + 1
            raise ParseError("invalid UTF-8", line, column, "syntax") from None
    if src.startswith("﻿"):
        src = src[1:]

    lines = []
    for number, raw in enumerate(src.split("\n"), start=1):
        raw = raw[:-1] if raw.endswith("\r") else raw
        code = raw.split("#", 1)[0]
        line = _Line(number, code)
        if line.tokens:
            lines.append(line)

    if not lines:
        raise ParseError("empty program: expected 'qubits N' header", 1, 1, "syntax")
    header = lines[0]
    if header.tokens[0][0].lower() != "qubits":
        raise header.error("program must start with 'qubits N'", "syntax")
    n_qubits, ncol = _int(header, 1, "qubit count")
    _finish(header, 2)
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise header.error(f"qubit count must be between 1 and {MAX_QUBITS}", "index-out-of-range", ncol)

    instructions, positions = [], []
    for line in lines[1:]:
        ins, cols = _statement(line)
        instructions.append(ins)
        positions.append((line.number, cols))
    circuit = Circuit(n_qubits, instructions)
    validate(circuit, positions)
    return circuit


def parse_file(path) -> Circuit:
    return parse(Path(path).read_bytes())


def serialize(c: Circuit) -> str:
    """Canonical program text; ``parse(serialize(c)) == c`` for valid circuits."""
    out = [f"qubits {c.n_qubits}"]
    for ins in c.instructions:
        if isinstance(ins, Gate1):
            out.append(f"{ins.gate.lower()} {ins.target}")
        elif isinstance(ins, CNOT):
            out.append(f"cx {ins.control} {ins.target}")
        elif isinstance(ins, Measure):
            out.append(f"measure {ins.qubit} -> {ins.cbit}")
        elif isinstance(ins, CondGate1):
            out.append(f"if {ins.cbit} == {ins.value} then {ins.gate.lower()} {ins.target}")
        else:
            raise TypeError(f"cannot serialize {ins!r}")
    return "\n".join(out) + "\n"

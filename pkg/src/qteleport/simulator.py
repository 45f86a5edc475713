"""Circuit execution: exact branch enumeration and seeded shot sampling.

Classical bits start at 0 and are rendered as bitstrings with bit 0 first.
Every shot draws its randomness from ``ShotStream(seed, shot_index)``, in
this order: for each executed gate and each qubit it touches, one draw
deciding whether a Pauli error occurs and, if so, one draw choosing it;
for each measurement, one draw for the outcome and, when readout noise is
enabled, one draw for the readout flip. Noise draws are skipped entirely
when the corresponding probability is zero.
"""

from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import qcore
from .circuit import CNOT, Circuit, CondGate1, Gate1, Measure, validate
from .qcore import DensityMatrix, StateVector
from .rng import MAX_SEED, ShotStream, uniforms

__all__ = [
    "NoiseModel",
    "RunConfig",
    "Histogram",
    "Branch",
    "AnalyticResult",
    "Trajectory",
    "zero_state",
    "enumerate_branches",
    "run_analytic",
    "reduced_state",
    "measure_collapse",
    "apply_noise",
    "conditional_apply",
    "run_trajectories",
    "run_shots",
    "post_select",
]

PAULIS = ("X", "Y", "Z")

# joint branch probabilities below this are dropped during enumeration
_PRUNE = 1e-24


@dataclass(frozen=True)
class NoiseModel:
    depolarizing_p: float = 0.0
    readout_flip_q: float = 0.0

    def __post_init__(self):
        for name in ("depolarizing_p", "readout_flip_q"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and 0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {value!r}")

    @property
    def is_noiseless(self) -> bool:
        return self.depolarizing_p == 0 and self.readout_flip_q == 0


@dataclass(frozen=True)
class RunConfig:
    shots: int = 8192
    seed: int = 0
    noise: NoiseModel | None = None

    def __post_init__(self):
        if isinstance(self.shots, bool) or not isinstance(self.shots, (int, np.integer)) or self.shots < 1:
            raise ValueError(f"shots must be a positive integer, got {self.shots!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed <= MAX_SEED:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")

    def as_dict(self) -> dict:
        noise = self.noise or NoiseModel()
        return {
            "shots": int(self.shots),
            "seed": int(self.seed),
            "noise": {"depolarizing_p": noise.depolarizing_p, "readout_flip_q": noise.readout_flip_q},
        }


@dataclass
class Histogram:
    """Shot counts keyed by classical bitstring (bit 0 first)."""

    n_bits: int
    counts: dict = field(default_factory=dict)
    shots: int | None = None

    def __post_init__(self):
        self.counts = {k: int(v) for k, v in sorted(self.counts.items()) if v}
        total = sum(self.counts.values())
        if self.shots is None:
            self.shots = total
        if total != self.shots:
            raise ValueError(f"counts sum to {total}, expected {self.shots}")
        for key in self.counts:
            if len(key) != self.n_bits or set(key) - {"0", "1"}:
                raise ValueError(f"bad bitstring {key!r} for {self.n_bits} classical bits")

    def probabilities(self) -> dict:
        if not self.shots:
            return {k: 0.0 for k in self.counts}
        return {k: v / self.shots for k, v in self.counts.items()}

    def frequency(self, bitstring: str) -> float:
        return self.counts.get(bitstring, 0) / self.shots if self.shots else 0.0

    def marginal(self, bit: int) -> tuple[int, int]:
        """Counts of (0, 1) on a single classical bit."""
        ones = sum(v for k, v in self.counts.items() if k[bit] == "1")
        return self.shots - ones, ones

    def as_dict(self) -> dict:
        return {"n_bits": self.n_bits, "shots": self.shots, "counts": dict(self.counts)}


class Branch(NamedTuple):
    probability: float
    bits: tuple
    state: StateVector

    @property
    def bitstring(self) -> str:
        return "".join(map(str, self.bits))


class AnalyticResult(NamedTuple):
    state: StateVector | None
    probabilities: np.ndarray


class Trajectory(NamedTuple):
    bits: str
    state: StateVector


def zero_state(n_qubits: int) -> StateVector:
    return qcore.basis_state("0" * n_qubits)


def _initial(circuit: Circuit, initial_state: StateVector | None) -> StateVector:
    if initial_state is None:
        return zero_state(circuit.n_qubits)
    if initial_state.n_qubits != circuit.n_qubits:
        raise ValueError(
            f"initial state has {initial_state.n_qubits} qubits, circuit has {circuit.n_qubits}"
        )
    return initial_state


def _apply_gate(state: StateVector, name: str, target: int) -> StateVector:
    if name == "I":
        return state
    return qcore.apply_1q(state, qcore.standard_gate(name), target)


def _project(state: StateVector, qubit: int, bit: int) -> tuple[float, StateVector | None]:
    n = state.n_qubits
    view = state.amps.reshape(2**qubit, 2, 2 ** (n - 1 - qubit))
    p = float(np.sum(np.abs(view[:, bit, :]) ** 2))
    if p <= 0.0:
        return 0.0, None
    out = np.zeros_like(view)
    out[:, bit, :] = view[:, bit, :] / math.sqrt(p)
    return p, StateVector(out.reshape(-1))


def measure_collapse(state: StateVector, qubit: int, u: float) -> tuple[int, StateVector]:
    """Measure ``qubit`` in the Z basis using the uniform draw ``u``.

    The outcome is 1 exactly when ``u >= P(qubit = 0)``; the returned state is
    the renormalized projection.
    """
    if not isinstance(qubit, (int, np.integer)) or not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit index {qubit!r} out of range for {state.n_qubits}-qubit state")
    p0, post0 = _project(state, qubit, 0)
    if u < p0:
        return 0, post0
    _, post1 = _project(state, qubit, 1)
    if post1 is None:
        # P(1) underflowed to zero although u >= p0 (p0 rounded just below 1)
        return 0, post0
    return 1, post1


def conditional_apply(state: StateVector, g: str, target: int, bit_value: int, required: int) -> StateVector:
    if bit_value != required:
        return state
    gate = qcore.standard_gate(g)
    if gate.arity != 1:
        raise ValueError(f"conditional gates must be single-qubit, got {gate.name}")
    return qcore.apply_1q(state, gate, target)


def apply_noise(state: StateVector, targets, p: float, rng) -> StateVector:
    """With probability ``p`` per target qubit, apply a uniformly chosen Pauli.

    ``rng`` needs ``random()`` and ``integers(high)``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must be in [0, 1], got {p!r}")
    if p == 0:
        return state
    for q in targets:
        if rng.random() < p:
            state = qcore.apply_1q(state, qcore.standard_gate(PAULIS[rng.integers(3)]), q)
    return state


def enumerate_branches(circuit: Circuit, initial_state: StateVector | None = None) -> list[Branch]:
    """Exact outcome tree of a noiseless circuit.

    Each branch carries its joint probability, the classical register and the
    post-measurement state. Conditional gates are resolved per branch.
    """
    validate(circuit)
    branches = [Branch(1.0, (0,) * circuit.n_classical_bits, _initial(circuit, initial_state))]
    for ins in circuit.instructions:
        if isinstance(ins, Measure):
            split = []
            for prob, bits, state in branches:
                for bit in (0, 1):
                    p, post = _project(state, ins.qubit, bit)
                    if post is None or prob * p < _PRUNE:
                        continue
                    new_bits = bits[: ins.cbit] + (bit,) + bits[ins.cbit + 1 :]
                    split.append(Branch(prob * p, new_bits, post))
            branches = split
        elif isinstance(ins, Gate1):
            branches = [b._replace(state=_apply_gate(b.state, ins.gate, ins.target)) for b in branches]
        elif isinstance(ins, CNOT):
            branches = [b._replace(state=qcore.apply_cnot(b.state, ins.control, ins.target)) for b in branches]
        elif isinstance(ins, CondGate1):
            branches = [
                b._replace(state=conditional_apply(b.state, ins.gate, ins.target, b.bits[ins.cbit], ins.value))
                for b in branches
            ]
    return branches


def run_analytic(circuit: Circuit, initial_state: StateVector | None = None) -> AnalyticResult:
    """Exact distribution over classical bitstrings, indexed with bit 0 as the most significant bit.

    ``state`` is the final state when the circuit measures nothing, else None.
    """
    branches = enumerate_branches(circuit, initial_state)
    probs = np.zeros(2**circuit.n_classical_bits)
    for b in branches:
        index = int(b.bitstring, 2) if b.bits else 0
        probs[index] += b.probability
    state = None if circuit.has_measurement else branches[0].state
    return AnalyticResult(state, probs)


def reduced_state(branches, qubit: int) -> DensityMatrix:
    """Probability-weighted reduced density matrix of ``qubit`` over branches or trajectories."""
    total = 0.0
    acc = np.zeros((2, 2), dtype=np.complex128)
    for item in branches:
        weight = item.probability if isinstance(item, Branch) else 1.0
        acc += weight * qcore.partial_trace(qcore.density_from_state(item.state), qubit).elems
        total += weight
    if total == 0:
        raise ValueError("no branches to average")
    acc /= total
    return DensityMatrix((acc + acc.conj().T) / 2)


def _draw_bound(circuit: Circuit, noise: NoiseModel) -> int:
    bound = 0
    for ins in circuit.instructions:
        if isinstance(ins, Measure):
            bound += 2 if noise.readout_flip_q > 0 else 1
        elif noise.depolarizing_p > 0:
            bound += 4 if isinstance(ins, CNOT) else 2
    return max(bound, 1)


def _trajectory(circuit, state, stream, noise) -> tuple[list, StateVector]:
    bits = [0] * circuit.n_classical_bits
    p, q = noise.depolarizing_p, noise.readout_flip_q
    for ins in circuit.instructions:
        if isinstance(ins, Measure):
            bit, state = measure_collapse(state, ins.qubit, stream.random())
            if q > 0 and stream.random() < q:
                bit ^= 1
            bits[ins.cbit] = bit
        elif isinstance(ins, Gate1):
            state = apply_noise(_apply_gate(state, ins.gate, ins.target), (ins.target,), p, stream)
        elif isinstance(ins, CNOT):
            state = qcore.apply_cnot(state, ins.control, ins.target)
            state = apply_noise(state, (ins.control, ins.target), p, stream)
        elif isinstance(ins, CondGate1):
            if bits[ins.cbit] == ins.value:
                state = apply_noise(_apply_gate(state, ins.gate, ins.target), (ins.target,), p, stream)
    return bits, state


def _steps(circuit: Circuit, p: float) -> list[tuple]:
    """Flatten a circuit into primitive steps, with one noise step per touched qubit."""
    steps = []
    for ins in circuit.instructions:
        if isinstance(ins, Measure):
            steps.append(("measure", ins.qubit, ins.cbit))
        elif isinstance(ins, Gate1):
            steps.append(("gate", ins.gate, ins.target))
            if p > 0:
                steps.append(("noise", ins.target, None))
        elif isinstance(ins, CNOT):
            steps.append(("cnot", ins.control, ins.target))
            if p > 0:
                steps += [("noise", ins.control, None), ("noise", ins.target, None)]
        elif isinstance(ins, CondGate1):
            cond = (ins.cbit, ins.value)
            steps.append(("cond", ins.gate, ins.target, cond))
            if p > 0:
                steps.append(("noise", ins.target, cond))
    return steps


class _DecisionTree:
    """Lazily built trie of trajectory states keyed by random decisions.

    A trajectory's state depends only on its sequence of decisions
    (measurement outcome and recorded bit, Pauli error or none), so each
    distinct prefix is simulated once and shared by every shot that follows
    it. Draw order and arithmetic match :func:`_trajectory` exactly.
    """

    def __init__(self, circuit: Circuit, initial: StateVector, noise: NoiseModel):
        self.p = noise.depolarizing_p
        self.q = noise.readout_flip_q
        self.steps = _steps(circuit, self.p)
        self.root = self._node(0, initial, (0,) * circuit.n_classical_bits)

    def _node(self, idx, state, bits):
        steps = self.steps
        while idx < len(steps):
            step = steps[idx]
            kind = step[0]
            if kind == "gate":
                state = _apply_gate(state, step[1], step[2])
            elif kind == "cnot":
                state = qcore.apply_cnot(state, step[1], step[2])
            elif kind == "cond":
                cbit, value = step[3]
                state = conditional_apply(state, step[1], step[2], bits[cbit], value)
            elif kind == "noise" and step[2] is not None and bits[step[2][0]] != step[2][1]:
                pass
            else:
                break
            idx += 1
        p0 = None
        if idx < len(steps) and steps[idx][0] == "measure":
            qubit = steps[idx][1]
            p0 = _project(state, qubit, 0)[0]
            if _project(state, qubit, 1)[0] == 0.0:
                p0 = math.inf
        # [step index, state, bits, P(0) at a measurement, children]
        return [idx, state, bits, p0, {}]

    def _child(self, node, key):
        idx, state, bits, p0, children = node
        step = self.steps[idx]
        if step[0] == "measure":
            bit, recorded = key
            _, post = measure_collapse(state, step[1], 0.0 if bit == 0 else p0)
            cbit = step[2]
            new_bits = bits[:cbit] + (recorded,) + bits[cbit + 1 :]
            child = self._node(idx + 1, post, new_bits)
        else:
            if key >= 0:
                state = qcore.apply_1q(state, qcore.standard_gate(PAULIS[key]), step[1])
            child = self._node(idx + 1, state, bits)
        children[key] = child
        return child

    def run(self, stream) -> tuple[tuple, StateVector]:
        node = self.root
        end = len(self.steps)
        while node[0] < end:
            if node[3] is not None:
                bit = 0 if stream.random() < node[3] else 1
                recorded = bit ^ 1 if (self.q > 0 and stream.random() < self.q) else bit
                key = (bit, recorded)
            else:
                key = stream.integers(3) if stream.random() < self.p else -1
            child = node[4].get(key)
            node = child if child is not None else self._child(node, key)
        return node[2], node[1]


def _run_range(circuit, cfg, initial, start, stop):
    noise = cfg.noise or NoiseModel()
    rows = uniforms(cfg.seed, np.arange(start, stop), np.arange(_draw_bound(circuit, noise)))
    tree = _DecisionTree(circuit, initial, noise)
    out = []
    for offset, shot in enumerate(range(start, stop)):
        bits, state = tree.run(ShotStream(cfg.seed, shot, rows[offset]))
        out.append(Trajectory("".join(map(str, bits)), state))
    return out


def _chunks(shots: int, workers: int):
    workers = max(1, min(workers, shots))
    edges = np.linspace(0, shots, workers + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        return 1
    if workers == 0:
        return os.cpu_count() or 1
    if workers < 0:
        raise ValueError(f"workers must be non-negative, got {workers}")
    return int(workers)


def run_trajectories(
    circuit: Circuit,
    cfg: RunConfig,
    initial_state: StateVector | None = None,
    workers: int | None = None,
) -> list[Trajectory]:
    """Run ``cfg.shots`` independent trajectories; results are ordered by shot index.

    ``workers`` splits the shot range across threads (0 means one per CPU);
    the result does not depend on it.
    """
    validate(circuit)
    initial = _initial(circuit, initial_state)
    chunks = _chunks(cfg.shots, _resolve_workers(workers))
    if len(chunks) == 1:
        return _run_range(circuit, cfg, initial, *chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = pool.map(lambda ab: _run_range(circuit, cfg, initial, *ab), chunks)
        return [t for part in parts for t in part]


def run_shots(
    circuit: Circuit,
    cfg: RunConfig,
    initial_state: StateVector | None = None,
    workers: int | None = None,
) -> Histogram:
    trajectories = run_trajectories(circuit, cfg, initial_state, workers)
    counts = Counter(t.bits for t in trajectories)
    return Histogram(circuit.n_classical_bits, dict(counts), cfg.shots)


def post_select(h: Histogram, constraints: dict) -> Histogram:
    """Keep only shots whose classical bits match ``constraints`` (bit index -> value)."""
    for bit, value in constraints.items():
        if not isinstance(bit, (int, np.integer)) or not 0 <= bit < h.n_bits:
            raise KeyError(f"unknown classical bit {bit!r} (histogram has {h.n_bits} bits)")
        if value not in (0, 1):
            raise ValueError(f"required value for bit {bit} must be 0 or 1, got {value!r}")
    kept = {
        key: count
        for key, count in h.counts.items()
        if all(key[bit] == str(value) for bit, value in constraints.items())
    }
    return Histogram(h.n_bits, kept, sum(kept.values()))

"""Ready-made circuits and experiment drivers: state preparation, Bell/GHZ
generation and three-qubit teleportation.

Teleportation register layout: qubit 0 holds the input state, qubit 1 is
Alice's half of the Bell pair and qubit 2 is Bob's. Classical bit 0 holds
the measurement of qubit 0, bit 1 that of qubit 1 and bit 2 Bob's result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qcore
from .circuit import CNOT, Circuit, CondGate1, Gate1, Measure
from .qcore import BlochVector, StateVector
from .simulator import (
    Branch,
    Histogram,
    RunConfig,
    enumerate_branches,
    post_select,
    run_analytic,
    run_shots,
    run_trajectories,
)

__all__ = [
    "PREP_THETA",
    "MODES",
    "OUTCOMES",
    "AliceOutcome",
    "OutcomeStats",
    "PrepReport",
    "TeleportReport",
    "prep_state",
    "prep_circuit",
    "bell_circuit",
    "ghz_circuit",
    "correction_gate",
    "teleport_circuit",
    "teleport_fidelity",
    "run_prep_experiment",
    "run_teleport_experiment",
]

PREP_THETA = math.pi / 4
MODES = ("postselect", "feedforward")

INPUT, ALICE, BOB = 0, 1, 2


@dataclass(frozen=True, order=True)
class AliceOutcome:
    m_i: int
    m_a: int

    def __str__(self) -> str:
        return f"{self.m_i}{self.m_a}"


OUTCOMES = tuple(AliceOutcome(a, b) for a in (0, 1) for b in (0, 1))

_CORRECTIONS = {(0, 0): "I", (0, 1): "X", (1, 0): "Z", (1, 1): "Y"}


def prep_state() -> StateVector:
    """cos(pi/8)|0> + sin(pi/8)|1>, the teleported state without its global phase."""
    return StateVector([math.cos(PREP_THETA / 2), math.sin(PREP_THETA / 2)])


def prep_circuit(measure: bool = True) -> Circuit:
    gates = [Gate1(g, 0) for g in ("H", "T", "H", "S")]
    if measure:
        gates.append(Measure(0, 0))
    return Circuit(1, gates)


def bell_circuit(measure: bool = False) -> Circuit:
    ins = [Gate1("H", 0), CNOT(0, 1)]
    if measure:
        ins += [Measure(0, 0), Measure(1, 1)]
    return Circuit(2, ins)


def ghz_circuit(n: int, measure: bool = False) -> Circuit:
    if isinstance(n, bool) or not isinstance(n, int) or not 3 <= n <= 5:
        raise ValueError(f"GHZ circuits are defined for 3 to 5 qubits, got {n!r}")
    ins = [Gate1("H", 0)] + [CNOT(q, q + 1) for q in range(n - 1)]
    if measure:
        ins += [Measure(q, q) for q in range(n)]
    return Circuit(n, ins)


def correction_gate(o: AliceOutcome) -> str:
    """Gate Bob applies after Alice reports ``o``."""
    return _CORRECTIONS[(o.m_i, o.m_a)]


def teleport_circuit(mode: str = "postselect", prepare: bool = True, measure_bob: bool = True) -> Circuit:
    """Three-qubit teleportation circuit.

    ``feedforward`` appends X on Bob conditioned on Alice's qubit result and
    Z conditioned on the input qubit result (together: I, X, Z or ZX = iY).
    ``postselect`` leaves Bob uncorrected; the correction is applied in the
    analysis. ``prepare=False`` drops the H, T, H, S preparation so an
    arbitrary input state can be injected on qubit 0.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    ins = []
    if prepare:
        ins += [Gate1(g, INPUT) for g in ("H", "T", "H", "S")]
    ins += [
        Gate1("H", ALICE),
        CNOT(ALICE, BOB),
        CNOT(INPUT, ALICE),
        Gate1("H", INPUT),
        Measure(INPUT, 0),
        Measure(ALICE, 1),
    ]
    if mode == "feedforward":
        ins += [CondGate1("X", BOB, 1, 1), CondGate1("Z", BOB, 0, 1)]
    if measure_bob:
        ins.append(Measure(BOB, 2))
    return Circuit(3, ins, n_classical_bits=3)


def _inject(state: StateVector) -> StateVector:
    return qcore.tensor(state, qcore.basis_state("00"))


def _corrected_bob(branch, mode: str) -> qcore.DensityMatrix:
    rho = qcore.partial_trace(qcore.density_from_state(branch.state), BOB)
    if mode == "postselect":
        g = qcore.standard_gate(correction_gate(AliceOutcome(branch.bits[0], branch.bits[1]))).matrix
        rho = qcore.DensityMatrix(g @ rho.elems @ g.conj().T)
    return rho


def teleport_fidelity(
    mode: str = "feedforward",
    state: StateVector | None = None,
    cfg: RunConfig | None = None,
    workers: int | None = None,
) -> float:
    """Fidelity of Bob's final state with the input state.

    Exact branch enumeration when ``cfg`` is None, otherwise the
    trajectory average under ``cfg`` (noise included). In ``postselect``
    mode the correction is applied to Bob's state in the analysis.
    ``state`` defaults to the prepared state; anything else is injected.
    """
    if state is None:
        circuit = teleport_circuit(mode, measure_bob=False)
        initial, target = None, prep_state()
    else:
        circuit = teleport_circuit(mode, prepare=False, measure_bob=False)
        initial, target = _inject(state), state
    if cfg is None:
        items = enumerate_branches(circuit, initial)
        weights = [b.probability for b in items]
        acc = sum(w * _corrected_bob(b, mode).elems for w, b in zip(weights, items)) / sum(weights)
    else:
        # shots sharing a decision prefix share the state object; summing in
        # shot order keeps the result independent of the worker schedule
        cache: dict = {}
        acc = np.zeros((2, 2), dtype=complex)
        trajectories = run_trajectories(circuit, cfg, initial, workers)
        for t in trajectories:
            key = (id(t.state), t.bits)
            if key not in cache:
                cache[key] = _corrected_bob(Branch(1.0, tuple(int(c) for c in t.bits), t.state), mode).elems
            acc = acc + cache[key]
        acc = acc / len(trajectories)
    rho = qcore.DensityMatrix((acc + acc.conj().T) / 2)
    return qcore.fidelity_pure(target, rho)


@dataclass
class PrepReport:
    shots: int
    p0: float
    p1: float
    theory_p0: float
    theory_p1: float
    bloch: BlochVector
    counts: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "shots": self.shots,
            "counts": dict(self.counts),
            "p0": self.p0,
            "p1": self.p1,
            "theory_p0": self.theory_p0,
            "theory_p1": self.theory_p1,
            "bloch": {"x": self.bloch.x, "y": self.bloch.y, "z": self.bloch.z},
        }


def run_prep_experiment(cfg: RunConfig | None = None, workers: int | None = None) -> PrepReport:
    """Sample the prepared state in the Z basis; exact populations when ``cfg`` is None."""
    circuit = prep_circuit()
    theory = run_analytic(circuit).probabilities
    unmeasured = run_analytic(prep_circuit(measure=False)).state
    bloch = qcore.bloch_vector(qcore.density_from_state(unmeasured))
    if cfg is None:
        return PrepReport(0, float(theory[0]), float(theory[1]), float(theory[0]), float(theory[1]), bloch)
    hist = run_shots(circuit, cfg, workers=workers)
    p0 = hist.frequency("0")
    return PrepReport(hist.shots, p0, 1.0 - p0, float(theory[0]), float(theory[1]), bloch, hist.counts)


@dataclass
class OutcomeStats:
    correction: str
    probability: float
    p_alpha: float | None
    p_beta: float | None
    count: int | None = None

    def as_dict(self) -> dict:
        return {
            "count": self.count,
            "probability": self.probability,
            "p_alpha": self.p_alpha,
            "p_beta": self.p_beta,
            "correction": self.correction,
        }


@dataclass
class TeleportReport:
    """Bob's Z populations conditioned on each of Alice's outcomes.

    ``p_alpha`` is the frequency of Bob's result that corresponds to the
    |0> component of the input after correction. ``shots`` is 0 for
    an exact (analytic) report, in which case counts are None.
    """

    mode: str
    shots: int
    per_outcome: dict
    fidelity_analytic: float
    theory_p_alpha: float
    theory_p_beta: float
    fidelity_trajectory: float | None = None
    histogram: Histogram | None = None

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "shots": self.shots,
            "per_outcome": {str(o): s.as_dict() for o, s in sorted(self.per_outcome.items())},
            "fidelity_analytic": self.fidelity_analytic,
            "fidelity_trajectory": self.fidelity_trajectory,
            "theory_p_alpha": self.theory_p_alpha,
            "theory_p_beta": self.theory_p_beta,
            "counts": dict(self.histogram.counts) if self.histogram is not None else None,
        }


def _bob_alpha_value(mode: str, outcome: AliceOutcome) -> int:
    # X and Y corrections swap Bob's 0/1 labels; I and Z leave them alone
    if mode == "postselect" and correction_gate(outcome) in ("X", "Y"):
        return 1
    return 0


def run_teleport_experiment(
    mode: str = "postselect",
    cfg: RunConfig | None = None,
    workers: int | None = None,
) -> TeleportReport:
    """Run the teleportation circuit and condition Bob's statistics on Alice's outcome.

    Exact when ``cfg`` is None, otherwise sampled for ``cfg.shots`` shots.
    """
    circuit = teleport_circuit(mode)
    target = qcore.probabilities(prep_state())
    fidelity = teleport_fidelity(mode)

    per_outcome = {}
    hist = None
    if cfg is None:
        dist = run_analytic(circuit).probabilities.reshape(2, 2, 2)
        for o in OUTCOMES:
            p_outcome = float(dist[o.m_i, o.m_a].sum())
            alpha_bit = _bob_alpha_value(mode, o)
            p_alpha = float(dist[o.m_i, o.m_a, alpha_bit] / p_outcome)
            per_outcome[o] = OutcomeStats(correction_gate(o), p_outcome, p_alpha, 1.0 - p_alpha)
        shots, traj_fidelity = 0, None
    else:
        hist = run_shots(circuit, cfg, workers=workers)
        for o in OUTCOMES:
            sub = post_select(hist, {0: o.m_i, 1: o.m_a})
            counts = sub.marginal(BOB)
            alpha_bit = _bob_alpha_value(mode, o)
            if sub.shots:
                p_alpha = counts[alpha_bit] / sub.shots
                p_beta = counts[1 - alpha_bit] / sub.shots
            else:
                p_alpha = p_beta = None
            per_outcome[o] = OutcomeStats(correction_gate(o), sub.shots / hist.shots, p_alpha, p_beta, sub.shots)
        shots = hist.shots
        traj_fidelity = teleport_fidelity(mode, cfg=cfg, workers=workers)

    return TeleportReport(
        mode=mode,
        shots=shots,
        per_outcome=per_outcome,
        fidelity_analytic=fidelity,
        theory_p_alpha=float(target[0]),
        theory_p_beta=float(target[1]),
        fidelity_trajectory=traj_fidelity,
        histogram=hist,
    )

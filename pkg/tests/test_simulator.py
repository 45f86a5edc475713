import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qteleport import protocols
from qteleport.circuit import CNOT, Circuit, CondGate1, Gate1, Measure, ParseError
from qteleport.qcore import StateVector, basis_state, equal_up_to_global_phase
from qteleport.rng import ShotStream
from qteleport.simulator import (
    Histogram,
    NoiseModel,
    RunConfig,
    _trajectory,
    apply_noise,
    conditional_apply,
    enumerate_branches,
    measure_collapse,
    post_select,
    run_analytic,
    run_shots,
    run_trajectories,
    zero_state,
)

from . import oracles

COS2 = math.cos(math.pi / 8) ** 2
SIN2 = math.sin(math.pi / 8) ** 2


class ForcedRng:
    """Stand-in generator: every draw triggers an error and picks Pauli ``index``."""

    def __init__(self, index):
        self.index = index

    def random(self):
        return 0.0

    def integers(self, high):
        return self.index


def test_run_analytic_prep():
    state, probs = run_analytic(protocols.prep_circuit())
    assert state is None
    assert probs == pytest.approx([COS2, SIN2], abs=1e-12)


def test_run_analytic_measure_only():
    _, probs = run_analytic(Circuit(1, [Measure(0, 0)]))
    assert probs.tolist() == [1.0, 0.0]


def test_run_analytic_without_measurement_returns_state():
    state, probs = run_analytic(protocols.bell_circuit())
    assert probs.tolist() == [1.0]
    assert np.allclose(state.amps, [oracles.S2, 0, 0, oracles.S2], atol=1e-15)


def test_run_analytic_teleport_outcomes_are_quarter():
    probs = run_analytic(protocols.teleport_circuit("postselect")).probabilities.reshape(2, 2, 2)
    assert probs.sum(axis=2) == pytest.approx(np.full((2, 2), 0.25), abs=1e-12)
    assert probs.sum() == pytest.approx(1, abs=1e-10)


def test_run_analytic_rejects_malformed():
    with pytest.raises(ParseError):
        run_analytic(Circuit(1, [Gate1("H", 3)]))


def test_branches_agree_with_dense_oracle():
    for circuit in (protocols.teleport_circuit("feedforward"), protocols.teleport_circuit("postselect")):
        ours = enumerate_branches(circuit)
        ref = oracles.dense_branches(circuit)
        assert len(ours) == len(ref)
        for b, (p, bits, vec) in zip(ours, ref):
            assert list(b.bits) == bits
            assert b.probability == pytest.approx(p, abs=1e-12)
            assert np.max(np.abs(b.state.amps - vec)) <= 1e-12


def test_measure_collapse_examples():
    for u in (0.0, 0.5, 0.999):
        bit, post = measure_collapse(basis_state("1"), 0, u)
        assert bit == 1 and np.array_equal(post.amps, [0, 1])
    bell = StateVector([oracles.S2, 0, 0, oracles.S2])
    bit, post = measure_collapse(bell, 0, 0.3)
    assert bit == 0 and np.allclose(post.amps, [1, 0, 0, 0])
    bit, post = measure_collapse(bell, 0, 0.5)
    assert bit == 1 and np.allclose(post.amps, [0, 0, 0, 1])


def test_measure_collapse_on_after_cnot_state_gives_alpha_and_beta_branches():
    v = StateVector(oracles.after_cnot_state(oracles.ALPHA, oracles.BETA))
    bit, post = measure_collapse(v, 0, 0.0)
    assert bit == 0
    assert np.allclose(post.amps, [oracles.S2, 0, 0, oracles.S2, 0, 0, 0, 0], atol=1e-12)
    bit, post = measure_collapse(v, 0, 0.99)
    assert bit == 1
    assert np.allclose(post.amps, [0, 0, 0, 0, 0, oracles.S2, oracles.S2, 0], atol=1e-12)


def test_measure_collapse_is_deterministic_and_checks_index():
    s = StateVector(oracles.prep_amplitudes_phase_form())
    assert measure_collapse(s, 0, 0.9)[0] == measure_collapse(s, 0, 0.9)[0] == 1
    with pytest.raises(IndexError):
        measure_collapse(s, 1, 0.5)


def test_apply_noise_examples():
    s = StateVector(oracles.prep_amplitudes_phase_form())
    assert apply_noise(s, [0], 0.0, ForcedRng(0)) is s
    assert np.array_equal(apply_noise(basis_state("0"), [0], 1.0, ForcedRng(0)).amps, [0, 1])
    with pytest.raises(ValueError):
        apply_noise(s, [0], 1.5, ForcedRng(0))


def test_noise_raises_prep_population_of_one():
    base = run_analytic(protocols.prep_circuit()).probabilities[1]
    noise = NoiseModel(depolarizing_p=0.05)
    mean = np.mean([run_shots(protocols.prep_circuit(), RunConfig(8192, s, noise)).frequency("1") for s in range(10)])
    assert mean > base


def test_conditional_apply_examples():
    s = StateVector(oracles.prep_amplitudes_phase_form())
    assert conditional_apply(s, "X", 0, 0, 1) is s
    assert np.array_equal(conditional_apply(basis_state("0"), "X", 0, 1, 1).amps, [0, 1])
    with pytest.raises(ValueError):
        conditional_apply(basis_state("00"), "CNOT", 0, 1, 1)


def test_feedforward_branches_recover_input():
    for b in enumerate_branches(protocols.teleport_circuit("feedforward", measure_bob=False)):
        bob = b.state.amps.reshape(4, 2)[2 * b.bits[0] + b.bits[1]]
        assert equal_up_to_global_phase(StateVector(bob), protocols.prep_state(), 1e-12)


# sampling


def test_run_shots_prep():
    h = run_shots(protocols.prep_circuit(), RunConfig(8192, 11))
    assert set(h.counts) == {"0", "1"}
    assert abs(h.frequency("0") - 0.8536) <= 0.02


def test_run_shots_deterministic_outcome():
    h = run_shots(Circuit(1, [Gate1("X", 0), Measure(0, 0)]), RunConfig(100, 3))
    assert h.counts == {"1": 100}


def test_run_shots_teleport_outcomes():
    h = run_shots(protocols.teleport_circuit("feedforward"), RunConfig(8192, 5))
    for o in protocols.OUTCOMES:
        n = post_select(h, {0: o.m_i, 1: o.m_a}).shots
        assert abs(n / 8192 - 0.25) <= 0.02


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_shots_independent_of_workers(workers):
    cfg = RunConfig(2000, 77, NoiseModel(0.05, 0.03))
    c = protocols.teleport_circuit("feedforward")
    assert run_shots(c, cfg, workers=workers) == run_shots(c, cfg)


def test_same_config_same_histogram_and_seed_matters():
    c = protocols.teleport_circuit("postselect")
    assert run_shots(c, RunConfig(3000, 1)) == run_shots(c, RunConfig(3000, 1))
    assert run_shots(c, RunConfig(3000, 1)) != run_shots(c, RunConfig(3000, 2))


@pytest.mark.parametrize("noise", [None, NoiseModel(0.1, 0.0), NoiseModel(0.0, 0.2), NoiseModel(0.3, 0.1)])
def test_memoized_trajectories_match_direct_simulation(noise):
    c = protocols.teleport_circuit("feedforward")
    cfg = RunConfig(600, 2024, noise)
    fast = run_trajectories(c, cfg)
    for shot, traj in enumerate(fast):
        bits, state = _trajectory(c, zero_state(3), ShotStream(2024, shot), noise or NoiseModel())
        assert "".join(map(str, bits)) == traj.bits
        assert np.array_equal(state.amps, traj.state.amps)


def test_trajectory_norm_after_every_instruction():
    c = protocols.teleport_circuit("feedforward")
    noise = NoiseModel(0.2, 0.1)
    for shot in range(50):
        prefix = []
        for ins in c.instructions:
            prefix.append(ins)
            sub = Circuit(3, prefix, n_classical_bits=3)
            _, state = _trajectory(sub, zero_state(3), ShotStream(8, shot), noise)
            assert abs(np.linalg.norm(state.amps) - 1) <= 1e-10


def _five_sigma_ok(circuit, seed):
    exact = run_analytic(circuit).probabilities
    h = run_shots(circuit, RunConfig(8192, seed))
    width = circuit.n_classical_bits
    for k, p in enumerate(exact):
        freq = h.frequency(format(k, f"0{width}b"))
        assert abs(freq - p) <= 5 * oracles.binomial_sigma(p, 8192) + 1e-12


@pytest.mark.parametrize(
    "circuit",
    [
        protocols.prep_circuit(),
        protocols.bell_circuit(measure=True),
        protocols.ghz_circuit(3, measure=True),
        protocols.teleport_circuit("postselect"),
        protocols.teleport_circuit("feedforward"),
    ],
    ids=["prep", "bell", "ghz3", "teleport-ps", "teleport-ff"],
)
def test_sampled_agrees_with_analytic(circuit):
    _five_sigma_ok(circuit, 1234)


def test_readout_noise_flips_recorded_bits():
    h = run_shots(Circuit(1, [Measure(0, 0)]), RunConfig(4000, 3, NoiseModel(readout_flip_q=1.0)))
    assert h.counts == {"1": 4000}
    h = run_shots(Circuit(1, [Measure(0, 0)]), RunConfig(8000, 3, NoiseModel(readout_flip_q=0.25)))
    assert abs(h.frequency("1") - 0.25) <= 5 * oracles.binomial_sigma(0.25, 8000)


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(0, 1)
    with pytest.raises(ValueError):
        RunConfig(10, -1)
    with pytest.raises(ValueError):
        NoiseModel(depolarizing_p=1.5)
    with pytest.raises(ValueError):
        NoiseModel(readout_flip_q=-0.1)


# post-selection


def test_post_select_examples():
    h = Histogram(2, {"00": 50, "01": 50})
    assert post_select(h, {0: 0}) == h
    h = Histogram(3, {"000": 2048, "011": 2048, "101": 2048, "110": 2048})
    out = post_select(h, {0: 0, 1: 1})
    assert out.counts == {"011": 2048} and out.shots == 2048


def test_post_select_empty_and_errors():
    h = Histogram(2, {"00": 10})
    assert post_select(h, {0: 1}).shots == 0
    with pytest.raises(KeyError):
        post_select(h, {2: 0})


def test_post_select_teleport_matches_conditional_theory():
    h = run_shots(protocols.teleport_circuit("postselect"), RunConfig(8192, 9))
    sub = post_select(h, {0: 1, 1: 0})
    zeros, ones = sub.marginal(2)
    assert abs(zeros / sub.shots - COS2) <= 0.03
    assert abs(ones / sub.shots - SIN2) <= 0.03


@settings(max_examples=50, deadline=None)
@given(
    counts=st.dictionaries(st.text("01", min_size=3, max_size=3), st.integers(0, 1000), max_size=8),
    bits=st.lists(st.integers(0, 2), min_size=1, max_size=3, unique=True),
)
def test_post_select_partition_conserves_shots(counts, bits):
    h = Histogram(3, counts)
    total = 0
    for values in np.ndindex(*([2] * len(bits))):
        total += post_select(h, dict(zip(bits, values))).shots
    assert total == h.shots


def test_histogram_checks_totals():
    with pytest.raises(ValueError):
        Histogram(1, {"0": 3}, shots=4)
    with pytest.raises(ValueError):
        Histogram(2, {"0": 3})


def test_initial_state_injection_size_checked():
    with pytest.raises(ValueError):
        run_analytic(Circuit(2, [Gate1("H", 0)]), basis_state("0"))


def test_enumerate_handles_remeasurement():
    c = Circuit(1, [Gate1("H", 0), Measure(0, 0), Measure(0, 1)])
    probs = run_analytic(c).probabilities
    assert probs == pytest.approx([0.5, 0, 0, 0.5], abs=1e-12)


def test_conditional_on_uncorrelated_qubit():
    c = Circuit(2, [Gate1("H", 0), Measure(0, 0), CondGate1("X", 1, 0, 1), Measure(1, 1)])
    assert run_analytic(c).probabilities == pytest.approx([0.5, 0, 0, 0.5], abs=1e-12)
    assert oracles.dense_distribution(c) == pytest.approx([0.5, 0, 0, 0.5], abs=1e-12)


def test_cnot_chain_circuits_sample():
    c = Circuit(2, [Gate1("X", 0), CNOT(0, 1), Measure(0, 0), Measure(1, 1)])
    assert run_shots(c, RunConfig(10, 0)).counts == {"11": 10}


def test_forced_pauli_choices():
    for index, expected in enumerate(([0, 1], [0, 1j], [1, 0])):
        out = apply_noise(basis_state("0"), [0], 1.0, ForcedRng(index)).amps
        assert np.allclose(out, expected)

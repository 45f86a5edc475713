"""Independent reference computations used to check the simulator.

Everything here works on plain numpy arrays with full 2^n x 2^n operators
built from Kronecker products; nothing calls the package's kernels.
"""

import cmath
import math
from functools import reduce

import numpy as np

from qteleport.circuit import CNOT, CondGate1, Gate1, Measure

S2 = 1 / math.sqrt(2)
MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[S2, S2], [S2, -S2]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, cmath.exp(1j * math.pi / 4)]], dtype=complex),
}

ALPHA = math.cos(math.pi / 8)
BETA = math.sin(math.pi / 8)


def full_1q(u, target, n):
    """1 x ... x U x ... x 1 with U on tensor factor ``target`` (leftmost = 0)."""
    factors = [np.eye(2, dtype=complex)] * n
    factors[target] = np.asarray(u, dtype=complex)
    return reduce(np.kron, factors)


def full_cnot(control, target, n):
    """Permutation matrix of CNOT built from basis-index bit arithmetic."""
    dim = 2**n
    m = np.zeros((dim, dim), dtype=complex)
    for k in range(dim):
        bits = [(k >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        j = int("".join(map(str, bits)), 2)
        m[j, k] = 1
    return m


def projector(qubit, bit, n):
    p = np.zeros((2, 2), dtype=complex)
    p[bit, bit] = 1
    return full_1q(p, qubit, n)


def dense_branches(circuit, initial=None):
    """Branch enumeration by dense operators and projectors: list of (prob, bits, vector)."""
    n = circuit.n_qubits
    if initial is None:
        initial = np.zeros(2**n, dtype=complex)
        initial[0] = 1
    branches = [(1.0, [0] * circuit.n_classical_bits, np.asarray(initial, dtype=complex))]
    for ins in circuit.instructions:
        nxt = []
        for prob, bits, vec in branches:
            if isinstance(ins, Gate1):
                nxt.append((prob, bits, full_1q(MATS[ins.gate], ins.target, n) @ vec))
            elif isinstance(ins, CNOT):
                nxt.append((prob, bits, full_cnot(ins.control, ins.target, n) @ vec))
            elif isinstance(ins, CondGate1):
                if bits[ins.cbit] == ins.value:
                    vec = full_1q(MATS[ins.gate], ins.target, n) @ vec
                nxt.append((prob, bits, vec))
            elif isinstance(ins, Measure):
                for b in (0, 1):
                    proj = projector(ins.qubit, b, n) @ vec
                    p = float(np.vdot(proj, proj).real)
                    if p > 1e-24:
                        nb = list(bits)
                        nb[ins.cbit] = b
                        nxt.append((prob * p, nb, proj / math.sqrt(p)))
        branches = nxt
    return branches


def dense_distribution(circuit, initial=None):
    probs = np.zeros(2**circuit.n_classical_bits)
    for p, bits, _ in dense_branches(circuit, initial):
        probs[int("".join(map(str, bits)) or "0", 2)] += p
    return probs


def brute_partial_trace(rho, keep, n):
    """Reduced 2x2 matrix by explicit summation over all other qubits' basis values."""
    out = np.zeros((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2**n):
                for m in range(2**n):
                    bk = (k >> (n - 1 - keep)) & 1
                    bm = (m >> (n - 1 - keep)) & 1
                    rest_k = [(k >> (n - 1 - q)) & 1 for q in range(n) if q != keep]
                    rest_m = [(m >> (n - 1 - q)) & 1 for q in range(n) if q != keep]
                    if bk == i and bm == j and rest_k == rest_m:
                        out[i, j] += rho[k, m]
    return out


def prep_amplitudes_expanded():
    """((1 + e^{i pi/4}) / 2, i (1 - e^{i pi/4}) / 2): the four-gate result before simplification."""
    w = cmath.exp(1j * math.pi / 4)
    return np.array([(1 + w) / 2, 1j * (1 - w) / 2])


def prep_amplitudes_phase_form():
    """e^{i pi/8} (cos(pi/8), sin(pi/8))."""
    phase = cmath.exp(1j * math.pi / 8)
    return phase * np.array([math.cos(math.pi / 8), math.sin(math.pi / 8)])


def after_hadamard_state(alpha, beta):
    """Three-qubit teleport state after Alice's CNOT and Hadamard, prefactor 1/2 per branch.

    Index order (i, A, B), qubit i leftmost.
    """
    v = np.zeros(8, dtype=complex)
    branches = {
        (0, 0): (alpha, beta),
        (0, 1): (beta, alpha),
        (1, 0): (alpha, -beta),
        (1, 1): (-beta, alpha),
    }
    for (i, a), (b0, b1) in branches.items():
        v[4 * i + 2 * a + 0] = b0 / 2
        v[4 * i + 2 * a + 1] = b1 / 2
    return v


def after_cnot_state(alpha, beta):
    """alpha/sqrt2 |0>(|00>+|11>) + beta/sqrt2 |1>(|10>+|01>)."""
    v = np.zeros(8, dtype=complex)
    v[0b000] = v[0b011] = alpha * S2
    v[0b110] = v[0b101] = beta * S2
    return v


def binomial_sigma(p, n):
    return math.sqrt(p * (1 - p) / n)


def philox4x32_scalar(ctr, key, rounds=10):
    """Straight-line scalar Philox4x32 with Python ints."""
    m0, m1, w0, w1, mask = 0xD2511F53, 0xCD9E8D57, 0x9E3779B9, 0xBB67AE85, 0xFFFFFFFF
    c = list(ctr)
    k = list(key)
    for _ in range(rounds):
        p0 = c[0] * m0
        p1 = c[2] * m1
        c = [((p1 >> 32) ^ c[1] ^ k[0]) & mask, p1 & mask, ((p0 >> 32) ^ c[3] ^ k[1]) & mask, p0 & mask]
        k = [(k[0] + w0) & mask, (k[1] + w1) & mask]
    return c

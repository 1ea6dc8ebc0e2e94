import itertools
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mitbench.circuit import PAULI_MATRICES, Circuit, Gate, embed

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ONE_Q = ("X", "SX", "SXdg", "H", "S", "Sdg", "Z", "T", "Tdg")


def random_circuit(n, n_gates, rng, kinds=ONE_Q + ("Rz", "CX"), measured=False):
    """Random circuit over ``kinds``; two-qubit kinds need ``n >= 2``."""
    gates = []
    for _ in range(n_gates):
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind in ("CX", "SWAP") and n < 2:
            kind = "H"
        if kind in ("CX", "SWAP"):
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(Gate(kind, (int(a), int(b))))
        elif kind == "Rz":
            gates.append(Gate.rz(int(rng.integers(n)), float(rng.uniform(0, 2 * math.pi))))
        else:
            gates.append(Gate(kind, (int(rng.integers(n)),)))
    return Circuit(n, tuple(gates), measured)


def clifford_t_circuit(n, n_gates, rng, n_cx=None):
    """Clifford+T circuit; ``n_cx`` fixes the number of CX gates when given."""
    kinds = ("H", "S", "Sdg", "T", "Tdg", "X", "Z", "SX")
    gates = []
    cx_slots = set(rng.choice(n_gates, size=n_cx, replace=False).tolist()) if n_cx is not None else None
    for k in range(n_gates):
        use_cx = (k in cx_slots) if cx_slots is not None else rng.random() < 0.3
        if use_cx and n >= 2:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(Gate("CX", (int(a), int(b))))
        else:
            gates.append(Gate(kinds[int(rng.integers(len(kinds)))], (int(rng.integers(n)),)))
    return Circuit(n, tuple(gates))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(n, rng):
    a = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def pauli_twirl(rho, p, qubits, n):
    """``(1−p)ρ + p·4^{-k} Σ_P PρP`` over Paulis on ``qubits``."""
    acc = np.zeros_like(rho)
    for letters in itertools.product("IXYZ", repeat=len(qubits)):
        m = np.ones((1, 1))
        for ch in letters:
            m = np.kron(m, PAULI_MATRICES[ch])
        big = embed(m, qubits, n)
        acc += big @ rho @ big.conj().T
    return (1 - p) * rho + p * acc / 4 ** len(qubits)


def thermal_kraus(rho, q, n, p_ad, coherence):
    """Amplitude-damping Kraus pair followed by a Z-dephasing mixture."""
    k0 = np.array([[1, 0], [0, np.sqrt(1 - p_ad)]])
    k1 = np.array([[0, np.sqrt(p_ad)], [0, 0]])
    out = sum(embed(k, (q,), n) @ rho @ embed(k, (q,), n).conj().T for k in (k0, k1))
    f = coherence / np.sqrt(1 - p_ad)
    z = embed(PAULI_MATRICES["Z"], (q,), n)
    return 0.5 * (1 + f) * out + 0.5 * (1 - f) * z @ out @ z


def kraus_density_matrix(c, nm):
    """Dense reference for local-mode noise: unitary, twirl, then relaxation per gate."""
    n = c.n_qubits
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1
    for g in c.gates:
        u = embed(g.to_matrix(), g.qubits, n)
        rho = u @ rho @ u.conj().T
        p = nm.p1 if g.n_qubits == 1 else nm.p2
        rho = pauli_twirl(rho, p, g.qubits, n)
        if nm.thermal is not None:
            dur = nm.thermal.dur1 if g.n_qubits == 1 else nm.thermal.dur2
            for q in g.qubits:
                rho = thermal_kraus(rho, q, n, *nm.thermal.params(q, dur))
    return rho


def benchmark_circuits(kind, n, d, count, seed=0):
    """Compiled filtered benchmark circuits with the moved ``Z⊗n`` observable."""
    from mitbench.benchmark import CircuitClass, sample_filtered_circuits
    from mitbench.circuit import PauliOperator, ibm_7q_target
    from mitbench.synthesis import compile_circuit

    out = []
    for c in sample_filtered_circuits(CircuitClass(kind), n, d, count, seed=seed):
        cc = compile_circuit(c.with_measurement(False), ibm_7q_target())
        out.append((cc, PauliOperator.z_all(n).permuted(cc.meta["final_layout"])))
    return out

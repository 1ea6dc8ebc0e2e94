import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from conftest import random_circuit
from mitbench.circuit import (
    Circuit,
    Gate,
    PauliOperator,
    PauliString,
    Target,
    build_pauli_gadget,
    canonical_angle,
    dumps,
    equal_up_to_phase,
    ibm_7q_target,
    invert,
    loads,
    measurement_circuit,
    mirror,
    unitary_of,
)
from mitbench.errors import InvalidInputError, ResourceError
from mitbench.simulator import ideal_expectation
from mitbench.synthesis import _u3_gates

CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def gadget_oracle(letters, alpha):
    return expm(1j * alpha * PauliString(letters).to_matrix())


class TestGate:
    def test_rz_angle_canonical(self):
        assert Gate.rz(0, -0.5).angle == pytest.approx(2 * math.pi - 0.5)
        assert Gate.rz(0, 2 * math.pi).angle == 0.0
        assert Gate.rz(0, 7.0).angle == pytest.approx(7.0 - 2 * math.pi)

    @given(st.floats(-50, 50, allow_nan=False))
    def test_canonical_angle_range(self, theta):
        a = canonical_angle(theta)
        assert 0.0 <= a < 2 * math.pi
        assert math.isclose(math.cos(a), math.cos(theta), abs_tol=1e-9)
        assert math.isclose(math.sin(a), math.sin(theta), abs_tol=1e-9)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(kind="CX", qubits=(0, 0)),
            dict(kind="H", qubits=(0, 1)),
            dict(kind="Rz", qubits=(0,)),
            dict(kind="H", qubits=(0,), angle=0.1),
            dict(kind="Foo", qubits=(0,)),
            dict(kind="U2q", qubits=(0, 1), matrix=tuple([1.0] * 16)),
        ],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(InvalidInputError):
            Gate(**kwargs)

    def test_u2q_unitarity_tolerance(self):
        u = np.eye(4, dtype=complex)
        u[0, 0] += 1e-12
        Gate.u2q(0, 1, u)
        u[0, 0] += 1e-8
        with pytest.raises(InvalidInputError):
            Gate.u2q(0, 1, u)

    @pytest.mark.parametrize("kind", ["X", "SX", "SXdg", "H", "S", "Sdg", "Z", "T", "Tdg"])
    def test_inverse_fixed(self, kind):
        g = Gate(kind, (0,))
        assert np.allclose(g.inverse().to_matrix() @ g.to_matrix(), np.eye(2), atol=1e-12)

    def test_is_clifford(self):
        assert Gate.rz(0, math.pi / 2).is_clifford()
        assert not Gate.rz(0, 0.3).is_clifford()
        assert not Gate("T", (0,)).is_clifford()
        assert Gate("H", (0,)).is_clifford()
        assert not Gate.u2q(0, 1, np.eye(4)).is_clifford()


class TestCircuit:
    def test_rejects_out_of_range(self):
        with pytest.raises(InvalidInputError):
            Circuit(2, (Gate("H", (2,)),))

    def test_compose_after_measurement(self):
        with pytest.raises(InvalidInputError):
            Circuit(1, (), True) + Circuit(1)

    def test_counts(self):
        c = Circuit(2, (Gate("H", (0,)), Gate("CX", (0, 1)), Gate.rz(1, 0.2)))
        assert (c.n_one_qubit, c.n_two_qubit, c.count("CX"), len(c)) == (2, 1, 1, 3)


class TestUnitaryOf:
    def test_empty_is_identity(self):
        assert np.array_equal(unitary_of(Circuit(2)), np.eye(4))

    def test_x(self):
        assert np.allclose(unitary_of(Circuit(1, (Gate("X", (0,)),))), [[0, 1], [1, 0]])

    def test_cx_textbook(self):
        assert np.allclose(unitary_of(Circuit(2, (Gate("CX", (0, 1)),))), CX)

    def test_cx_reversed_control(self):
        u = unitary_of(Circuit(2, (Gate("CX", (1, 0)),)))
        swap = np.eye(4)[[0, 2, 1, 3]]
        assert np.allclose(u, swap @ CX @ swap)

    def test_big_endian_embedding(self):
        u = unitary_of(Circuit(2, (Gate("X", (0,)),)))
        assert np.allclose(u, np.kron([[0, 1], [1, 0]], np.eye(2)))

    def test_width_limit(self):
        with pytest.raises(ResourceError):
            unitary_of(Circuit(11))

    def test_measured_rejected(self):
        with pytest.raises(InvalidInputError):
            unitary_of(Circuit(1, (), True))


class TestInvert:
    def test_empty(self):
        assert invert(Circuit(3)) == Circuit(3)

    def test_rz(self):
        inv = invert(Circuit(1, (Gate.rz(0, 0.7),)))
        assert inv == Circuit(1, (Gate.rz(0, -0.7),))

    def test_measured_rejected(self):
        with pytest.raises(InvalidInputError):
            invert(Circuit(1, (), True))

    def test_random_three_qubit(self, rng):
        c = random_circuit(3, 10, rng)
        assert equal_up_to_phase(unitary_of(invert(c)) @ unitary_of(c), np.eye(8), 1e-10)

    @given(st.integers(1, 4), st.integers(0, 20), st.integers(0, 2**32 - 1))
    def test_round_trip_property(self, n, n_gates, seed):
        c = random_circuit(n, n_gates, np.random.default_rng(seed))
        assert equal_up_to_phase(unitary_of(mirror(c)), np.eye(2**n), 1e-9)


class TestPauliGadget:
    def test_zero_angle(self):
        assert equal_up_to_phase(unitary_of(build_pauli_gadget("Z", 0.0)), np.eye(2))

    def test_x_quarter_turn(self):
        c = build_pauli_gadget("X", math.pi / 4)
        assert ideal_expectation(c, PauliOperator("Z")) == pytest.approx(0.0, abs=1e-12)

    def test_zz(self):
        assert equal_up_to_phase(unitary_of(build_pauli_gadget("ZZ", 0.3)), gadget_oracle("ZZ", 0.3), 1e-10)

    @pytest.mark.parametrize("letters", ["".join(p) for p in itertools.product("IXYZ", repeat=2)])
    @pytest.mark.parametrize("alpha", [0.0, 0.3, math.pi / 2, math.pi])
    def test_all_two_letter_strings(self, letters, alpha):
        u = unitary_of(build_pauli_gadget(letters, alpha))
        assert equal_up_to_phase(u, gadget_oracle(letters, alpha), 1e-10)

    def test_gate_set(self):
        c = build_pauli_gadget("XYZI", 0.4)
        assert {g.kind for g in c} <= {"H", "S", "Sdg", "CX", "Rz"}
        assert all(3 not in g.qubits for g in c)

    def test_identity_string_is_empty(self):
        assert len(build_pauli_gadget("II", 0.4)) == 0

    def test_empty_string(self):
        with pytest.raises(InvalidInputError):
            build_pauli_gadget("", 0.4)


class TestPauliOperator:
    def test_duplicates_rejected(self):
        with pytest.raises(InvalidInputError):
            PauliOperator([("ZZ", 1.0), ("ZZ", 2.0)])

    def test_mixed_widths_rejected(self):
        with pytest.raises(InvalidInputError):
            PauliOperator({"Z": 1.0, "ZZ": 1.0})

    def test_permuted(self):
        assert PauliOperator("XYZ").permuted((2, 0, 1)) == PauliOperator("YZX")

    def test_matrix(self):
        o = PauliOperator({"ZI": 0.5, "IX": 2.0})
        ref = 0.5 * np.kron(np.diag([1, -1]), np.eye(2)) + 2.0 * np.kron(np.eye(2), [[0, 1], [1, 0]])
        assert np.allclose(o.to_matrix(), ref)


class TestTarget:
    def test_disconnected_rejected(self):
        with pytest.raises(InvalidInputError):
            Target(frozenset({(0, 1), (2, 3)}))

    def test_ibm_7q(self):
        t = ibm_7q_target()
        assert t.physical_qubits == tuple(range(7))
        assert t.is_universal
        assert t.neighbours(1) == [0, 2, 3]
        assert t.coupled(5, 3) and not t.coupled(0, 2)


class TestMeasurementCircuit:
    def test_basis_change(self):
        c = measurement_circuit(Circuit(3), "XYZ")
        assert [g.kind for g in c] == ["H", "Sdg", "H"]
        assert c.measured and c.meta["basis_gates"] == 3


gates_strategy = st.lists(
    st.one_of(
        st.tuples(st.sampled_from(["H", "SX", "T", "X"]), st.integers(0, 2)),
        st.tuples(st.just("Rz"), st.integers(0, 2), st.floats(-10, 10, allow_nan=False)),
        st.tuples(st.just("CX"), st.permutations([0, 1, 2])),
    ),
    max_size=15,
)


def _build(spec, measured, with_u2q, seed):
    gates = []
    for item in spec:
        if item[0] == "Rz":
            gates.append(Gate.rz(item[1], item[2]))
        elif item[0] == "CX":
            gates.append(Gate("CX", tuple(item[1][:2])))
        else:
            gates.append(Gate(item[0], (item[1],)))
    if with_u2q:
        q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(4, 4)) + 1j)
        gates.append(Gate.u2q(2, 0, q))
    return Circuit(3, tuple(gates), measured)


class TestSerialization:
    @given(gates_strategy, st.booleans(), st.booleans(), st.integers(0, 1000))
    def test_round_trip_bit_exact(self, spec, measured, with_u2q, seed):
        c = _build(spec, measured, with_u2q, seed)
        text = dumps(c)
        back = loads(text)
        assert back == c
        assert dumps(back) == text

    def test_format(self):
        c = Circuit(2, (Gate("H", (0,)), Gate("CX", (0, 1)), Gate.rz(1, 0.5)), True)
        assert dumps(c) == "qubits 2 measured 1\nH 0\nCX 0 1\nRz 1 0.5\n"

    @pytest.mark.parametrize(
        "text",
        ["", "qubits x measured 0\n", "qubits 1 measured 0\nFOO 0\n", "qubits 1 measured 0\nU2q 0 1 m0\n"],
    )
    def test_malformed(self, text):
        with pytest.raises(InvalidInputError):
            loads(text)


def test_u3_helper_matches_euler():
    # Rz·SX·Rz·SX·Rz form used by the rebase; checked against the textbook U3.
    theta, phi, lam = 0.3, 1.1, -0.4
    u3 = np.array(
        [
            [math.cos(theta / 2), -np.exp(1j * lam) * math.sin(theta / 2)],
            [np.exp(1j * phi) * math.sin(theta / 2), np.exp(1j * (phi + lam)) * math.cos(theta / 2)],
        ]
    )
    c = Circuit(1, tuple(_u3_gates(0, theta, phi, lam)))
    assert equal_up_to_phase(unitary_of(c), u3, 1e-12)

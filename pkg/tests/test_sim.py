import numpy as np
import pytest

from optswap.circuit import Circuit
from optswap.gates import Gate, GateKind, gate_matrix
from optswap.sim import (
    MeasurementUnsupported,
    TooManyQubits,
    apply_gate,
    circuit_unitary,
    equivalent_up_to_permutation,
    permute_state,
    random_product_state,
    simulate,
    states_match,
    zero_state,
)

from conftest import haar_unitary


def cx(a, b):
    return Gate(GateKind.CX, (a, b))


def test_x_flips_zero():
    out = simulate(Circuit(1, (Gate(GateKind.X, (0,)),)))
    assert np.allclose(out, [0, 1])


def test_cx_control_fires():
    state = zero_state(2)
    state[0], state[1] = 0, 1  # |01> with q0 set
    out = simulate(Circuit(2, (cx(0, 1),)), state)
    assert np.argmax(np.abs(out)) == 3


def test_bell_state():
    out = simulate(Circuit(2, (Gate(GateKind.H, (0,)), cx(0, 1))))
    assert np.allclose(out, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_simulate_agrees_with_dense_matrices(rng):
    """Gate application by tensor contraction matches explicit kron embedding."""
    n = 3
    eye = np.eye(2, dtype=complex)
    for _ in range(40):
        kind = rng.choice(
            [GateKind.H, GateKind.SX, GateKind.RZ, GateKind.U3, GateKind.CX,
             GateKind.CY, GateKind.CZ, GateKind.CRX, GateKind.SWAP]
        )
        params = {
            GateKind.RZ: (float(rng.uniform(-3, 3)),),
            GateKind.U3: tuple(rng.uniform(-3, 3, size=3)),
            GateKind.CRX: (float(rng.uniform(-3, 3)),),
        }.get(kind, ())
        qubits = tuple(int(q) for q in rng.permutation(n)[: 2 if kind in
                       (GateKind.CX, GateKind.CY, GateKind.CZ, GateKind.CRX,
                        GateKind.SWAP) else 1])
        gate = Gate(kind, qubits, params)
        state = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        state /= np.linalg.norm(state)

        # dense reference: little-endian kron embedding
        m = gate_matrix(gate)
        if gate.num_qubits == 1:
            ops = [eye] * n
            ops[gate.qubits[0]] = m
            dense = ops[2]
            for op in (ops[1], ops[0]):
                dense = np.kron(dense, op)
        else:
            dense = np.zeros((8, 8), dtype=complex)
            for idx_in in range(8):
                bits = [(idx_in >> q) & 1 for q in range(n)]
                local_in = bits[gate.qubits[0]] + 2 * bits[gate.qubits[1]]
                for local_out in range(4):
                    amp = m[local_out, local_in]
                    if amp == 0:
                        continue
                    out_bits = list(bits)
                    out_bits[gate.qubits[0]] = local_out & 1
                    out_bits[gate.qubits[1]] = (local_out >> 1) & 1
                    idx_out = sum(b << q for q, b in enumerate(out_bits))
                    dense[idx_out, idx_in] += amp
        expected = dense @ state
        got = apply_gate(state, gate, n)
        assert np.max(np.abs(got - expected)) < 1e-10


def test_norm_preserved(rng):
    gates = tuple(
        Gate(GateKind.U3, (int(rng.integers(0, 3)),), tuple(rng.uniform(-3, 3, 3)))
        for _ in range(30)
    )
    out = simulate(Circuit(3, gates))
    assert abs(np.linalg.norm(out) - 1) < 1e-10


def test_limits():
    with pytest.raises(TooManyQubits):
        simulate(Circuit(15, ()))
    with pytest.raises(MeasurementUnsupported):
        simulate(Circuit(1, (Gate(GateKind.MEASURE, (0,), clbit=0),), num_clbits=1))


def test_states_match_phase_insensitive():
    a = np.array([1, 1j]) / np.sqrt(2)
    assert states_match(a, np.exp(0.7j) * a)
    assert not states_match(a, np.array([1, -1j]) / np.sqrt(2))


def test_permute_state_moves_bits():
    # logical 0 -> wire 1: amplitude of |q0=1> moves to index with bit 1 set
    state = zero_state(2)
    state[:] = [0, 1, 0, 0]
    out = permute_state(state, [1, 0])
    assert np.allclose(out, [0, 0, 1, 0])


def test_equivalence_identity_and_relabeling():
    single = Circuit(2, (cx(0, 1),))
    assert equivalent_up_to_permutation(single, single, [0, 1])
    # pure relabeling: logical 0 lives on wire 1 from start to finish
    flipped = Circuit(2, (cx(1, 0),))
    assert equivalent_up_to_permutation(single, flipped, [1, 0], [1, 0])
    assert not equivalent_up_to_permutation(single, flipped, [0, 1])


def test_equivalence_with_initial_layout():
    # b computes the same CX but expects logical 0 to enter on wire 1
    a = Circuit(2, (Gate(GateKind.RZ, (0,), (0.7,)), cx(0, 1)))
    b = Circuit(2, (Gate(GateKind.RZ, (1,), (0.7,)), cx(1, 0)))
    assert equivalent_up_to_permutation(a, b, [1, 0], [1, 0])
    assert not equivalent_up_to_permutation(a, b, [0, 1], [0, 1])


def test_fig1_style_routing_equivalence():
    # one SWAP inserted by hand, final permutation exchanges qubits 0 and 1
    a = Circuit(3, (cx(0, 1), cx(0, 2)))
    b = Circuit(3, (cx(0, 1), Gate(GateKind.SWAP, (0, 1)), cx(1, 2)))
    assert equivalent_up_to_permutation(a, b, [1, 0, 2])


def test_random_product_state_is_normalized(rng):
    psi = random_product_state(4, rng)
    assert abs(np.linalg.norm(psi) - 1) < 1e-12


def test_circuit_unitary_matches_simulation(rng):
    gates = (Gate(GateKind.H, (0,)), cx(0, 1), Gate(GateKind.RZ, (1,), (0.4,)))
    circ = Circuit(2, gates)
    u = circuit_unitary(circ)
    state = rng.normal(size=4) + 1j * rng.normal(size=4)
    state /= np.linalg.norm(state)
    assert np.allclose(u @ state, simulate(circ, state), atol=1e-12)

"""Small-scale statevector simulation and equivalence checking.

The simulator is the semantics oracle for every transformation in the
package: passes and routers are trusted only as far as these checks go.
Little-endian throughout (qubit 0 is the least significant bit).
"""

from __future__ import annotations

import numpy as np

from .circuit import Circuit
from .gates import Gate, GateKind, gate_matrix

MAX_QUBITS = 14
_NORM_TOL = 1e-10


class SimulationError(ValueError):
    pass


class TooManyQubits(SimulationError):
    pass


class MeasurementUnsupported(SimulationError):
    pass


def zero_state(num_qubits: int) -> np.ndarray:
    state = np.zeros(2**num_qubits, dtype=complex)
    state[0] = 1.0
    return state


def apply_gate(state: np.ndarray, gate: Gate, num_qubits: int) -> np.ndarray:
    """Apply one gate to a statevector (returns a new array)."""
    if gate.kind is GateKind.BARRIER:
        return state
    m = gate_matrix(gate)
    tensor = state.reshape([2] * num_qubits)
    if gate.num_qubits == 1:
        ax = num_qubits - 1 - gate.qubits[0]
        tensor = np.tensordot(m, tensor, axes=([1], [ax]))
        tensor = np.moveaxis(tensor, 0, ax)
    else:
        a, b = gate.qubits
        ax_a, ax_b = num_qubits - 1 - a, num_qubits - 1 - b
        # local index = bit(a) + 2*bit(b): reshape m to [b_out, a_out, b_in, a_in]
        m4 = m.reshape(2, 2, 2, 2)
        tensor = np.tensordot(m4, tensor, axes=([2, 3], [ax_b, ax_a]))
        tensor = np.moveaxis(tensor, [0, 1], [ax_b, ax_a])
    return np.ascontiguousarray(tensor).reshape(-1)


def simulate(circuit: Circuit, initial: np.ndarray | None = None) -> np.ndarray:
    if circuit.num_qubits > MAX_QUBITS:
        raise TooManyQubits(f"{circuit.num_qubits} qubits exceeds the oracle limit")
    if any(g.kind is GateKind.MEASURE for g in circuit.gates):
        raise MeasurementUnsupported("simulate does not support measurement")
    n = circuit.num_qubits
    state = zero_state(n) if initial is None else np.asarray(initial, dtype=complex)
    if state.shape != (2**n,):
        raise SimulationError("initial state has wrong dimension")
    for gate in circuit.gates:
        state = apply_gate(state, gate, n)
    norm = np.linalg.norm(state)
    assert abs(norm - 1.0) < _NORM_TOL, f"statevector norm drifted to {norm}"
    return state


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of a measurement-free circuit (intended for <= 6 qubits)."""
    n = circuit.num_qubits
    dim = 2**n
    u = np.eye(dim, dtype=complex)
    for k in range(dim):
        u[:, k] = _apply_all(circuit, u[:, k].copy())
    return u


def _apply_all(circuit: Circuit, state: np.ndarray) -> np.ndarray:
    for gate in circuit.gates:
        if gate.kind is GateKind.MEASURE:
            raise MeasurementUnsupported("unitary of a measuring circuit")
        state = apply_gate(state, gate, circuit.num_qubits)
    return state


def strip_measurements(circuit: Circuit) -> Circuit:
    return circuit.with_gates(
        g for g in circuit.gates if g.kind not in (GateKind.MEASURE, GateKind.BARRIER)
    )


def normalize_phase(state: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Divide out the phase of the first significant amplitude."""
    idx = np.argmax(np.abs(state) > tol * max(1.0, float(np.max(np.abs(state)))))
    amp = state[idx]
    if abs(amp) < tol:
        return state
    return state * (abs(amp) / amp)


def states_match(a: np.ndarray, b: np.ndarray, tol: float = 1e-8) -> bool:
    """Amplitude-wise equality up to one global phase."""
    return bool(np.allclose(normalize_phase(a), normalize_phase(b), atol=tol))


def permute_state(state: np.ndarray, log_to_phys: list[int]) -> np.ndarray:
    """Relabel qubits: output bit log_to_phys[l] carries input bit l."""
    n = len(log_to_phys)
    assert state.shape == (2**n,)
    src = np.arange(2**n, dtype=np.int64)
    dst = np.zeros_like(src)
    for l, p in enumerate(log_to_phys):
        dst |= ((src >> l) & 1) << p
    out = np.empty_like(state)
    out[dst] = state
    return out


def random_product_state(num_qubits: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random single-qubit states, one per qubit."""
    state = np.array([1.0], dtype=complex)
    for _ in range(num_qubits):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        state = np.kron(v, state)  # new qubit becomes the most significant bit
    return state


def equivalent_up_to_permutation(
    a: Circuit,
    b: Circuit,
    log_to_phys: list[int],
    initial_log_to_phys: list[int] | None = None,
    trials: int = 20,
    seed: int = 20220,
    tol: float = 1e-8,
) -> bool:
    """True iff b on physical qubits equals a relabeled by log_to_phys.

    Checked on the all-zeros input and on `trials` seeded Haar-random product
    states.  Measurements and barriers are ignored; b may act on more qubits
    than a (idle logical padding is added).  When the router placed logical
    qubit l on wire initial_log_to_phys[l] at circuit start, pass that map as
    well; it defaults to the identity placement.
    """
    a = strip_measurements(a)
    b = strip_measurements(b)
    n = b.num_qubits
    if a.num_qubits > n:
        return False
    if n > MAX_QUBITS:
        raise TooManyQubits(f"{n} qubits exceeds the oracle limit")
    if sorted(log_to_phys) != list(range(n)):
        raise SimulationError("permutation must be a bijection over physical qubits")
    initial = initial_log_to_phys if initial_log_to_phys is not None else list(range(n))
    if sorted(initial) != list(range(n)):
        raise SimulationError("initial permutation must be a bijection")
    a_padded = Circuit(n, a.gates, a.num_clbits)

    rng = np.random.default_rng(seed)
    inputs = [zero_state(n)]
    inputs += [random_product_state(n, rng) for _ in range(trials)]
    for state in inputs:
        out_a = simulate(a_padded, state)
        out_b = simulate(b, permute_state(state, initial))
        if not states_match(permute_state(out_a, log_to_phys), out_b, tol):
            return False
    return True

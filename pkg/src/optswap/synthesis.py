"""Two-qubit block collection and SU(4) re-synthesis.

A block's 4x4 unitary lives in the "pair frame" of its qubits (a, b): local
index = bit(a) + 2*bit(b).  Re-synthesis follows the standard magic-basis
construction: the minimal CNOT count comes from trace/spectrum conditions on
gamma(u) = u u^T with u expressed in the magic basis, and the emitted circuit
uses the matching 0/1/2/3-CNOT template.  Internally the math runs in a frame
whose wire 0 is the most significant bit; `_W0`/`_W1` map back to (b, a).

Degenerate spectra can break the simultaneous diagonalization used to extract
the single-qubit prefactors, so synthesis retries with random local dressings
(folded back into the emitted gates) before giving up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .circuit import Circuit
from .dag import CircuitDag
from .gates import (
    Gate,
    GateKind,
    SWAP_MATRIX,
    gate_matrix,
    is_identity_up_to_phase,
    u3_gate_from_matrix,
)

_TOL = 1e-8


class SynthesisError(ValueError):
    pass


class NotUnitary(SynthesisError):
    pass


class SynthesisResidual(SynthesisError):
    """Reassembly mismatch above tolerance: internal bug signal."""


# Magic (Bell) basis and fixed two-qubit matrices in the internal frame
# (wire 0 = most significant bit).
_E = np.array(
    [[1, 1j, 0, 0], [0, 0, 1j, 1], [0, 0, 1j, -1], [1, -1j, 0, 0]], dtype=complex
) / math.sqrt(2)
_EDAG = _E.conj().T

_CNOT01 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_CNOT10 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)
_SWAP4 = SWAP_MATRIX.astype(complex)

_S_SX = np.array(
    [
        [0.5 + 0.5j, 0.5 - 0.5j, 0, 0],
        [0.5 - 0.5j, 0.5 + 0.5j, 0, 0],
        [0, 0, -0.5 + 0.5j, 0.5 + 0.5j],
        [0, 0, 0.5 + 0.5j, -0.5 + 0.5j],
    ],
    dtype=complex,
)

# Constants for the 1-CNOT case: v = magic-basis image of SWAP*CNOT01 and an
# SO(4) diagonalizer of v v^T.
_V_ONE_CNOT = np.array(
    [
        [0.5, 0.5j, 0.5j, -0.5],
        [-0.5j, 0.5, -0.5, -0.5j],
        [-0.5j, -0.5, 0.5, -0.5j],
        [0.5, -0.5j, -0.5j, -0.5],
    ],
    dtype=complex,
)
_Q_ONE_CNOT = np.array(
    [[-1, 0, -1, 0], [0, 1, 0, 1], [0, 1, 0, -1], [1, 0, -1, 0]], dtype=complex
) / math.sqrt(2)

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Magic-basis diagonals of XX, YY, ZZ (they are simultaneously diagonal there).
_INTERACTION_DIAGS = np.column_stack(
    [
        np.real(np.diag(_EDAG @ np.kron(p, p) @ _E))
        for p in (_PAULI_X, _PAULI_Y, _PAULI_Z)
    ]
)

_W0, _W1 = 0, 1  # internal wire names; _W0 maps to the pair's second qubit


def _rx(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t):
    return np.array([[np.exp(-0.5j * t), 0], [0, np.exp(0.5j * t)]], dtype=complex)


_S_MAT = np.array([[1, 0], [0, 1j]], dtype=complex)
_SX_MAT = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)


def _check_unitary(u: np.ndarray, tol: float = 1e-9):
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4) or not np.allclose(u @ u.conj().T, np.eye(4), atol=tol):
        raise NotUnitary("expected a 4x4 unitary matrix")
    return u


def to_su4(u: np.ndarray) -> np.ndarray:
    det = np.linalg.det(u)
    return u * np.exp(-1j * np.angle(det) / 4)


def _gamma(u_su4: np.ndarray) -> np.ndarray:
    m = _EDAG @ u_su4 @ _E
    return m @ m.T


def min_cnot_count(u: np.ndarray) -> int:
    """Minimal CNOTs to synthesize u with arbitrary single-qubit gates.

    Classified through gamma(u): the local class has gamma = +-identity, the
    single-CNOT class has tr gamma = 0 with gamma^2 = -identity, and a real
    trace marks the two-CNOT class.  All tests are linearly sensitive to the
    distance from the class, so a nearly-but-not-exactly local gate (e.g. a
    controlled phase of 1e-5 rad) is still classified by its true cost.
    """
    u = _check_unitary(u)
    gamma = _gamma(to_su4(u))
    tr = complex(np.trace(gamma))
    eye = np.eye(4)
    sign = 1.0 if tr.real >= 0 else -1.0
    if np.max(np.abs(gamma - sign * eye)) < 1e-9:
        return 0
    if abs(tr) < 4e-9 and np.max(np.abs(gamma @ gamma + eye)) < 1e-8:
        return 1
    if abs(tr.imag) < 4e-9:
        return 2
    return 3


# -- single-qubit tensor extraction and prefactors ---------------------------


def _su2su2_factors(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split u = A (x) B with A, B in SU(2) (u must be such a product)."""
    c1, c2 = u[0:2, 0:2], u[0:2, 2:4]
    c3, c4 = u[2:4, 0:2], u[2:4, 2:4]
    a1 = np.sqrt(complex((c1 @ c4.conj().T)[0, 0]))
    a2 = np.sqrt(complex(-(c2 @ c3.conj().T)[0, 0]))
    if not np.isclose(a1 * np.conj(a2), (c1 @ c2.conj().T)[0, 0], atol=1e-8):
        a2 = -a2
    a = np.array([[a1, a2], [-np.conj(a2), np.conj(a1)]], dtype=complex)
    if abs(a[0, 0]) > 1e-6:
        b = c1 / a[0, 0]
    else:
        b = c2 / a[0, 1]
    return a, b


def _so4_diagonalizer(sym: np.ndarray) -> np.ndarray:
    """Real orthogonal eigenbasis of a complex symmetric matrix, det fixed to +1."""
    _, p = np.linalg.eigh(np.real(sym) + np.imag(sym))
    return p @ np.diag([1, 1, 1, float(np.sign(np.linalg.det(p)))])


def _prefactors(u: np.ndarray, v: np.ndarray):
    """Find A, B, C, D in SU(2) with u = (A x B) v (C x D), both in SU(4)."""
    mu = _EDAG @ u @ _E
    mv = _EDAG @ v @ _E
    p = _so4_diagonalizer(mu @ mu.T)
    q = _so4_diagonalizer(mv @ mv.T)
    g = p @ q.T
    h = mv.conj().T @ g.T @ mu
    ab = _E @ g @ _EDAG
    cd = _E @ h @ _EDAG
    a, b = _su2su2_factors(ab)
    c, d = _su2su2_factors(cd)
    return a, b, c, d


# -- synthesis templates ------------------------------------------------------


def _ops_0(u):
    a, b = _su2su2_factors(to_su4(u))
    return [("1q", _W0, a), ("1q", _W1, b)]


def _ops_1(u):
    swap_u = np.exp(1j * math.pi / 4) * (_SWAP4 @ to_su4(u))
    mu = _EDAG @ swap_u @ _E
    p = _so4_diagonalizer(mu @ mu.T)
    g = p @ _Q_ONE_CNOT.T
    h = _V_ONE_CNOT.conj().T @ g.T @ mu
    ab = _E @ g @ _EDAG
    cd = _E @ h @ _EDAG
    a, b = _su2su2_factors(ab)
    c, d = _su2su2_factors(cd)
    return [
        ("1q", _W0, c),
        ("1q", _W1, d),
        ("cx", _W0, _W1),
        ("1q", _W1, a),
        ("1q", _W0, b),
    ]


def _ops_2(u):
    u_su4 = to_su4(u)
    evs = np.linalg.eigvals(_gamma(u_su4))
    if np.allclose(np.sort(np.real(evs)), [-1, -1, 1, 1], atol=1e-7):
        interior = [
            ("cx", _W1, _W0),
            ("1q", _W0, _S_MAT),
            ("1q", _W1, _SX_MAT),
            ("cx", _W1, _W0),
        ]
        inner = _S_SX
    else:
        x, y = np.angle(evs[0]), np.angle(evs[1])
        if np.isclose(x, -y, atol=1e-10):
            y = np.angle(evs[2])
        delta, phi = (x + y) / 2, (x - y) / 2
        interior = [
            ("cx", _W1, _W0),
            ("1q", _W0, _rz(delta)),
            ("1q", _W1, _rx(phi)),
            ("cx", _W1, _W0),
        ]
        inner = np.kron(_rz(delta), _rx(phi))
    v = _CNOT10 @ inner @ _CNOT10
    a, b, c, d = _prefactors(u_su4, v)
    return (
        [("1q", _W0, c), ("1q", _W1, d)]
        + interior
        + [("1q", _W0, a), ("1q", _W1, b)]
    )


def _ops_3(u):
    swap_u = np.exp(1j * math.pi / 4) * (_SWAP4 @ to_su4(u))
    evs = np.linalg.eigvals(_gamma(swap_u))
    x, y, z = sorted(np.angle(ev) for ev in evs)[:3]
    alpha, beta, delta = (x + y) / 2, (x + z) / 2, (z + y) / 2
    interior = [
        ("cx", _W1, _W0),
        ("1q", _W0, _rz(delta)),
        ("1q", _W1, _ry(beta)),
        ("cx", _W0, _W1),
        ("1q", _W1, _ry(alpha)),
        ("cx", _W1, _W0),
    ]
    v = np.eye(4, dtype=complex)
    for mat in (
        _CNOT10,
        np.kron(_rz(delta), _ry(beta)),
        _CNOT01,
        np.kron(np.eye(2), _ry(alpha)),
        _CNOT10,
        _SWAP4,
    ):
        v = mat @ v
    a, b, c, d = _prefactors(swap_u, v)
    return (
        [("1q", _W0, c), ("1q", _W1, d)]
        + interior
        + [("1q", _W1, a), ("1q", _W0, b)]
    )


def _ops_swap_times_local(u):
    """u is locally equivalent to SWAP: emit the ladder plus local cleanup."""
    rest = u @ _SWAP4  # u = rest @ SWAP with rest a tensor product
    a, b = _su2su2_factors(to_su4(rest))
    return [
        ("cx", _W0, _W1),
        ("cx", _W1, _W0),
        ("cx", _W0, _W1),
        ("1q", _W0, a),
        ("1q", _W1, b),
    ]


def _ops_to_circuit(ops, pair: tuple[int, int], num_qubits: int) -> Circuit:
    """Map internal wires to real qubits, merging consecutive 1q matrices."""
    qubit_of = {_W0: pair[1], _W1: pair[0]}
    gates: list[Gate] = []
    pending: dict[int, np.ndarray] = {}

    def flush(q):
        m = pending.pop(q, None)
        if m is not None and not is_identity_up_to_phase(m, 1e-12):
            gates.append(u3_gate_from_matrix(m, q))

    for op in ops:
        if op[0] == "1q":
            q = qubit_of[op[1]]
            pending[q] = op[2] @ pending.get(q, np.eye(2, dtype=complex))
        else:
            for q in (qubit_of[op[1]], qubit_of[op[2]]):
                flush(q)
            gates.append(Gate(GateKind.CX, (qubit_of[op[1]], qubit_of[op[2]])))
    for q in list(pending):
        flush(q)
    return Circuit(num_qubits, tuple(gates))


def pair_unitary(gates, pair: tuple[int, int]) -> np.ndarray:
    """Product of gate matrices in the pair frame of (a, b)."""
    a, b = pair
    u = np.eye(4, dtype=complex)
    for g in gates:
        m = gate_matrix(g)
        if g.num_qubits == 1:
            m4 = np.kron(np.eye(2), m) if g.qubits[0] == a else np.kron(m, np.eye(2))
        elif g.qubits == (a, b):
            m4 = m
        elif g.qubits == (b, a):
            m4 = _SWAP4 @ m @ _SWAP4
        else:
            raise SynthesisError(f"gate {g.kind.value}{g.qubits} outside pair {pair}")
        u = m4 @ u
    return u


def _random_local(rng) -> np.ndarray:
    v = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(v)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def kak_synthesize(u: np.ndarray, pair: tuple[int, int], num_qubits: int | None = None) -> Circuit:
    """Circuit on `pair` equal to u up to global phase, with minimal CNOTs."""
    u = _check_unitary(u)
    if num_qubits is None:
        num_qubits = max(pair) + 1
    count = min_cnot_count(u)
    builders = {0: _ops_0, 1: _ops_1, 2: _ops_2, 3: _ops_3}
    rng = np.random.default_rng(0x5EED)
    for attempt in range(24):
        if attempt == 0:
            left = right = np.eye(4, dtype=complex)
            target = u
        else:
            la, lb = _random_local(rng), _random_local(rng)
            ra, rb = _random_local(rng), _random_local(rng)
            left, right = np.kron(la, lb), np.kron(ra, rb)
            target = left @ u @ right
        try:
            if count == 3 and min_cnot_count(target @ _SWAP4) == 0:
                ops = _ops_swap_times_local(target)
            else:
                ops = builders[count](target)
        except (np.linalg.LinAlgError, FloatingPointError):
            continue
        # undo the dressing: u = left^† target right^†
        la_i, lb_i = _su2su2_factors(left.conj().T)
        ra_i, rb_i = _su2su2_factors(right.conj().T)
        full = (
            [("1q", _W0, ra_i), ("1q", _W1, rb_i)]
            + ops
            + [("1q", _W0, la_i), ("1q", _W1, lb_i)]
        )
        circ = _ops_to_circuit(full, pair, num_qubits)
        rebuilt = pair_unitary(circ.gates, pair)
        if _phase_distance(rebuilt, u) < _TOL:
            if circ.count(GateKind.CX) != count:
                raise SynthesisResidual(
                    f"emitted {circ.count(GateKind.CX)} CNOTs, expected {count}"
                )
            return circ
    raise SynthesisResidual("could not reach reassembly tolerance")


def _phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max-abs deviation between a and b after removing one global phase."""
    inner = np.trace(b.conj().T @ a)
    if abs(inner) < 1e-12:
        return float(np.max(np.abs(a - b)))
    return float(np.max(np.abs(a * (abs(inner) / inner) - b)))


# -- Weyl chamber coordinates -------------------------------------------------


@dataclass(frozen=True)
class KakDecomposition:
    pre_a: np.ndarray
    pre_b: np.ndarray
    post_a: np.ndarray
    post_b: np.ndarray
    weyl: tuple[float, float, float]
    global_phase: float


def _canonical_matrix(x: float, y: float, z: float) -> np.ndarray:
    """exp(i (x XX + y YY + z ZZ)) via the magic-basis diagonalization."""
    phases = _INTERACTION_DIAGS @ np.array([x, y, z])
    return _E @ np.diag(np.exp(1j * phases)) @ _EDAG


def _fold(c: float) -> float:
    """Into (-pi/4, pi/4] modulo the pi/2 shift symmetry."""
    c = (c + math.pi / 4) % (math.pi / 2) - math.pi / 4
    return math.pi / 4 if np.isclose(c, -math.pi / 4, atol=1e-12) else c


def _orbit(coords: tuple[float, float, float]) -> set[tuple[float, float, float]]:
    seen: set[tuple[float, float, float]] = set()
    frontier = [tuple(_fold(c) for c in coords)]
    while frontier:
        cur = frontier.pop()
        key = tuple(round(c, 10) for c in cur)
        if key in seen:
            continue
        seen.add(key)
        x, y, z = cur
        nxt = [p for p in permutations((x, y, z))]
        nxt += [(-x, -y, z), (-x, y, -z), (x, -y, -z)]
        for cand in nxt:
            folded = tuple(_fold(c) for c in cand)
            if tuple(round(c, 10) for c in folded) not in seen:
                frontier.append(folded)
    return seen


def weyl_coordinates(u: np.ndarray) -> tuple[float, float, float]:
    """Canonical interaction coefficients with pi/4 >= x >= y >= |z|."""
    u = _check_unitary(u)
    gamma = _gamma(to_su4(u))
    measured = np.angle(np.linalg.eigvals(gamma)) / 2.0
    raw = None
    best = math.inf
    for perm in permutations(range(4)):
        theta = measured[list(perm)]
        for shifts in product((-1.0, 0.0, 1.0), repeat=4):
            target = theta + math.pi * np.array(shifts)
            sol, res, _, _ = np.linalg.lstsq(_INTERACTION_DIAGS, target, rcond=None)
            err = float(np.linalg.norm(_INTERACTION_DIAGS @ sol - target))
            if err < best:
                best, raw = err, tuple(float(v) for v in sol)
            if best < 1e-9:
                break
        if best < 1e-9:
            break
    if raw is None or best > 1e-6:
        raise SynthesisResidual("could not solve for interaction coefficients")
    chamber = [
        c
        for c in _orbit(raw)
        if c[0] >= c[1] - 1e-10
        and c[1] >= abs(c[2]) - 1e-10
        and c[0] <= math.pi / 4 + 1e-10
    ]
    if not chamber:
        raise SynthesisResidual(f"no chamber representative for {raw}")
    coords = max(chamber)
    # Verify the representative is in the same local-equivalence class.  The
    # SU(4) normalization is only fixed up to a 4th root of unity, which flips
    # the sign of gamma, so compare spectra up to that sign (via characteristic
    # polynomials, which have no branch-cut trouble).
    evs_u = np.linalg.eigvals(gamma)
    evs_n = np.linalg.eigvals(_gamma(to_su4(_canonical_matrix(*coords))))
    if not any(
        np.allclose(np.poly(evs_u), np.poly(sign * evs_n), atol=1e-6)
        for sign in (1.0, -1.0)
    ):
        raise SynthesisResidual("chamber representative spectrum mismatch")
    return tuple(0.0 if abs(c) < 1e-12 else float(c) for c in coords)


def kak_decompose(u: np.ndarray) -> KakDecomposition:
    """u = e^{i phase} (post_b (x) post_a) N(weyl) (pre_b (x) pre_a) in the pair frame."""
    u = _check_unitary(u)
    coords = weyl_coordinates(u)
    n = _canonical_matrix(*coords)
    u_su4 = to_su4(u)
    rng = np.random.default_rng(0xCA11)
    for attempt in range(24):
        if attempt == 0:
            la = lb = ra = rb = np.eye(2, dtype=complex)
        else:
            la, lb, ra, rb = (_random_local(rng) for _ in range(4))
        dressed = np.kron(la, lb) @ u_su4 @ np.kron(ra, rb)
        try:
            a, b, c, d = _prefactors(to_su4(dressed), n)
        except np.linalg.LinAlgError:
            continue
        post_b, post_a = la.conj().T @ a, lb.conj().T @ b
        pre_b, pre_a = c @ ra.conj().T, d @ rb.conj().T
        rebuilt = np.kron(post_b, post_a) @ n @ np.kron(pre_b, pre_a)
        inner = np.trace(rebuilt.conj().T @ u)
        if abs(inner) < 1e-12:
            continue
        phase = float(np.angle(inner))
        if _phase_distance(rebuilt, u) < _TOL:
            return KakDecomposition(pre_a, pre_b, post_a, post_b, coords, phase)
    raise SynthesisResidual("could not extract local factors")


# -- block collection ---------------------------------------------------------


@dataclass
class TwoQubitBlock:
    block_id: int
    qubit_pair: tuple[int, int]
    node_ids: list[int]


def collect_blocks(dag: CircuitDag) -> list[TwoQubitBlock]:
    """Maximal uninterrupted runs on one qubit pair; annotates dag.block_id."""
    blocks: list[TwoQubitBlock] = []
    open_block: dict[int, TwoQubitBlock | None] = {}
    pending: dict[int, list[int]] = {}

    def close(q):
        open_block[q] = None

    for nid in dag.order:
        gate = dag.nodes[nid].gate
        if not gate.is_unitary_gate():
            for q in gate.qubits:
                close(q)
                pending.pop(q, None)
            continue
        if gate.num_qubits == 1:
            q = gate.qubits[0]
            blk = open_block.get(q)
            if blk is not None:
                blk.node_ids.append(nid)
            else:
                pending.setdefault(q, []).append(nid)
            continue
        a, b = gate.qubits
        blk_a, blk_b = open_block.get(a), open_block.get(b)
        if blk_a is not None and blk_a is blk_b:
            blk_a.node_ids.append(nid)
            continue
        close(a)
        close(b)
        members = sorted(pending.pop(a, []) + pending.pop(b, []))
        blk = TwoQubitBlock(len(blocks), (a, b), members + [nid])
        blocks.append(blk)
        open_block[a] = open_block[b] = blk

    dag.block_id.clear()
    for blk in blocks:
        for nid in blk.node_ids:
            dag.block_id[nid] = blk.block_id
    return blocks


def block_unitary(block: TwoQubitBlock, dag: CircuitDag) -> np.ndarray:
    gates = [dag.nodes[nid].gate for nid in block.node_ids]
    return pair_unitary(gates, block.qubit_pair)


def annotate_block_costs(dag: CircuitDag, blocks: list[TwoQubitBlock]) -> None:
    """Cache per-block CNOT counts with and without an appended SWAP, so the
    router's block predictor is a dictionary lookup."""
    dag.block_cx.clear()
    dag.block_cx_with_swap.clear()
    for blk in blocks:
        u = block_unitary(blk, dag)
        dag.block_cx[blk.block_id] = min_cnot_count(u)
        dag.block_cx_with_swap[blk.block_id] = min_cnot_count(_SWAP4 @ u)


def predict_c2q(dag: CircuitDag, pred_a: int | None, pred_b: int | None) -> int:
    """CNOT reduction if the candidate SWAP joins its predecessors' block.

    pred_a/pred_b are the DAG nodes immediately before the insertion point on
    the SWAP's two wires (None for inserted SWAPs or wire starts).  Non-zero
    only when both carry the same block annotation.
    """
    if pred_a is None or pred_b is None:
        return 0
    bid = dag.block_id.get(pred_a)
    if bid is None or dag.block_id.get(pred_b) != bid:
        return 0
    c_before = dag.block_cx[bid]
    c_after = dag.block_cx_with_swap[bid]
    return max(0, min(3, c_before + 3 - c_after))


# -- single-qubit run merging -------------------------------------------------


def merge_1q_runs(dag: CircuitDag) -> CircuitDag:
    """Fuse maximal runs of adjacent 1q gates on each wire into one u3.

    Runs of length >= 2 become a single u3 (dropped entirely when the product
    is the identity up to phase); lone identity-like gates are dropped too.
    """
    circuit = dag.to_circuit()
    consumed: set[int] = set()
    replacement: dict[int, Gate | None] = {}
    for q, wire in enumerate(dag.wires):
        run: list[int] = []
        for nid in wire + [None]:
            gate = dag.nodes[nid].gate if nid is not None else None
            if gate is not None and gate.num_qubits == 1 and gate.is_unitary_gate():
                run.append(nid)
                continue
            if run:
                _merge_run(dag, run, q, consumed, replacement)
                run = []
    gates = []
    for pos, nid in enumerate(dag.order):
        if nid in consumed:
            continue
        if nid in replacement:
            if replacement[nid] is not None:
                gates.append(replacement[nid])
            continue
        gates.append(dag.nodes[nid].gate)
    return CircuitDag(circuit.with_gates(gates))


def _merge_run(dag, run, qubit, consumed, replacement):
    if len(run) == 1:
        m = gate_matrix(dag.nodes[run[0]].gate)
        if is_identity_up_to_phase(m, 1e-10):
            replacement[run[0]] = None
        return
    m = np.eye(2, dtype=complex)
    for nid in run:
        m = gate_matrix(dag.nodes[nid].gate) @ m
    first = run[0]
    for nid in run[1:]:
        consumed.add(nid)
    if is_identity_up_to_phase(m, 1e-10):
        replacement[first] = None
    else:
        replacement[first] = u3_gate_from_matrix(m, qubit)

"""Gate set and dense matrices.

Single convention used everywhere: statevectors are little-endian (qubit 0 is
the least significant bit).  A two-qubit matrix on qubits (a, b) acts on the
local index ``bit(a) + 2*bit(b)``, i.e. the first listed qubit is the local
LSB.  This matches the usual little-endian circuit convention, so
``CX = [[1,0,0,0],[0,0,0,1],[0,0,1,0],[0,1,0,0]]`` has its control on the
first qubit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class GateKind(Enum):
    ID = "id"
    X = "x"
    SX = "sx"
    RZ = "rz"
    H = "h"
    Y = "y"
    Z = "z"
    U3 = "u3"
    CX = "cx"
    CY = "cy"
    CZ = "cz"
    CRX = "crx"
    SWAP = "swap"
    MEASURE = "measure"
    BARRIER = "barrier"


ONE_QUBIT_KINDS = frozenset(
    {GateKind.ID, GateKind.X, GateKind.SX, GateKind.RZ, GateKind.H,
     GateKind.Y, GateKind.Z, GateKind.U3}
)
TWO_QUBIT_KINDS = frozenset(
    {GateKind.CX, GateKind.CY, GateKind.CZ, GateKind.CRX, GateKind.SWAP}
)
SELF_INVERSE_KINDS = frozenset(
    {GateKind.H, GateKind.X, GateKind.Y, GateKind.Z,
     GateKind.CX, GateKind.CY, GateKind.CZ}
)

_PARAM_ARITY = {GateKind.RZ: 1, GateKind.U3: 3, GateKind.CRX: 1}


class GateError(ValueError):
    """Malformed gate (wrong arity, duplicate qubits, bad params)."""


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    clbit: int | None = None  # MEASURE only

    def __post_init__(self):
        if len(set(self.qubits)) != len(self.qubits):
            raise GateError(f"duplicate qubits in {self.kind.value}: {self.qubits}")
        expected = _PARAM_ARITY.get(self.kind, 0)
        if len(self.params) != expected:
            raise GateError(
                f"{self.kind.value} takes {expected} params, got {len(self.params)}"
            )
        if self.kind is GateKind.BARRIER:
            if not self.qubits:
                raise GateError("barrier needs at least one qubit")
        elif self.kind in TWO_QUBIT_KINDS:
            if len(self.qubits) != 2:
                raise GateError(f"{self.kind.value} is a two-qubit gate")
        else:
            if len(self.qubits) != 1:
                raise GateError(f"{self.kind.value} is a single-qubit gate")
        if self.kind is GateKind.MEASURE and self.clbit is None:
            raise GateError("measure needs a classical bit")

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    def is_unitary_gate(self) -> bool:
        return self.kind not in (GateKind.MEASURE, GateKind.BARRIER)

    def remapped(self, where: dict[int, int] | list[int]) -> "Gate":
        """Same gate on relabeled qubits."""
        qs = tuple(where[q] for q in self.qubits)
        return Gate(self.kind, qs, self.params, self.clbit)


_SQ2 = 1.0 / math.sqrt(2.0)

_FIXED_1Q = {
    GateKind.ID: np.eye(2, dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.H: np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    GateKind.SX: 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
}


def rz_matrix(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
    )


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


CX_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
)
SWAP_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def _controlled(u: np.ndarray) -> np.ndarray:
    """Control on local qubit 0 (LSB), target on local qubit 1."""
    m = np.eye(4, dtype=complex)
    m[1, 1], m[1, 3] = u[0, 0], u[0, 1]
    m[3, 1], m[3, 3] = u[1, 0], u[1, 1]
    return m


def gate_matrix(gate: Gate) -> np.ndarray:
    """Dense matrix in the local little-endian frame of gate.qubits."""
    k = gate.kind
    if k in _FIXED_1Q:
        return _FIXED_1Q[k]
    if k is GateKind.RZ:
        return rz_matrix(gate.params[0])
    if k is GateKind.U3:
        return u3_matrix(*gate.params)
    if k is GateKind.CX:
        return CX_MATRIX
    if k is GateKind.SWAP:
        return SWAP_MATRIX
    if k is GateKind.CY:
        return _controlled(_FIXED_1Q[GateKind.Y])
    if k is GateKind.CZ:
        return _controlled(_FIXED_1Q[GateKind.Z])
    if k is GateKind.CRX:
        t = gate.params[0]
        rx = np.array(
            [
                [math.cos(t / 2), -1j * math.sin(t / 2)],
                [-1j * math.sin(t / 2), math.cos(t / 2)],
            ],
            dtype=complex,
        )
        return _controlled(rx)
    raise GateError(f"{k.value} has no matrix")


def u3_params(m: np.ndarray, tol: float = 1e-12) -> tuple[float, float, float, float]:
    """Extract (theta, phi, lam, phase) with m = exp(i*phase) * U3(theta, phi, lam)."""
    theta = 2.0 * math.atan2(abs(m[1, 0]), abs(m[0, 0]))
    if abs(m[0, 0]) < tol:
        # theta == pi column: m = e^{i phase} [[0, -e^{i lam}], [e^{i phi}, 0]]
        phase = float(np.angle(m[1, 0]))
        lam = float(np.angle(-m[0, 1])) - phase
        return math.pi, 0.0, _wrap(lam), phase
    phase = float(np.angle(m[0, 0]))
    if abs(m[1, 0]) < tol:
        phi = float(np.angle(m[1, 1])) - phase
        return 0.0, _wrap(phi), 0.0, phase
    phi = float(np.angle(m[1, 0])) - phase
    lam = float(np.angle(-m[0, 1])) - phase
    return theta, _wrap(phi), _wrap(lam), phase


def _wrap(a: float) -> float:
    return (a + math.pi) % (2.0 * math.pi) - math.pi


def u3_gate_from_matrix(m: np.ndarray, qubit: int) -> Gate:
    theta, phi, lam, _ = u3_params(m)
    return Gate(GateKind.U3, (qubit,), (theta, phi, lam))


def is_identity_up_to_phase(m: np.ndarray, tol: float = 1e-10) -> bool:
    if abs(abs(m[0, 0]) - 1.0) > tol:
        return False
    return bool(np.allclose(m / m[0, 0], np.eye(m.shape[0]), atol=tol))

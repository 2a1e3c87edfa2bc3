"""Commutation analysis, commutative cancellation, and the router's
cancellation predictors.

Whether two gates commute is decided numerically: embed both on their joint
support and compare the two products (a handful of structural fast paths
short-circuit the common cases).  Per wire, gates are grouped greedily into
contiguous commute sets; a gate joins the current set only if it commutes
with every member among the first twenty (larger sets are searched no deeper
than that, so cancellation re-verifies the stretch between a candidate pair).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circuit import Circuit
from .dag import CircuitDag
from .gates import Gate, GateKind, SELF_INVERSE_KINDS, gate_matrix
from .sim import apply_gate

SEARCH_CAP = 20

_CONTROLLED = {GateKind.CX, GateKind.CY, GateKind.CZ, GateKind.CRX}


def _embedded(kind: GateKind, qubits: tuple[int, ...], params: tuple[float, ...],
              n: int) -> np.ndarray:
    gate = Gate(kind, qubits, params)
    dim = 2**n
    u = np.eye(dim, dtype=complex)
    for col in range(dim):
        u[:, col] = apply_gate(np.ascontiguousarray(u[:, col]), gate, n)
    return u


@lru_cache(maxsize=65536)
def _commute_key(k1, q1, p1, k2, q2, p2, n) -> bool:
    a = _embedded(k1, q1, p1, n)
    b = _embedded(k2, q2, p2, n)
    return bool(np.max(np.abs(a @ b - b @ a)) < 1e-9)


def gates_commute(g1: Gate, g2: Gate) -> bool:
    """Commutator of the two gates on their joint support is zero (1e-9)."""
    if not (g1.is_unitary_gate() and g2.is_unitary_gate()):
        return False
    shared = set(g1.qubits) & set(g2.qubits)
    if not shared:
        return True
    if g1.kind is g2.kind and g1.qubits == g2.qubits and g1.params == g2.params:
        return True
    # controlled gates sharing their control wire commute when targets differ
    if (
        g1.kind in _CONTROLLED
        and g2.kind in _CONTROLLED
        and g1.qubits[0] == g2.qubits[0]
        and g1.qubits[1] != g2.qubits[1]
    ):
        return True
    if (
        g1.kind is GateKind.CX
        and g2.kind is GateKind.CX
        and g1.qubits[1] == g2.qubits[1]
        and g1.qubits[0] != g2.qubits[0]
    ):
        return True
    wires = sorted(set(g1.qubits) | set(g2.qubits))
    relabel = {w: i for i, w in enumerate(wires)}
    key1 = tuple(relabel[q] for q in g1.qubits)
    key2 = tuple(relabel[q] for q in g2.qubits)
    p1 = tuple(round(p, 12) for p in g1.params)
    p2 = tuple(round(p, 12) for p in g2.params)
    return _commute_key(g1.kind, key1, p1, g2.kind, key2, p2, len(wires))


def commutation_analysis(dag: CircuitDag) -> dict[tuple[int, int], int]:
    """Group contiguous commuting gates per wire; annotates the dag.

    Returns the (node, wire) -> set_id map.  Non-unitary nodes form singleton
    sets.  Membership checks look at no more than the first SEARCH_CAP
    members of the open set.
    """
    dag.commute_set.clear()
    dag.commute_members.clear()
    next_id = 0
    for wire, nodes in enumerate(dag.wires):
        current: list[int] = []
        current_id = None
        for nid in nodes:
            gate = dag.nodes[nid].gate
            joins = bool(current) and gate.is_unitary_gate()
            if joins:
                for member in current[:SEARCH_CAP]:
                    if not gates_commute(gate, dag.nodes[member].gate):
                        joins = False
                        break
            if not joins:
                current_id = next_id
                next_id += 1
                current = []
                dag.commute_members[current_id] = current
            current.append(nid)
            dag.commute_set[(nid, wire)] = current_id
            if not gate.is_unitary_gate():
                # measure/barrier: close the set so nothing commutes across
                current = []
                current_id = None
    return dict(dag.commute_set)


def _between_ok(dag: CircuitDag, wire_nodes: list[int], i: int, j: int,
                gate: Gate) -> bool:
    """Everything strictly between positions i and j on the wire commutes
    with `gate` (guards sets that grew past the membership search cap)."""
    for nid in wire_nodes[i + 1 : j]:
        if not gates_commute(gate, dag.nodes[nid].gate):
            return False
    return True


def commutative_cancellation(dag: CircuitDag) -> CircuitDag:
    """Remove pairs of identical self-inverse gates that can be brought
    together by commutation; repeats until a fixed point."""
    for _ in range(16):
        commutation_analysis(dag)
        removed = _cancel_once(dag)
        if not removed:
            return dag
        gates = [dag.nodes[nid].gate for nid in dag.order if nid not in removed]
        dag = CircuitDag(dag.to_circuit().with_gates(gates))
    return dag


def _cancel_once(dag: CircuitDag) -> set[int]:
    removed: set[int] = set()
    pos_on_wire: dict[tuple[int, int], int] = {}
    for wire, nodes in enumerate(dag.wires):
        for i, nid in enumerate(nodes):
            pos_on_wire[(nid, wire)] = i

    for wire, nodes in enumerate(dag.wires):
        by_key: dict[tuple, list[int]] = {}
        for nid in nodes:
            gate = dag.nodes[nid].gate
            if gate.kind not in SELF_INVERSE_KINDS:
                continue
            if gate.num_qubits == 2 and wire != gate.qubits[0]:
                continue  # handle each 2q gate from its first wire only
            by_key.setdefault((gate.kind, gate.qubits), []).append(nid)
        for (kind, qubits), cands in by_key.items():
            pending: int | None = None
            for nid in cands:
                if nid in removed:
                    continue
                if pending is None:
                    pending = nid
                    continue
                if self_inverse_pair_cancels(dag, pending, nid, pos_on_wire):
                    removed.add(pending)
                    removed.add(nid)
                    pending = None
                else:
                    pending = nid
    return removed


def self_inverse_pair_cancels(dag, nid_a, nid_b, pos_on_wire) -> bool:
    gate = dag.nodes[nid_a].gate
    for wire in gate.qubits:
        sa = dag.commute_set.get((nid_a, wire))
        sb = dag.commute_set.get((nid_b, wire))
        if sa is None or sa != sb:
            return False
        i, j = pos_on_wire[(nid_a, wire)], pos_on_wire[(nid_b, wire)]
        if not _between_ok(dag, dag.wires[wire], min(i, j), max(i, j), gate):
            return False
    return True


def move_1q_through_swap(dag: CircuitDag, swap_node: int) -> CircuitDag:
    """Relocate the 1q gates immediately preceding a SWAP to just after it,
    on the opposite wire.  Exact unitary identity; merging of the resulting
    adjacent 1q runs is left to the merge pass."""
    gate = dag.nodes[swap_node].gate
    if gate.kind is not GateKind.SWAP:
        raise ValueError("node is not a SWAP")
    a, b = gate.qubits
    other = {a: b, b: a}
    moved: list[int] = []
    for wire in (a, b):
        nid = dag.prev_on_wire(swap_node, wire)
        while nid is not None:
            g = dag.nodes[nid].gate
            if g.num_qubits != 1 or not g.is_unitary_gate():
                break
            moved.append(nid)
            nid = dag.prev_on_wire(nid, wire)
    moved_set = set(moved)
    gates: list[Gate] = []
    for nid in dag.order:
        if nid in moved_set:
            continue
        gates.append(dag.nodes[nid].gate)
        if nid == swap_node:
            for m in sorted(moved):
                g = dag.nodes[m].gate
                gates.append(g.remapped({g.qubits[0]: other[g.qubits[0]]}))
    return CircuitDag(dag.to_circuit().with_gates(gates))


# -- router-facing predictors -------------------------------------------------


@dataclass(frozen=True)
class DecompositionLabel:
    """How to expand an inserted SWAP: which physical qubit controls the
    first (and last) CNOT of the ladder, and which optimization asked."""

    control_phys: int | None
    rationale: str  # "commute1" | "commute2" | "none"

    @staticmethod
    def none() -> "DecompositionLabel":
        return DecompositionLabel(None, "none")


def predict_ccommute1(dag, hist_a, hist_b, la, lb, pa, pb):
    """CNOT-vs-SWAP cancellation predictor.

    hist_a/hist_b are the resolved entries on physical wires pa/pb (oldest
    first); entries expose .gate (physical), .node_id (None for inserted
    SWAPs) and .is_swap.  Returns (0, None) or (2, label).
    """
    run_a = _set_run(dag, hist_a, la)
    if not run_a:
        return 0, None
    run_b = _set_run(dag, hist_b, lb)
    if not run_b:
        return 0, None
    common = set(run_a) & set(run_b)
    for nid in run_a:
        if nid not in common:
            continue
        gate = dag.nodes[nid].gate
        if gate.kind is GateKind.CX and set(gate.qubits) == {la, lb}:
            control = pa if gate.qubits[0] == la else pb
            return 2, DecompositionLabel(control, "commute1")
    return 0, None


def _set_run(dag, hist, logical_wire):
    """Node ids of the trailing commute-set run on one wire, skipping the 1q
    gates just before the frontier.  Stops at inserted SWAPs and at anything
    without a set annotation on this wire."""
    idx = len(hist) - 1
    while idx >= 0 and hist[idx].gate.num_qubits == 1 and hist[idx].gate.is_unitary_gate():
        idx -= 1
    if idx < 0:
        return []
    anchor = hist[idx]
    if anchor.node_id is None:
        return []
    set_id = dag.commute_set.get((anchor.node_id, logical_wire))
    if set_id is None:
        return []
    run = []
    scanned = 0
    while idx >= 0 and scanned < SEARCH_CAP:
        entry = hist[idx]
        if entry.node_id is None:
            break
        if dag.commute_set.get((entry.node_id, logical_wire)) != set_id:
            break
        run.append(entry.node_id)
        scanned += 1
        idx -= 1
    return run


def predict_ccommute2(dag, hist_a, hist_b, pa, pb):
    """SWAP-sandwich predictor (a commute set boxed by two SWAPs on the same
    physical pair).  Returns (0, None, None) or (2, label, prev_swap_entry);
    the previous SWAP must be relabeled to match."""
    mid_a, prev_a = _until_prev_swap(hist_a, pa, pb)
    if prev_a is None:
        return 0, None, None
    mid_b, prev_b = _until_prev_swap(hist_b, pa, pb)
    if prev_b is not prev_a:
        return 0, None, None
    if not mid_a and not mid_b:
        # nothing is sandwiched: this SWAP would only undo the previous one
        return 0, None, None
    middles = []
    seen = set()
    for entry in mid_a + mid_b:
        if id(entry) not in seen:
            seen.add(id(entry))
            middles.append(entry)
    for control, target in ((pa, pb), (pb, pa)):
        inner_cx = Gate(GateKind.CX, (control, target))
        if all(gates_commute(inner_cx, e.gate) for e in middles) and _pairwise(
            mid_a
        ) and _pairwise(mid_b):
            return 2, DecompositionLabel(control, "commute2"), prev_a
    return 0, None, None


def _until_prev_swap(hist, pa, pb):
    """Entries (trailing 1q excluded) back to the previous inserted SWAP on
    exactly this pair; (middles, swap_entry) or (middles, None)."""
    idx = len(hist) - 1
    while idx >= 0 and hist[idx].gate.num_qubits == 1 and hist[idx].gate.is_unitary_gate():
        idx -= 1
    middles = []
    scanned = 0
    while idx >= 0 and scanned < SEARCH_CAP:
        entry = hist[idx]
        if entry.is_swap:
            if set(entry.gate.qubits) == {pa, pb}:
                return middles, entry
            return middles, None
        middles.append(entry)
        scanned += 1
        idx -= 1
    return middles, None


def _pairwise(entries) -> bool:
    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            if not gates_commute(entries[i].gate, entries[j].gate):
                return False
    return True

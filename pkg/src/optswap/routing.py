"""Layered SWAP-search routing: distance-only baseline and the
optimization-aware variant.

Both routers run the same layered loop: drain executable front gates, then
score every SWAP incident to an unsatisfied front gate and apply the argmin.
The baseline scores a candidate by post-SWAP distances of the front layer
plus a weighted extended-layer lookahead.  The optimization-aware router
additionally subtracts the CNOTs the candidate SWAP is predicted to save via
two-qubit block re-synthesis and the two commutation cancellations, and tags
such SWAPs with the decomposition orientation those cancellations need.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .circuit import Circuit, metrics
from .commutation import (
    DecompositionLabel,
    commutation_analysis,
    commutative_cancellation,
    predict_ccommute1,
    predict_ccommute2,
)
from .dag import CircuitDag, build_dag
from .gates import Gate, GateKind
from .synthesis import (
    annotate_block_costs,
    block_unitary,
    collect_blocks,
    kak_synthesize,
    merge_1q_runs,
    min_cnot_count,
    pair_unitary,
    predict_c2q,
)
from .topology import CouplingMap, all_pairs_distance, noise_distance

SABRE = "sabre"
NASSC = "nassc"

# Equal-cost candidates favor certain commute cancellations over speculative
# block merges; the nudge is far below any real cost difference.
_COMMUTE_TIEBREAK = 1e-9


class RoutingError(RuntimeError):
    pass


class TooFewPhysicalQubits(RoutingError):
    pass


@dataclass(frozen=True)
class RouterConfig:
    algorithm: str = NASSC
    extended_size: int = 20
    extended_weight: float = 0.5
    b_2q: bool = True
    b_commute1: bool = True
    b_commute2: bool = True
    seed: int = 0
    traversals: int = 3
    noise_profile: object | None = None  # NoiseProfile for noise-aware distances

    def __post_init__(self):
        if self.algorithm not in (SABRE, NASSC):
            raise ValueError(f"unknown algorithm '{self.algorithm}'")
        if self.extended_size < 0 or self.extended_weight < 0:
            raise ValueError("extended layer parameters must be nonnegative")

    def flags(self) -> tuple[bool, bool, bool]:
        if self.algorithm == SABRE:
            return (False, False, False)
        return (self.b_2q, self.b_commute1, self.b_commute2)


@dataclass
class QubitMapping:
    log_to_phys: list[int]
    phys_to_log: list[int] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.log_to_phys)
        if sorted(self.log_to_phys) != list(range(n)):
            raise ValueError("mapping must be a bijection")
        if not self.phys_to_log:
            self.phys_to_log = [0] * n
            for l, p in enumerate(self.log_to_phys):
                self.phys_to_log[p] = l

    def copy(self) -> "QubitMapping":
        return QubitMapping(list(self.log_to_phys), list(self.phys_to_log))

    def swap_physical(self, u: int, v: int) -> None:
        lu, lv = self.phys_to_log[u], self.phys_to_log[v]
        self.phys_to_log[u], self.phys_to_log[v] = lv, lu
        self.log_to_phys[lu], self.log_to_phys[lv] = v, u


@dataclass
class SwapCandidate:
    edge: tuple[int, int]
    c2q: int = 0
    ccommute1: int = 0
    ccommute2: int = 0
    label: DecompositionLabel = field(default_factory=DecompositionLabel.none)
    prev_swap_entry: object | None = None
    cost: float = 0.0


@dataclass(eq=False)
class RoutedOp:
    gate: Gate
    node_id: int | None
    is_swap: bool = False
    label: DecompositionLabel = field(default_factory=DecompositionLabel.none)
    deleted: bool = False
    seq: int = -1


@dataclass
class RouteOutcome:
    ops: list[RoutedOp]
    final_mapping: QubitMapping
    swaps_inserted: int = 0
    swaps_opt_2q: int = 0
    swaps_opt_commute: int = 0

    def physical_gates(self) -> list[Gate]:
        return [op.gate for op in self.ops if not op.deleted]


@dataclass
class RoutingResult:
    circuit: Circuit
    final_mapping: list[int]
    initial_mapping: list[int]
    stats: dict


class _RouteState:
    """Mutable routing state: emitted ops, per-wire histories, front layer."""

    def __init__(self, dag: CircuitDag, cmap: CouplingMap, mapping: QubitMapping):
        self.dag = dag
        self.cmap = cmap
        self.mapping = mapping
        self.ops: list[RoutedOp] = []
        self.wire_hist: list[list[RoutedOp]] = [
            [] for _ in range(cmap.num_physical_qubits)
        ]
        self.pending_preds: dict[int, int] = {}
        self.topo_pos = {nid: i for i, nid in enumerate(dag.order)}
        self.front: list[int] = []
        for nid in dag.order:
            npred = len(dag.predecessors(nid))
            self.pending_preds[nid] = npred
            if npred == 0:
                self.front.append(nid)
        self.resolved_nodes: set[int] = set()

    def executable(self, nid: int) -> bool:
        gate = self.dag.nodes[nid].gate
        if gate.num_qubits != 2 or not gate.is_unitary_gate():
            return True
        pa, pb = (self.mapping.log_to_phys[q] for q in gate.qubits)
        return self.cmap.has_edge(pa, pb)

    def emit_node(self, nid: int) -> None:
        gate = self.dag.nodes[nid].gate
        phys = gate.remapped(self.mapping.log_to_phys)
        op = RoutedOp(phys, nid, seq=len(self.ops))
        self.ops.append(op)
        for q in phys.qubits:
            self.wire_hist[q].append(op)
        self.resolved_nodes.add(nid)
        self.front.remove(nid)
        for succ in self.dag.successors(nid):
            self.pending_preds[succ] -= 1
            if self.pending_preds[succ] == 0:
                self.front.append(succ)
        self.front.sort(key=self.topo_pos.__getitem__)

    def drain_front(self) -> None:
        progressed = True
        while progressed:
            progressed = False
            for nid in list(self.front):
                if self.executable(nid):
                    self.emit_node(nid)
                    progressed = True

    def live_hist(self, wire: int) -> list[RoutedOp]:
        return [op for op in self.wire_hist[wire] if not op.deleted]

    def insert_swap(self, cand: SwapCandidate) -> None:
        u, v = cand.edge
        label = cand.label
        moved: list[RoutedOp] = []
        if label.rationale != "none":
            moved = self._trailing_1q(u) + self._trailing_1q(v)
            for op in moved:
                op.deleted = True
            if cand.prev_swap_entry is not None:
                cand.prev_swap_entry.label = DecompositionLabel(
                    label.control_phys, "commute2"
                )
        op = RoutedOp(Gate(GateKind.SWAP, (u, v)), None, is_swap=True, label=label,
                      seq=len(self.ops))
        self.ops.append(op)
        self.wire_hist[u].append(op)
        self.wire_hist[v].append(op)
        # the SWAP conjugates a preceding 1q gate onto the other wire
        other = {u: v, v: u}
        for old in sorted(moved, key=lambda o: o.seq):
            q = old.gate.qubits[0]
            relocated = RoutedOp(old.gate.remapped({q: other[q]}), old.node_id,
                                 seq=len(self.ops))
            self.ops.append(relocated)
            self.wire_hist[other[q]].append(relocated)
        self.mapping.swap_physical(u, v)

    def _trailing_1q(self, wire: int) -> list[RoutedOp]:
        out: list[RoutedOp] = []
        for op in reversed(self.wire_hist[wire]):
            if op.deleted:
                continue
            if op.gate.num_qubits != 1 or not op.gate.is_unitary_gate():
                break
            out.append(op)
        return out

    def unsatisfied_front(self) -> list[int]:
        return [nid for nid in self.front if not self.executable(nid)]

    def extended_layer(self, front_2q: list[int], cap: int) -> list[int]:
        """Closest two-qubit successors of the front, in topological order."""
        if cap <= 0:
            return []
        seen = set(front_2q)
        frontier = list(front_2q)
        out: list[int] = []
        while frontier and len(out) < cap:
            nxt: list[int] = []
            for nid in frontier:
                for succ in self.dag.successors(nid):
                    if succ in seen:
                        continue
                    seen.add(succ)
                    nxt.append(succ)
            nxt.sort(key=self.topo_pos.__getitem__)
            for nid in nxt:
                gate = self.dag.nodes[nid].gate
                if gate.num_qubits == 2 and gate.is_unitary_gate():
                    out.append(nid)
                    if len(out) == cap:
                        break
            frontier = nxt
        return out


def enumerate_candidates(state: _RouteState, front_2q: list[int]) -> list[tuple[int, int]]:
    """Coupling edges incident to a physical qubit of an unsatisfied front gate."""
    if not front_2q:
        raise RoutingError("no unsatisfied front gate to route")
    touched = set()
    for nid in front_2q:
        for q in state.dag.nodes[nid].gate.qubits:
            touched.add(state.mapping.log_to_phys[q])
    edges = [e for e in state.cmap.sorted_edges() if e[0] in touched or e[1] in touched]
    return edges


def _score_candidate(
    state: _RouteState,
    edge: tuple[int, int],
    front_2q: list[int],
    extended: list[int],
    dist: np.ndarray,
    cfg: RouterConfig,
) -> SwapCandidate:
    u, v = edge
    b2q, bc1, bc2 = cfg.flags()
    cand = SwapCandidate(edge)
    mapping = state.mapping

    def tentative(q: int) -> int:
        p = mapping.log_to_phys[q]
        if p == u:
            return v
        if p == v:
            return u
        return p

    front_sum = 0.0
    for nid in front_2q:
        qa, qb = state.dag.nodes[nid].gate.qubits
        front_sum += dist[tentative(qa), tentative(qb)]

    if b2q or bc1 or bc2:
        hist_u = state.live_hist(u)
        hist_v = state.live_hist(v)
        if b2q:
            pred_u = hist_u[-1].node_id if hist_u else None
            pred_v = hist_v[-1].node_id if hist_v else None
            cand.c2q = predict_c2q(state.dag, pred_u, pred_v)
        if bc1:
            lu, lv = mapping.phys_to_log[u], mapping.phys_to_log[v]
            value, label = predict_ccommute1(state.dag, hist_u, hist_v, lu, lv, u, v)
            if value:
                cand.ccommute1 = value
                cand.label = label
        if bc2 and cand.label.rationale == "none":
            value, label, prev = predict_ccommute2(state.dag, hist_u, hist_v, u, v)
            if value:
                cand.ccommute2 = value
                cand.label = label
                cand.prev_swap_entry = prev

    reduction = cand.c2q + cand.ccommute1 + cand.ccommute2
    basic = (3.0 * front_sum - reduction) / len(front_2q)
    lookahead = 0.0
    if extended:
        ext_sum = 0.0
        for nid in extended:
            qa, qb = state.dag.nodes[nid].gate.qubits
            ext_sum += dist[tentative(qa), tentative(qb)]
        lookahead = cfg.extended_weight * ext_sum / len(extended)
    cand.cost = basic + lookahead - _COMMUTE_TIEBREAK * (cand.ccommute1 + cand.ccommute2)
    return cand


def route(
    dag: CircuitDag,
    cmap: CouplingMap,
    dist: np.ndarray,
    cfg: RouterConfig,
    mapping: QubitMapping,
    rng: np.random.Generator,
) -> RouteOutcome:
    """Run the layered loop until every gate is emitted on coupled qubits."""
    state = _RouteState(dag, cmap, mapping)
    outcome = RouteOutcome([], mapping)
    max_iter = 10 * cmap.num_physical_qubits * max(1, len(dag.order))
    stall_cap = max(8, 2 * cmap.num_physical_qubits)
    iterations = 0
    stall = 0
    while True:
        resolved_before = len(state.resolved_nodes)
        state.drain_front()
        if not state.front:
            break
        stall = 0 if len(state.resolved_nodes) > resolved_before else stall + 1
        iterations += 1
        if iterations > max_iter:
            raise RoutingError(
                f"no progress after {max_iter} SWAP insertions; "
                "routing appears to oscillate"
            )
        front_2q = state.unsatisfied_front()
        if stall > stall_cap:
            # cost-directed search is cycling through zero-progress SWAPs;
            # force the first front gate along a shortest path
            outcome.swaps_inserted += _greedy_resolve(state, front_2q[0], dist)
            stall = 0
            continue
        extended = state.extended_layer(front_2q, cfg.extended_size)
        candidates = [
            _score_candidate(state, edge, front_2q, extended, dist, cfg)
            for edge in enumerate_candidates(state, front_2q)
        ]
        best = min(c.cost for c in candidates)
        tied = [c for c in candidates if c.cost <= best + 1e-12]
        choice = tied[int(rng.integers(len(tied)))] if len(tied) > 1 else tied[0]
        state.insert_swap(choice)
        outcome.swaps_inserted += 1
        if choice.c2q > 0:
            outcome.swaps_opt_2q += 1
        if choice.label.rationale != "none":
            outcome.swaps_opt_commute += 1
    outcome.ops = state.ops
    outcome.final_mapping = state.mapping
    return outcome


def _greedy_resolve(state: _RouteState, nid: int, dist: np.ndarray) -> int:
    """Walk one gate's first qubit along a shortest path until coupled."""
    gate = state.dag.nodes[nid].gate
    inserted = 0
    while not state.executable(nid):
        pa, pb = (state.mapping.log_to_phys[q] for q in gate.qubits)
        step = min(
            (n for n in state.cmap.neighbors(pa) if dist[n, pb] < dist[pa, pb]),
        )
        state.insert_swap(SwapCandidate((pa, step) if pa < step else (step, pa)))
        inserted += 1
    return inserted


def initial_mapping(
    fwd_dag: CircuitDag,
    rev_dag: CircuitDag,
    cmap: CouplingMap,
    dist: np.ndarray,
    cfg: RouterConfig,
) -> QubitMapping:
    """Seeded random bijection refined by alternating forward/reverse routing
    passes; returns the mapping entering the final forward pass.

    The refinement passes run with plain distance costs regardless of the
    configured algorithm: placement quality is what they are after, and it
    keeps both routers starting the final pass from the same layout for a
    given seed.
    """
    n = cmap.num_physical_qubits
    rng = np.random.default_rng([cfg.seed, 0xA11])
    mapping = QubitMapping([int(p) for p in rng.permutation(n)])
    plain = replace(cfg, b_2q=False, b_commute1=False, b_commute2=False)
    passes = max(0, cfg.traversals - 1)
    for i in range(passes):
        dag = fwd_dag if i % 2 == 0 else rev_dag
        pass_cfg = cfg if i == passes - 1 else plain
        outcome = route(dag, cmap, dist, pass_cfg, mapping.copy(),
                        np.random.default_rng([cfg.seed, 0xB22, i]))
        mapping = outcome.final_mapping
    return mapping


def decompose_swaps(ops: list[RoutedOp]) -> list[Gate]:
    """Expand SWAPs into three CNOTs; a label fixes which qubit controls the
    outer CNOTs, unlabeled SWAPs default to control on the lower index."""
    gates: list[Gate] = []
    for op in ops:
        if op.deleted:
            continue
        if not op.is_swap:
            gates.append(op.gate)
            continue
        a, b = op.gate.qubits
        control = op.label.control_phys
        if control is None:
            control = min(a, b)
        target = b if control == a else a
        gates.append(Gate(GateKind.CX, (control, target)))
        gates.append(Gate(GateKind.CX, (target, control)))
        gates.append(Gate(GateKind.CX, (control, target)))
    return gates


# -- optimization passes around routing ----------------------------------------


def resynthesize_blocks(circuit: Circuit) -> Circuit:
    """Rewrite each two-qubit block into its minimal-CNOT canonical form.

    A block is rewritten when it contains non-CX two-qubit gates (basis
    conversion) or when re-synthesis strictly reduces its CNOT count; blocks
    that are already minimal are left untouched so that a chosen SWAP
    decomposition orientation survives to the cancellation pass.
    """
    dag = build_dag(circuit)
    blocks = collect_blocks(dag)
    rewritten: dict[int, list[Gate]] = {}
    drop: set[int] = set()
    for blk in blocks:
        gates = [dag.nodes[nid].gate for nid in blk.node_ids]
        has_foreign = any(
            g.num_qubits == 2 and g.kind is not GateKind.CX for g in gates
        )
        cx_count = sum(1 for g in gates if g.kind is GateKind.CX)
        u = block_unitary(blk, dag)
        minimal = min_cnot_count(u)
        if not has_foreign and minimal >= cx_count:
            continue
        synth = kak_synthesize(u, blk.qubit_pair, circuit.num_qubits)
        # Anchor the replacement at the first two-qubit member: leading 1q
        # members were collected before it but nothing else touches their
        # wire in between, so sliding them down to the anchor is sound.
        anchor = next(
            nid for nid in blk.node_ids if dag.nodes[nid].gate.num_qubits == 2
        )
        rewritten[anchor] = list(synth.gates)
        drop.update(nid for nid in blk.node_ids if nid != anchor)
    out: list[Gate] = []
    for nid in dag.order:
        if nid in rewritten:
            out.extend(rewritten[nid])
        elif nid not in drop:
            out.append(dag.nodes[nid].gate)
    return circuit.with_gates(out)


def optimize_circuit(circuit: Circuit, rounds: int = 10) -> Circuit:
    """Re-synthesis + commutative cancellation + 1q merging to a fixed point."""
    for _ in range(rounds):
        before = circuit.gates
        circuit = resynthesize_blocks(circuit)
        dag = commutative_cancellation(build_dag(circuit))
        dag = merge_1q_runs(dag)
        circuit = dag.to_circuit()
        if circuit.gates == before:
            break
    return circuit


def _annotate_for_routing(circuit: Circuit) -> CircuitDag:
    dag = build_dag(circuit)
    blocks = collect_blocks(dag)
    annotate_block_costs(dag, blocks)
    commutation_analysis(dag)
    return dag


def distance_matrix_for(cmap: CouplingMap, cfg: RouterConfig) -> np.ndarray:
    if cfg.noise_profile is not None:
        return noise_distance(cmap, cfg.noise_profile)
    return all_pairs_distance(cmap)


def full_pipeline(circuit: Circuit, cmap: CouplingMap, cfg: RouterConfig) -> RoutingResult:
    """Pre-optimize, map, route, decompose SWAPs, post-optimize, measure."""
    n = cmap.num_physical_qubits
    if circuit.num_qubits > n:
        raise TooFewPhysicalQubits(
            f"{circuit.num_qubits} logical qubits > {n} physical"
        )
    t0 = time.perf_counter()
    body, measures = _split_final_measures(circuit)
    logical = optimize_circuit(body)
    base = metrics(logical)
    padded = Circuit(n, logical.gates, circuit.num_clbits)

    fwd_dag = _annotate_for_routing(padded)
    rev_dag = _annotate_for_routing(padded.with_gates(tuple(reversed(padded.gates))))
    dist = distance_matrix_for(cmap, cfg)

    mapping = initial_mapping(fwd_dag, rev_dag, cmap, dist, cfg)
    entry_mapping = list(mapping.log_to_phys)
    outcome = route(
        fwd_dag, cmap, dist, cfg, mapping,
        np.random.default_rng([cfg.seed, 0xF1A1]),
    )
    routed = Circuit(n, tuple(decompose_swaps(outcome.ops)), circuit.num_clbits)
    routed = optimize_circuit(routed)
    _assert_compliant(routed, cmap)
    final = metrics(routed)
    final_log_to_phys = outcome.final_mapping.log_to_phys
    routed = routed.with_gates(
        tuple(routed.gates)
        + tuple(m.remapped(final_log_to_phys) for m in measures)
    )
    wall = time.perf_counter() - t0
    stats = {
        "swaps_inserted": outcome.swaps_inserted,
        "cnot_total": final["cnot_count"],
        "cnot_add": final["cnot_count"] - base["cnot_count"],
        "depth_total": final["depth"],
        "depth_add": final["depth"] - base["depth"],
        "cnot_total_orig": base["cnot_count"],
        "depth_total_orig": base["depth"],
        "swaps_opt_by_2q": outcome.swaps_opt_2q,
        "swaps_opt_by_commute": outcome.swaps_opt_commute,
        "wall_time_s": wall,
    }
    return RoutingResult(
        routed, list(outcome.final_mapping.log_to_phys), entry_mapping, stats
    )


def _split_final_measures(circuit: Circuit) -> tuple[Circuit, list[Gate]]:
    """Separate trailing measurements from the unitary body; they are routed
    implicitly by remapping onto the final layout.  Mid-circuit measurement
    is unsupported."""
    measured: set[int] = set()
    body: list[Gate] = []
    measures: list[Gate] = []
    for g in circuit.gates:
        if g.kind is GateKind.MEASURE:
            measured.add(g.qubits[0])
            measures.append(g)
            continue
        if g.kind is not GateKind.BARRIER and measured & set(g.qubits):
            raise RoutingError("mid-circuit measurement is not supported")
        if g.kind is GateKind.BARRIER and measured.issuperset(g.qubits):
            continue
        body.append(g)
    return circuit.with_gates(body), measures


def _assert_compliant(circuit: Circuit, cmap: CouplingMap) -> None:
    for g in circuit.gates:
        if g.num_qubits == 2 and g.is_unitary_gate() and not cmap.has_edge(*g.qubits):
            raise RoutingError(f"gate {g.kind.value}{g.qubits} is not on a coupling")

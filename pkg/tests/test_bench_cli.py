import json
import math

import pytest

from optswap.bench import (
    BenchSpec,
    CSV_COLUMNS,
    builtin_circuit,
    estimate_fidelity,
    load_bench_spec,
    rows_to_csv,
    run_bench,
)
from optswap.circuit import Circuit
from optswap.cli import main
from optswap.gates import Gate, GateKind
from optswap.qasm import parse_qasm_file, serialize_qasm
from optswap.routing import NASSC, SABRE, RouterConfig
from optswap.topology import MissingEdgeData, NoiseProfile, linear_map

FIG1_QASM = """OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
crx(pi/3) q[1],q[2];
crx(pi/5) q[0],q[1];
crx(pi/7) q[0],q[2];
"""


def cx(a, b):
    return Gate(GateKind.CX, (a, b))


def test_builtin_circuits_present():
    for name in ("grover_n4", "vqe_n8", "bv_n19", "adder_n10"):
        c = builtin_circuit(name)
        assert c.num_qubits >= 4


def test_estimate_fidelity():
    cmap = linear_map(3)
    prof = NoiseProfile.uniform(cmap, cx_error=0.01)
    assert estimate_fidelity(Circuit(3, ()), prof) == 1.0
    two = Circuit(3, (cx(0, 1), cx(0, 1)))
    assert math.isclose(estimate_fidelity(two, prof), 0.9801)
    off_edge = Circuit(3, (cx(0, 2),))
    with pytest.raises(MissingEdgeData):
        estimate_fidelity(off_edge, prof)


def _tiny_spec(tmp_path, trials=2):
    qasm = tmp_path / "fig1.qasm"
    qasm.write_text(FIG1_QASM)
    return BenchSpec(
        circuits=[str(qasm)],
        topology="linear(3)",
        routers=(RouterConfig(algorithm=SABRE), RouterConfig(algorithm=NASSC)),
        trials=trials,
    )


def test_run_bench_row_structure(tmp_path):
    rows = run_bench(_tiny_spec(tmp_path))
    assert len(rows) == 3  # sabre, nassc, geomean summary
    sabre, nassc, summary = rows
    assert sabre.router == "sabre" and nassc.router == "nassc"
    assert sabre.delta_cnot_add is None
    assert nassc.delta_cnot_add is not None
    assert summary.name == "geomean"
    # summary recomputable from the row data
    ratio = nassc.cnot_add / sabre.cnot_add
    assert summary.delta_cnot_add == pytest.approx(1 - ratio)


def test_run_bench_deterministic(tmp_path):
    rows_a = run_bench(_tiny_spec(tmp_path))
    rows_b = run_bench(_tiny_spec(tmp_path))
    strip = lambda rows: [
        {k: v for k, v in vars(r).items() if k != "wall_time_s"} for r in rows
    ]
    assert strip(rows_a) == strip(rows_b)


def test_csv_columns_fixed(tmp_path):
    rows = run_bench(_tiny_spec(tmp_path))
    text = rows_to_csv(rows)
    header = text.splitlines()[0].split(",")
    assert header == CSV_COLUMNS
    assert len(text.splitlines()) == len(rows) + 1


def test_bench_spec_loader(tmp_path):
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(
        json.dumps(
            {
                "circuits": ["grover_n4"],
                "topology": "linear(5)",
                "trials": 3,
                "routers": [
                    {"algorithm": "sabre"},
                    {"algorithm": "nassc", "b_commute2": False, "seed": 5},
                ],
                "large_circuits": ["vqe_n8"],
            }
        )
    )
    spec = load_bench_spec(spec_file)
    assert spec.circuits == ["grover_n4"]
    assert spec.trials == 3
    assert spec.routers[1].b_commute2 is False
    with_large = load_bench_spec(spec_file, include_large=True)
    assert with_large.circuits == ["grover_n4", "vqe_n8"]


def test_router_tag_marks_disabled_flags(tmp_path):
    spec = BenchSpec(
        circuits=["grover_n4"],
        topology="linear(4)",
        routers=(
            RouterConfig(algorithm=SABRE),
            RouterConfig(algorithm=NASSC, b_2q=False),
        ),
        trials=1,
    )
    rows = run_bench(spec)
    assert rows[1].router == "nassc[011]"


# -- CLI ------------------------------------------------------------------------


def test_cli_route_and_verify(tmp_path):
    src = tmp_path / "fig1.qasm"
    src.write_text(FIG1_QASM)
    out = tmp_path / "routed.qasm"
    stats = tmp_path / "stats.json"
    code = main([
        "route", "--in", str(src), "--coupling", "linear(3)",
        "--router", "nassc", "--seed", "0",
        "--out", str(out), "--stats", str(stats),
    ])
    assert code == 0
    data = json.loads(stats.read_text())
    assert data["cnot_add"] == 1
    assert sorted(data["final_mapping"]) == [0, 1, 2]
    routed = parse_qasm_file(out)
    assert all(g.kind in (GateKind.CX, GateKind.U3) for g in routed.gates)

    assert main(["verify", "--a", str(src), "--b", str(out),
                 "--perm", str(stats)]) == 0

    # a wrong permutation must fail verification
    bad = tmp_path / "bad.json"
    perm = data["final_mapping"]
    bad.write_text(json.dumps({"final_mapping": [perm[1], perm[0], perm[2]],
                               "initial_mapping": data["initial_mapping"]}))
    assert main(["verify", "--a", str(src), "--b", str(out),
                 "--perm", str(bad)]) == 1


def test_cli_route_compliant_inserts_nothing(tmp_path):
    src = tmp_path / "bell.qasm"
    src.write_text("OPENQASM 2.0;\nqreg q[2];\nh q[0];\ncx q[0],q[1];\n")
    out = tmp_path / "routed.qasm"
    stats = tmp_path / "stats.json"
    assert main(["route", "--in", str(src), "--coupling", "linear(2)",
                 "--router", "sabre", "--out", str(out),
                 "--stats", str(stats)]) == 0
    assert json.loads(stats.read_text())["swaps_inserted"] == 0


def test_cli_disable_opt_flags(tmp_path):
    src = tmp_path / "fig1.qasm"
    src.write_text(FIG1_QASM)
    out = tmp_path / "routed.qasm"
    assert main(["route", "--in", str(src), "--coupling", "linear(3)",
                 "--disable-opt", "2q,commute1,commute2",
                 "--out", str(out)]) == 0
    assert main(["route", "--in", str(src), "--coupling", "linear(3)",
                 "--disable-opt", "teleport", "--out", str(out)]) == 2


def test_cli_bench(tmp_path):
    qasm = tmp_path / "fig1.qasm"
    qasm.write_text(FIG1_QASM)
    csv_out = tmp_path / "bench.csv"
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({
        "circuits": [str(qasm)],
        "topology": "linear(3)",
        "trials": 2,
        "output": str(csv_out),
    }))
    assert main(["bench", "--spec", str(spec)]) == 0
    lines = csv_out.read_text().splitlines()
    assert lines[0].split(",") == CSV_COLUMNS
    assert len(lines) == 4


def test_cli_errors_are_exit_codes(tmp_path):
    missing = tmp_path / "missing.qasm"
    assert main(["route", "--in", str(missing), "--coupling", "linear(3)",
                 "--out", str(tmp_path / "x.qasm")]) == 2
    bad = tmp_path / "bad.qasm"
    bad.write_text("OPENQASM 2.0; qreg q[2]; frobnicate q[0];")
    assert main(["route", "--in", str(bad), "--coupling", "linear(3)",
                 "--out", str(tmp_path / "x.qasm")]) == 2

#!/usr/bin/env python3
"""Generate the committed QASM benchmark fixtures.

Run from the repository root:

    python3 scripts/make_benchmarks.py

Each generator emits plain OpenQASM 2.0 in the supported subset (controlled
phases and multi-controlled Z networks are spelled out in cx/u1 form).  The
script cross-checks the small constructions against dense matrices before
writing anything.
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "src" / "optswap" / "benchmarks"

sys.path.insert(0, str(ROOT / "src"))

from optswap.qasm import parse_qasm  # noqa: E402
from optswap.sim import circuit_unitary, strip_measurements  # noqa: E402


def gray_mcz(controls: list[int], extra: int | None = None) -> list[str]:
    """Phase-network C^(m)Z over `controls` + implicit last target qubit.

    Emits the standard gray-code ladder: for qubit k the subsets of
    {q_0..q_k} containing q_k each pick up a phase +-pi/2^m, which multiplies
    out to a -1 phase exactly on the all-ones state.  2^(n) - 2 CNOTs total.
    """
    qubits = controls if extra is None else controls + [extra]
    n = len(qubits)
    theta = math.pi / 2 ** (n - 1)
    lines = []
    for k, target in enumerate(qubits):
        ctrls = qubits[:k]
        lines.append(f"u1({_fmt(theta)}) q[{target}];")
        if not ctrls:
            continue
        sign = 1.0
        gray_prev = 0
        for step in range(1, 2**k):
            gray = step ^ (step >> 1)
            flipped = (gray ^ gray_prev).bit_length() - 1
            gray_prev = gray
            lines.append(f"cx q[{ctrls[flipped]}],q[{target}];")
            sign = -sign
            lines.append(f"u1({_fmt(sign * theta)}) q[{target}];")
        unwind = gray_prev.bit_length() - 1
        lines.append(f"cx q[{ctrls[unwind]}],q[{target}];")
    return lines


def _fmt(x: float) -> str:
    for denom in (1, 2, 4, 8, 16, 32, 64, 128):
        for num in range(-2 * denom, 2 * denom + 1):
            if num and abs(x - num * math.pi / denom) < 1e-12:
                frac = f"pi/{denom}" if denom > 1 else "pi"
                return f"{num}*{frac}" if num != 1 else frac
    return repr(x)


def header(n: int, clbits: int | None = None) -> list[str]:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{n}];"]
    if clbits:
        lines.append(f"creg c[{clbits}];")
    return lines


def measure_all(n: int) -> list[str]:
    return [f"measure q[{i}] -> c[{i}];" for i in range(n)]


def cu1(lam: float, a: int, b: int) -> list[str]:
    half = _fmt(lam / 2)
    neg = _fmt(-lam / 2)
    return [
        f"u1({half}) q[{a}];",
        f"cx q[{a}],q[{b}];",
        f"u1({neg}) q[{b}];",
        f"cx q[{a}],q[{b}];",
        f"u1({half}) q[{b}];",
    ]


def grover(n: int, iterations: int) -> str:
    lines = header(n, n)
    qubits = list(range(n))
    lines += [f"h q[{i}];" for i in qubits]
    for _ in range(iterations):
        # oracle: phase flip on |1...1>
        lines += gray_mcz(qubits[:-1], qubits[-1])
        # diffusion about the mean
        lines += [f"h q[{i}];" for i in qubits]
        lines += [f"x q[{i}];" for i in qubits]
        lines += gray_mcz(qubits[:-1], qubits[-1])
        lines += [f"x q[{i}];" for i in qubits]
        lines += [f"h q[{i}];" for i in qubits]
    lines += measure_all(n)
    return "\n".join(lines) + "\n"


def vqe(n: int, reps: int = 3, seed: int = 11) -> str:
    rng = np.random.default_rng(seed)
    lines = header(n, n)
    for _ in range(reps):
        for i in range(n):
            lines.append(f"u3({repr(float(rng.uniform(0, 2*math.pi)))},0,0) q[{i}];")
        for i in range(n):
            for j in range(i + 1, n):
                lines.append(f"cx q[{i}],q[{j}];")
    for i in range(n):
        lines.append(f"u3({repr(float(rng.uniform(0, 2*math.pi)))},0,0) q[{i}];")
    lines += measure_all(n)
    return "\n".join(lines) + "\n"


def bernstein_vazirani(n: int) -> str:
    # n-1 data qubits, all-ones secret string, kickback ancilla q[n-1]
    lines = header(n, n - 1)
    lines.append(f"x q[{n-1}];")
    lines += [f"h q[{i}];" for i in range(n)]
    lines += [f"cx q[{i}],q[{n-1}];" for i in range(n - 1)]
    lines += [f"h q[{i}];" for i in range(n - 1)]
    lines += [f"measure q[{i}] -> c[{i}];" for i in range(n - 1)]
    return "\n".join(lines) + "\n"


def qft(n: int) -> str:
    lines = header(n, n)
    for j in range(n):
        lines.append(f"h q[{j}];")
        for k in range(j + 1, n):
            lines += cu1(math.pi / 2 ** (k - j), k, j)
    lines += measure_all(n)
    return "\n".join(lines) + "\n"


def qpe(n_counting: int, phase_num: int = 3, phase_den: int = 16) -> str:
    """Phase estimation of u1(2*pi*phase) with the eigenstate on the last qubit."""
    n = n_counting + 1
    phase = 2 * math.pi * phase_num / phase_den
    lines = header(n, n_counting)
    lines.append(f"x q[{n_counting}];")
    lines += [f"h q[{i}];" for i in range(n_counting)]
    for k in range(n_counting):
        lines += cu1((phase * (2**k)) % (2 * math.pi), k, n_counting)
    # inverse QFT on the counting register
    for j in reversed(range(n_counting)):
        for k in reversed(range(j + 1, n_counting)):
            lines += cu1(-math.pi / 2 ** (k - j), k, j)
        lines.append(f"h q[{j}];")
    lines += [f"measure q[{i}] -> c[{i}];" for i in range(n_counting)]
    return "\n".join(lines) + "\n"


def cuccaro_adder(bits: int = 4, a_val: int = 11, b_val: int = 6) -> str:
    """Ripple-carry adder: q[0]=cin, a[i]=q[1+i], b[i]=q[1+bits+i], cout last."""
    n = 2 * bits + 2
    a = [1 + i for i in range(bits)]
    b = [1 + bits + i for i in range(bits)]
    cin, cout = 0, n - 1
    lines = header(n, bits + 1)
    for i in range(bits):
        if (a_val >> i) & 1:
            lines.append(f"x q[{a[i]}];")
        if (b_val >> i) & 1:
            lines.append(f"x q[{b[i]}];")

    def maj(c, y, x):
        return [f"cx q[{x}],q[{y}];", f"cx q[{x}],q[{c}];", f"ccx q[{c}],q[{y}],q[{x}];"]

    def uma(c, y, x):
        return [f"ccx q[{c}],q[{y}],q[{x}];", f"cx q[{x}],q[{c}];", f"cx q[{c}],q[{y}];"]

    chain = [cin] + a
    for i in range(bits):
        lines += maj(chain[i], b[i], a[i])
    lines.append(f"cx q[{a[-1]}],q[{cout}];")
    for i in reversed(range(bits)):
        lines += uma(chain[i], b[i], a[i])
    for i in range(bits):
        lines.append(f"measure q[{b[i]}] -> c[{i}];")
    lines.append(f"measure q[{cout}] -> c[{bits}];")
    return "\n".join(lines) + "\n"


def _check_mcz(n: int) -> None:
    text = "\n".join(header(n) + gray_mcz(list(range(n - 1)), n - 1))
    u = circuit_unitary(parse_qasm(text))
    expect = np.eye(2**n, dtype=complex)
    expect[-1, -1] = -1
    assert np.max(np.abs(u - expect)) < 1e-9, f"mcz network broken for n={n}"


def _check_adder() -> None:
    from optswap.sim import simulate, zero_state

    for a_val, b_val in ((11, 6), (5, 12), (15, 15)):
        circ = strip_measurements(parse_qasm(cuccaro_adder(4, a_val, b_val)))
        state = simulate(circ)
        idx = int(np.argmax(np.abs(state)))
        total = a_val + b_val
        b_out = sum(((idx >> (1 + 4 + i)) & 1) << i for i in range(4))
        cout = (idx >> 9) & 1
        assert b_out + (cout << 4) == total, (a_val, b_val, b_out, cout)


def main() -> None:
    _check_mcz(3)
    _check_mcz(4)
    _check_adder()
    OUT.mkdir(parents=True, exist_ok=True)
    fixtures = {
        "grover_n4": grover(4, 3),
        "grover_n6": grover(6, 2),
        "grover_n8": grover(8, 1),
        "vqe_n8": vqe(8),
        "vqe_n12": vqe(12),
        "bv_n19": bernstein_vazirani(19),
        "qft_n15": qft(15),
        "qft_n20": qft(20),
        "qpe_n9": qpe(8),
        "adder_n10": cuccaro_adder(4),
    }
    for name, text in fixtures.items():
        circuit = parse_qasm(text)  # must parse cleanly
        path = OUT / f"{name}.qasm"
        path.write_text(text, encoding="utf-8")
        cx = sum(1 for g in circuit.gates if g.kind.value == "cx")
        print(f"{name}: {circuit.num_qubits} qubits, {cx} raw cx -> {path.name}")


if __name__ == "__main__":
    main()

"""Time the numba gate kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --qubits 14 18 --repeat 5
"""
import argparse
import timeit

import numpy as np

from schwinger_trotter.circuit import apply_circuit
from schwinger_trotter.circuit.kernels import NUMBA_AVAILABLE, get_kernels
from schwinger_trotter.lattice import LatticeParams
from schwinger_trotter.trotter_circuits import build_trotter_step

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def kernel_cases(kern, n):
    q, c = n // 2, n // 3
    return {
        "1q": lambda psi: kern.apply_1q(psi, q, H),
        "diag": lambda psi: kern.apply_diag(psi, q, 1.0, -1j),
        "toffoli": lambda psi: kern.apply_mcx(psi, [c, q], n - 1),
        "cphase": lambda psi: kern.apply_cphase(psi, c, q, np.exp(0.3j)),
    }


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_kernels(n_qubits, backends, repeat):
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(2**n_qubits) + 1j * rng.standard_normal(2**n_qubits)
    psi = (psi / np.linalg.norm(psi)).reshape(-1, 1)
    rows = {}
    for name in backends:
        for case, fn in kernel_cases(get_kernels(name), n_qubits).items():
            work = psi.copy()
            fn(work)  # compile / warm up
            rows[(case, name)] = best_of(lambda: fn(work), repeat, 20)
    return rows


def bench_circuit(backends, repeat):
    p = LatticeParams(4, 4, 1.0, 1.0)  # 4 sites, 3-qubit links: 13 register qubits
    c = build_trotter_step(p, 0.1, "neg")
    psi = np.zeros(2**p.n_qubits, dtype=complex)
    psi[0] = 1.0
    out = {}
    for name in backends:
        apply_circuit(c, psi, backend=name)
        out[name] = best_of(lambda: apply_circuit(c, psi, backend=name), repeat, 1)
    return len(c.gates), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[12, 16, 20])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])
    print(f"{'qubits':>6} {'kernel':>8} " + " ".join(f"{b + ' us':>11}" for b in backends)
          + (f" {'speedup':>8}" if len(backends) == 2 else ""))
    for n in args.qubits:
        rows = bench_kernels(n, backends, args.repeat)
        for case in ("1q", "diag", "toffoli", "cphase"):
            times = [rows[(case, b)] for b in backends]
            line = f"{n:>6} {case:>8} " + " ".join(f"{t * 1e6:>11.1f}" for t in times)
            if len(times) == 2:
                line += f" {times[0] / times[1]:>8.2f}"
            print(line)
    n_gates, circ = bench_circuit(backends, args.repeat)
    print(f"\nNEG-style Trotter step on 13 qubits, {n_gates} gates:")
    for name, t in circ.items():
        print(f"  {name:>6}: {t * 1e3:.1f} ms")


if __name__ == "__main__":
    main()

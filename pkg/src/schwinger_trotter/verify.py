"""Verification suites shared by the command line and the acceptance tests.

Each check yields a flat record {check, params, value, bound, pass}.
"""
from __future__ import annotations

import itertools

import numpy as np

from .circuit.ir import Circuit, place
from .circuit.sim import circuit_factors, circuit_to_unitary, distance_up_to_phase
from .error_bounds import (OperatorCache, check_case, empirical_trotter_error,
                           trotter_step_bound)
from .lattice import LatticeParams, embed, local_term
from .trotter_circuits import (MODES, build_decrementer, build_electric_step, build_hopping_step,
                               build_incrementer_ancilla, build_incrementer_qft, build_mass_step,
                               build_trotter_step, dense_trotter_step, electric_oracle,
                               hopping_oracle, shift_oracle, trotter_factors)

CIRCUIT_TOL = 1e-9
CIRCUIT_TIMES = (0.0, 0.1, 0.7)
# above this register width, bound the step distance block by block instead of with full matrices
DENSE_COMPARE_MAX = 10


def record(check: str, params: dict, value: float, bound: float, slack: float = 0.0) -> dict:
    return {"check": check, "params": params, "value": float(value), "bound": float(bound),
            "pass": bool(value <= bound + slack)}


def lattice_for(N: int, eta: int, x: float = 1.0, mu: float = 1.0) -> LatticeParams:
    return LatticeParams(N, 2 ** (eta - 1), x, mu)


def _mass_oracle(params, r, t):
    op = local_term(params, "DM", r)
    d = np.diag(op.matrix).real
    return embed(np.diag(np.exp(-1j * t * d)), op.lo, params.n_qubits)


def _window_product(factors):
    lo = min(l for l, _ in factors)
    hi = max(l + U.shape[0].bit_length() - 1 for l, U in factors)
    P = np.eye(2 ** (hi - lo), dtype=complex)
    for l, U in factors:
        P = embed(U, l - lo, hi - lo) @ P
    return lo, P


def trotter_step_blocks(params: LatticeParams, t: float, mode: str) -> list[tuple[Circuit, int]]:
    """The step circuit cut into term blocks, each with the number of dense factors it implements."""
    n = params.n_qubits
    blocks = []

    def add(build, n_factors):
        c = Circuit(n)
        build(c)
        blocks.append((c, n_factors))

    def electric(r):
        add(lambda c: place(c, build_electric_step(params.eta, t / 2, mode), params.link_qubits(r)), 1)

    for r in range(1, params.N):
        add(lambda c: c.extend(build_mass_step(params, r, t / 2)), 1)
        electric(r)
        add(lambda c: c.extend(build_hopping_step(params, r, t, mode)), 4)
    add(lambda c: c.extend(build_mass_step(params, params.N, t)), 1)
    for r in reversed(range(1, params.N)):
        add(lambda c: c.extend(build_hopping_step(params, r, t, mode, reverse=True)), 4)
        electric(r)
        add(lambda c: c.extend(build_mass_step(params, r, t / 2)), 1)
    return blocks


def blockwise_distance_bound(params: LatticeParams, t: float, mode: str) -> float:
    """Upper bound on the phase-minimised distance of the step circuit from V(t).

    The circuit is checked to be exactly the concatenation of its term blocks;
    then ‖Π a_i − e^{iΣφ_i} Π b_i‖ ≤ Σ ‖a_i − e^{iφ_i} b_i‖ for unitaries, and each
    summand lives on a window of a few qubits.
    """
    blocks = trotter_step_blocks(params, t, mode)
    joined = [g for c, _ in blocks for g in c.gates]
    if joined != build_trotter_step(params, t, mode).gates:
        raise AssertionError("step circuit is not the concatenation of its term blocks")
    ref = trotter_factors(params, t)
    total, j = 0.0, 0
    for c, k in blocks:
        alo, A = _window_product(circuit_factors(c))
        blo, B = _window_product(ref[j:j + k])
        j += k
        lo = min(alo, blo)
        span = max(alo + A.shape[0].bit_length() - 1, blo + B.shape[0].bit_length() - 1) - lo
        total += distance_up_to_phase(embed(A, alo - lo, span), embed(B, blo - lo, span))
    return total


def trotter_step_distances(params: LatticeParams, t: float, modes=MODES) -> dict[str, float]:
    """Distance of each mode's step circuit from the dense V(t).

    Wide registers use the blockwise bound, an upper bound on the
    phase-minimised distance.
    """
    if params.n_qubits <= DENSE_COMPARE_MAX:
        V = dense_trotter_step(params, t)
        return {m: distance_up_to_phase(circuit_to_unitary(build_trotter_step(params, t, m)), V) for m in modes}
    return {m: blockwise_distance_bound(params, t, m) for m in modes}


def circuit_checks(max_eta: int = 3, max_n: int = 4, times=CIRCUIT_TIMES) -> list[dict]:
    """Every built circuit against its dense oracle."""
    out = []
    for eta in range(1, max_eta + 1):
        shift = shift_oracle(eta)
        out.append(record("incrementer_qft", {"eta": eta},
                          distance_up_to_phase(circuit_to_unitary(build_incrementer_qft(eta)), shift), CIRCUIT_TOL))
        out.append(record("incrementer_ancilla", {"eta": eta},
                          distance_up_to_phase(circuit_to_unitary(build_incrementer_ancilla(eta)), shift),
                          CIRCUIT_TOL))
        for mode in MODES:
            out.append(record("decrementer", {"eta": eta, "mode": mode},
                              distance_up_to_phase(circuit_to_unitary(build_decrementer(eta, mode)),
                                                   shift.conj().T), CIRCUIT_TOL))
        params = lattice_for(2, eta)
        for t in times:
            for mode in MODES:
                d = distance_up_to_phase(circuit_to_unitary(build_electric_step(eta, t, mode)),
                                         electric_oracle(eta, t))
                out.append(record("electric", {"eta": eta, "t": t, "mode": mode}, d, CIRCUIT_TOL))
                for reverse in (False, True):
                    d = distance_up_to_phase(circuit_to_unitary(build_hopping_step(params, 1, t, mode, reverse)),
                                             hopping_oracle(params, 1, t, reverse))
                    out.append(record("hopping", {"eta": eta, "t": t, "mode": mode, "reverse": reverse},
                                      d, CIRCUIT_TOL))
            for r in (1, 2):
                d = distance_up_to_phase(circuit_to_unitary(build_mass_step(params, r, t)),
                                         _mass_oracle(params, r, t))
                out.append(record("mass", {"eta": eta, "t": t, "site": r}, d, CIRCUIT_TOL))
            for N in range(2, max_n + 1, 2):
                for mode, d in trotter_step_distances(lattice_for(N, eta), t).items():
                    out.append(record("trotter_step", {"N": N, "eta": eta, "t": t, "mode": mode},
                                      d, CIRCUIT_TOL))
    return out


TROTTER_GRID = {"N": (2, 3), "Lambda": (1, 2), "x": (0.5, 1.0, 2.0), "mu": (0.0, 1.0)}
TROTTER_TIMES = (0.01, 0.1, 0.3)


def grid_params(grid=None):
    grid = grid or TROTTER_GRID
    for N, L, x, mu in itertools.product(grid["N"], grid["Lambda"], grid["x"], grid["mu"]):
        yield LatticeParams(int(N), int(L), float(x), float(mu))


def _p(params: LatticeParams) -> dict:
    return {"N": params.N, "Lambda": params.Lambda, "x": params.x, "mu": params.mu}


def trotter_checks(grid=None, times=TROTTER_TIMES) -> list[dict]:
    """Single-step error bound against the dense error."""
    out = []
    for params in grid_params(grid):
        for t in times:
            out.append(record("trotter_bound", {**_p(params), "t": t},
                              empirical_trotter_error(params, t), trotter_step_bound(params, t)))
    return out


def commutator_checks(grid=None, slack: float = 1e-9) -> list[dict]:
    """Every nested-commutator case bound against brute-force spectral norms."""
    out = []
    for params in grid_params(grid):
        cache = OperatorCache(params)
        for case in range(1, 9):
            worst, bound, n = check_case(params, case, cache)
            out.append(record("commutator_case", {**_p(params), "case": case, "instances": n},
                              worst, bound, slack))
    return out

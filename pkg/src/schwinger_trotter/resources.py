"""Closed-form gate and qubit counts, plus census cross-checks against built circuits."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .circuit.ir import count_gates
from .lattice import LatticeParams
from .mathutil import clamped_log2, floor_log2, ln, log2
from .trotter_circuits import build_incrementer_ancilla, build_squarer, build_trotter_step

T_PER_TOFFOLI = 4


@dataclass(frozen=True)
class CostReport:
    expected_T: float = 0.0
    CNOT: int = 0
    Toffoli: int = 0
    ancillas: int = 0
    total_qubits: int = 0
    trotter_steps: float = 0
    shots_or_queries: float = 0

    def as_dict(self) -> dict:
        return asdict(self)


# -- NEG model ---------------------------------------------------------------

def cnot_per_link(eta: int) -> int:
    return 9 * eta**2 - 7 * eta + 34


def cnot_per_trotter_step(params: LatticeParams) -> int:
    """CNOTs in one NEG-style step: two hopping blocks and two electric halves per link."""
    return (params.N - 1) * cnot_per_link(params.eta)


def cnot_per_trotter_step_parts(params: LatticeParams) -> dict:
    eta, links = params.eta, params.N - 1
    return {
        "hopping": 2 * links * (4 * eta * (eta - 1) + 18),
        "electric": links * (eta + 2) * (eta - 1),
    }


# -- fault-tolerant model ------------------------------------------------------

def tcount_hopping(Lambda: int, delta: float) -> float:
    """Expected T gates for the four hopping exponentials on one link (one ancilla)."""
    _check_delta(delta)
    return 8 * (log2(Lambda) - 1) + 9.2 * clamped_log2(16 / delta, "hopping log argument")


def tcount_mass(delta: float) -> float:
    _check_delta(delta)
    return 1.15 * clamped_log2(2 / delta, "mass log argument")


def toffoli_squarer(eta: int) -> tuple[int, int]:
    """(Toffolis, ancilla bound) quoted for the squarer."""
    if eta < 1:
        raise ValueError("eta must be >= 1")
    fl = floor_log2(eta)
    return (eta - 1) * (12 * eta - 3 * fl - 14), 5 * eta - fl - 1


def adder_toffolis(eta: int) -> int:
    """Toffolis charged per in-place eta-bit addition."""
    return 10 * eta - 3 * floor_log2(eta) - 13


def tcount_electric_ft(eta: int, delta: float) -> float:
    _check_delta(delta)
    toff, _ = toffoli_squarer(eta)
    return 4.45 * eta * clamped_log2(3 * eta / delta, "electric log argument") + 2 * T_PER_TOFFOLI * toff


def ft_qubits(params: LatticeParams) -> int:
    eta = params.eta
    return params.N * (eta + 1) + 4 * eta - floor_log2(eta) - 1


def _check_delta(delta):
    if not delta > 0:
        raise ValueError("error target must be positive")


def trotter_step_prefactor(params: LatticeParams, delta_circ: float) -> float:
    N, eta = params.N, params.eta
    return N * eta**2 + N * eta * ln((6 * N - 5) / delta_circ)


def lambda_factor(params: LatticeParams, delta_circ: float) -> float:
    """The per-step T-count divided by its leading factor, from the expanded polynomial."""
    _check_delta(delta_circ)
    N, eta = params.N, params.eta
    fl = floor_log2(eta)
    arg = (6 * N - 5) / delta_circ
    per_link = (96 * eta**2 + 24 * (1 - eta) * fl + 4.45 * eta * log2(3 * eta)
                + (10.35 + 4.45 * eta) * log2(arg) - 200 * eta + 133.95)
    total = 2 * (N - 1) * per_link + 1.15 * log2(2 * arg)
    return total / trotter_step_prefactor(params, delta_circ)


def tcount_trotter_step_direct(params: LatticeParams, delta_circ: float) -> float:
    """Sum of per-exponential T-counts, each exponential held to δ_circ/(6N−5)."""
    _check_delta(delta_circ)
    N = params.N
    d = delta_circ / (6 * N - 5)
    per_link = tcount_hopping(params.Lambda, d) + tcount_mass(d) + tcount_electric_ft(params.eta, d)
    return 2 * (N - 1) * per_link + tcount_mass(d)


def tcount_trotter_step(params: LatticeParams, delta_circ: float) -> tuple[float, float]:
    """(expected T gates for one step within δ_circ of V(t), λ(δ_circ))."""
    lam = lambda_factor(params, delta_circ)
    return trotter_step_prefactor(params, delta_circ) * lam, lam


# -- census cross-checks -----------------------------------------------------

def census_matches_formulas(params: LatticeParams, mode: str, t: float = 0.1) -> dict:
    """Compare a built Trotter step's census with the closed forms; raises on mismatch."""
    c = count_gates(build_trotter_step(params, t, mode))
    report = {"mode": mode, "N": params.N, "eta": params.eta, "census": c.counts}
    eta, links = params.eta, params.N - 1
    if mode == "neg":
        bound = cnot_per_trotter_step(params)
        report.update(cnot=c.cnot, cnot_bound=bound)
        if c.cnot > bound:
            raise AssertionError(f"NEG census {c.cnot} CNOTs exceeds bound {bound}")
    else:
        inc = count_gates(build_incrementer_ancilla(eta)).toffoli if eta >= 2 else 0
        sq = count_gates(build_squarer(eta)).toffoli
        # per link: two hopping blocks with an incrementer and a decrementer each,
        # and two electric halves with a squarer and its inverse each
        expected = links * (2 * 2 * inc + 2 * 2 * sq)
        report.update(toffoli=c.toffoli, toffoli_expected=expected,
                      squarer_toffoli_formula=toffoli_squarer(eta)[0], squarer_toffoli_built=sq)
        if c.toffoli != expected:
            raise AssertionError(f"FT census {c.toffoli} Toffolis, expected {expected}")
        if sq > toffoli_squarer(eta)[0]:
            raise AssertionError("built squarer uses more Toffolis than the costed one")
    return report

"""Estimating the mean pair density: direct sampling and amplitude estimation.

Amplitude estimation is simulated at the level of its outcome distribution:
the Grover operator is restricted to its two-dimensional invariant subspace,
diagonalised densely, and phase-estimation outcomes are drawn from the exact
distribution for each eigenphase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit.ir import AncillaPool, Circuit, dagger, place
from .circuit.sim import apply_circuit
from .lattice import LatticeParams, pair_number_diagonal, positron_sites
from .mathutil import log2

NORM_TOL = 1e-9
# decay rate of the median-of-R failure probability, from the 8/pi^2 single-run success
MEDIAN_RATE = (math.sqrt(8) / math.pi - math.pi / (2 * math.sqrt(8))) / 2


@dataclass(frozen=True)
class EstimateResult:
    scheme: str
    estimate: float
    rms_target: float
    shots_or_queries: int
    seed: int | None
    truth: float | None = None

    @property
    def error(self) -> float | None:
        return None if self.truth is None else abs(self.estimate - self.truth)

    def as_dict(self) -> dict:
        return {"scheme": self.scheme, "estimate": self.estimate, "truth": self.truth,
                "error": self.error, "rms_target": self.rms_target,
                "shots_or_queries": self.shots_or_queries, "seed": self.seed}


# -- direct sampling ------------------------------------------------------------

def shots_required(eps: float, kappa: float) -> tuple[int, float]:
    """(N_shots, ν) so that the sample mean has rms error ≤ eps when the state error is ≤ eps·√κ."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not 0 <= kappa < 1:
        raise ValueError("kappa must lie in [0, 1)")
    denom = 4 * eps**2 * (1 - kappa)
    nu = denom + 1
    # ν/denom = 1 + 1/denom; keep the exact integer part away from rounding noise
    return 1 + math.floor(1 / denom * (1 + 1e-12)), nu


def density_truth(params: LatticeParams, state: np.ndarray) -> float:
    probs = np.abs(np.asarray(state)) ** 2
    return float(probs @ pair_number_diagonal(params)) / params.N


def _check_normalized(state):
    norm = np.linalg.norm(state)
    if abs(norm - 1) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm {norm:.12g})")


def sample_pair_density(params: LatticeParams, state: np.ndarray, n_shots: int,
                        seed: int | None = None, eps: float = float("nan")) -> EstimateResult:
    """Measure every qubit ``n_shots`` times and average the positron count per site."""
    state = np.asarray(state, dtype=complex)
    if state.shape != (2**params.n_qubits,):
        raise ValueError("state does not match the lattice register")
    _check_normalized(state)
    if n_shots < 1:
        raise ValueError("need at least one shot")
    probs = np.abs(state) ** 2
    rng = np.random.default_rng(seed)
    outcomes = rng.choice(probs.size, size=n_shots, p=probs / probs.sum())
    counts = pair_number_diagonal(params)[outcomes]
    return EstimateResult("sampling", float(counts.mean()) / params.N, eps, n_shots, seed,
                          density_truth(params, state))


# -- generalised Hadamard test ----------------------------------------------------

def basis_state_prep(n_qubits: int, index: int) -> Circuit:
    """X gates taking |0...0> to the basis state ``index``."""
    c = Circuit(n_qubits, name="prep")
    for q in range(n_qubits):
        if index >> q & 1:
            c.append("X", q)
    return c


def hadamard_target_qubits(m: int, params: LatticeParams | None = None) -> list[int]:
    """Qubits of the 2^m positron sites probed by the test.

    With ``params`` these sit in the full lattice register; without, the
    register is assumed to hold the 2^(m+1) site qubits only.
    """
    n_sites = 2 ** (m + 1)
    if params is None:
        return [r - 1 for r in range(2, n_sites + 1, 2)]
    if params.N != n_sites:
        raise ValueError(f"m={m} needs N={n_sites} sites, got N={params.N}")
    return [params.site_qubit(r) for r in positron_sites(params)]


def build_hadamard_test(m: int, state_prep: Circuit, params: LatticeParams | None = None) -> Circuit:
    """Averaged Hadamard test over 2^(m+2) unitaries: -Z on each positron site, then identities.

    The all-zeros outcome on the whole register has probability
    |sum_j <psi|U_j|psi> / 2^(m+2)|^2.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    targets = hadamard_target_qubits(m, params)
    n_sys = state_prep.n_qubits
    if max(targets) >= n_sys:
        raise ValueError("state preparation register is too small for the test")
    k = m + 2
    ctrl = list(range(n_sys, n_sys + k))
    c = Circuit(n_sys + k, name=f"hadamard_test_m{m}")
    place(c, state_prep, list(range(n_sys)))
    for q in ctrl:
        c.append("H", q)
    pool = AncillaPool(c)
    for j, site in enumerate(targets):
        flips = [ctrl[b] for b in range(k) if not j >> b & 1]
        for q in flips:
            c.append("X", q)
        chain = [pool.alloc() for _ in range(k - 1)]
        c.append("Toffoli", ctrl[0], ctrl[1], chain[0])
        for i in range(1, k - 1):
            c.append("Toffoli", chain[i - 1], ctrl[i + 1], chain[i])
        top = chain[-1]
        # controlled -Z = CZ followed by Z on the control
        c.append("H", site).append("CNOT", top, site).append("H", site)
        c.append("Z", top)
        for i in range(k - 2, 0, -1):
            c.append("AndUncompute", chain[i - 1], ctrl[i + 1], chain[i])
        c.append("AndUncompute", ctrl[0], ctrl[1], chain[0])
        for a in reversed(chain):
            pool.release(a)
        for q in flips:
            c.append("X", q)
    for q in ctrl:
        c.append("H", q)
    place(c, dagger(state_prep), list(range(n_sys)))
    return c


def zero_outcome_probability(circuit: Circuit) -> float:
    """Probability of reading all register qubits as 0 after running ``circuit`` on |0...0>."""
    psi = np.zeros(2**circuit.n_qubits, dtype=complex)
    psi[0] = 1.0
    return float(abs(apply_circuit(circuit, psi)[0]) ** 2)


def hadamard_analytic(m: int, state: np.ndarray, targets: list[int]) -> float:
    """|sum_j <psi|U_j|psi> / 2^(m+2)|^2 evaluated from the state vector."""
    probs = np.abs(state) ** 2
    idx = np.arange(probs.size)
    total = 3 * 2**m  # identity terms; each -Z contributes 2n - 1
    for q in targets:
        total += 2 * float(probs @ (idx >> q & 1)) - 1
    return (total / 2 ** (m + 2)) ** 2


def count_from_probability(m: int, prob: float) -> float:
    """Invert the test: expected positron count 2^m(2√P − 1)."""
    return 2**m * (2 * math.sqrt(max(prob, 0.0)) - 1)


def density_from_probability(m: int, prob: float) -> float:
    """Mean positron density per site, clipped to its physical range [0, 1/2]."""
    return min(max(count_from_probability(m, prob) / 2 ** (m + 1), 0.0), 0.5)


def householder_prep(weights) -> np.ndarray:
    """Real orthogonal matrix whose first column is sqrt(a / ‖a‖₁)."""
    a = np.asarray(weights, dtype=float)
    if a.ndim != 1 or np.any(a < 0) or not a.sum() > 0:
        raise ValueError("weights must be non-negative with a positive sum")
    v = np.sqrt(a / a.sum())
    e0 = np.zeros_like(v)
    e0[0] = 1.0
    w = e0 - v
    if np.linalg.norm(w) < 1e-15:
        return np.eye(v.size)
    return np.eye(v.size) - 2 * np.outer(w, w) / (w @ w)


def weighted_hadamard_probability(state: np.ndarray, unitaries: list[np.ndarray], weights) -> float:
    """Run the weighted test densely: prepare the control, select, unprepare, project on |0>|psi>."""
    state = np.asarray(state, dtype=complex)
    _check_normalized(state)
    if len(unitaries) != len(weights):
        raise ValueError("need one weight per unitary")
    prep = householder_prep(weights)
    reg = np.outer(prep[:, 0], state)  # control |k> (row) times |psi>
    for k, U in enumerate(unitaries):
        reg[k] = U @ reg[k]
    reg = prep.T @ reg
    return float(abs(np.vdot(state, reg[0])) ** 2)


def weighted_hadamard_analytic(state: np.ndarray, unitaries: list[np.ndarray], weights) -> float:
    a = np.asarray(weights, dtype=float)
    s = sum(w * np.vdot(state, U @ state) for w, U in zip(a, unitaries))
    return float(abs(s / a.sum()) ** 2)


# -- amplitude estimation -----------------------------------------------------------

@dataclass(frozen=True)
class AEConfig:
    m: int
    eps_L: float
    L: int
    R: int
    eps_qft: float


def grover_iterations(eps_L: float) -> int:
    """Smallest L with √2π/L + (π/L)^2 ≤ eps_L."""
    if not eps_L > 0:
        raise ValueError("eps_L must be positive")
    L = max(1, math.floor(math.pi * (1 + math.sqrt(1 + 2 * eps_L)) / (math.sqrt(2) * eps_L)) - 1)
    while math.sqrt(2) * math.pi / L + (math.pi / L) ** 2 > eps_L:
        L += 1
    return L


def median_repetitions_bound(eps: float) -> float:
    """Closed-form ceiling on the repetitions, (8√2π/(16 − π²))·ln(5/eps²)."""
    return 8 * math.sqrt(2) * math.pi / (16 - math.pi**2) * math.log(5 / eps**2)


def median_repetitions(eps: float, eps_qft: float) -> int:
    """Smallest R with exp(-c·R) ≤ eps²/(2 − eps²) − 2·eps_qft.

    R is bumped to odd when that stays under the closed-form ceiling;
    an even R keeps its lower median.
    """
    room = eps**2 / (2 - eps**2) - 2 * eps_qft
    if not room > 0:
        raise ValueError("Fourier-transform budget leaves no room for the median bound")
    R = max(1, math.ceil(-math.log(room) / MEDIAN_RATE))
    if R % 2 == 0 and R + 1 <= median_repetitions_bound(eps):
        R += 1
    return R


def ae_config(eps: float, m: int = 1) -> AEConfig:
    if not 0 < eps < math.sqrt(2):
        raise ValueError("eps must lie in (0, √2)")
    eps_L = eps / 2
    # eps/8 leaves a negative margin in the median bound; eps²/8 keeps it positive
    eps_qft = eps**2 / 8
    return AEConfig(m, eps_L, grover_iterations(eps_L), median_repetitions(eps, eps_qft), eps_qft)


def grover_eigenphases(prepared: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases (in turns) of the Grover operator on span{|0>, U|0>} and the overlap weights.

    ``prepared`` is U|0>; the marked state is |0>.  The operator is
    -(I − 2U|0><0|U†)(I − 2|0><0|), whose eigenphases are ±2θ with a = sin²θ.
    """
    psi = np.asarray(prepared, dtype=complex)
    g = np.zeros_like(psi)
    g[0] = 1.0
    rest = psi - psi[0] * g
    nb = np.linalg.norm(rest)
    if nb < 1e-14:  # U|0> is |0> up to phase: a = 1
        return np.array([0.5]), np.array([1.0])
    b = rest / nb
    basis = np.stack([g, b], axis=1)

    def grover(v):
        v = v - 2 * g * np.vdot(g, v)
        v = v - 2 * psi * np.vdot(psi, v)
        return -v

    Q = basis.conj().T @ np.stack([grover(basis[:, 0]), grover(basis[:, 1])], axis=1)
    vals, vecs = np.linalg.eig(Q)
    start = basis.conj().T @ psi
    weights = np.abs(vecs.conj().T @ start) ** 2
    phases = np.mod(np.angle(vals) / (2 * np.pi), 1.0)
    return phases, weights / weights.sum()


def phase_estimation_distribution(phases, weights, M: int) -> np.ndarray:
    """Exact outcome probabilities of M-point phase estimation on a mixture of eigenphases."""
    y = np.arange(M)
    j = np.arange(M)[:, None]
    probs = np.zeros(M)
    for phi, w in zip(phases, weights):
        amp = np.exp(2j * np.pi * j * (phi - y / M)).sum(axis=0) / M
        probs += w * np.abs(amp) ** 2
    return probs / probs.sum()


def estimate_amplitude(prepared: np.ndarray, M: int, R: int, rng: np.random.Generator) -> float:
    """Median over R phase-estimation runs of sin²(πy/M)."""
    phases, weights = grover_eigenphases(prepared)
    dist = phase_estimation_distribution(phases, weights, M)
    ys = rng.choice(M, size=R, p=dist)
    ests = np.sort(np.sin(np.pi * ys / M) ** 2)
    return float(ests[(R - 1) // 2])  # lower median


def simulate_amplitude_estimation(state_prep: Circuit, config: AEConfig, seed: int | None = None,
                                  params: LatticeParams | None = None,
                                  eps: float = float("nan")) -> EstimateResult:
    test = build_hadamard_test(config.m, state_prep, params)
    psi0 = np.zeros(2**test.n_qubits, dtype=complex)
    psi0[0] = 1.0
    prepared = apply_circuit(test, psi0)
    rng = np.random.default_rng(seed)
    a_hat = estimate_amplitude(prepared, config.L, config.R, rng)

    zero = np.zeros(2**state_prep.n_qubits, dtype=complex)
    zero[0] = 1.0
    state = apply_circuit(state_prep, zero)
    targets = hadamard_target_qubits(config.m, params)
    truth = density_from_probability(config.m, hadamard_analytic(config.m, state, targets))
    return EstimateResult("ae", density_from_probability(config.m, a_hat), eps,
                          config.L * config.R, seed, truth)


def ae_query_count(eps: float) -> float:
    if not eps > 0:
        raise ValueError("eps must be positive")
    return 128 * math.pi / (16 - math.pi**2) * (math.pi / eps + 2) * math.log(5 / eps**2)


def qft_tgate_count(eps: float) -> float:
    lg = log2(2 * math.sqrt(2) * math.pi / eps + 4)
    return 7 / 3 * lg**2 * log2(16 * lg**2 / eps**2)


def ae_tgate_count(eps: float, m: int) -> float:
    """Auxiliary T gates of amplitude estimation: the select ladders plus the Fourier transforms."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if m < 0:
        raise ValueError("m must be non-negative")
    # the (m - 1) factor would go negative for a single probed site; no ladder is needed there
    ladder = 32 * math.pi * (2 ** (m + 4) + 8) * max(m - 1, 0) / (16 - math.pi**2) * (math.pi / eps + 2)
    return (ladder + qft_tgate_count(eps)) * math.log(5 / eps**2)

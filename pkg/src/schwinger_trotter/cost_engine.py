"""Whole-simulation cost reports built from step counts, per-step costs and measurement.

Each cost comes in two shapes.  The compositional one chains the ingredient
functions (step count, per-step synthesis cost, shot or query count); the
``*_printed`` ones evaluate the displayed closed forms.  With real-valued step
and shot counts (``continuous=True``) the two agree identically, which is how
the closed forms are checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .error_bounds import bound_polynomial, required_steps, rho
from .lattice import LatticeParams
from .measurement import ae_query_count, ae_tgate_count, qft_tgate_count, shots_required
from .mathutil import ceil_log2, floor_log2, log2
from .resources import (CostReport, cnot_per_link, ft_qubits, lambda_factor,
                        tcount_trotter_step, toffoli_squarer)


@dataclass(frozen=True)
class ErrorBudget:
    eps: float
    kappa: float
    tau: float
    delta_trot: float
    delta_circ: float
    delta_g: float = 0.0


def _check_fraction(v, name):
    if not 0 < v < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {v}")


def _check_positive(v, name):
    if not v > 0:
        raise ValueError(f"{name} must be positive, got {v}")


def _scale(params: LatticeParams, T: float) -> float:
    return math.sqrt(params.N) * T**1.5 * params.Lambda * math.sqrt(params.x)


def steps_for(params: LatticeParams, T: float, delta: float, continuous: bool = False) -> float:
    """Trotter steps for error delta: the integer count, or its real-valued upper form."""
    if continuous:
        return _scale(params, T) * rho(params, T, delta) / math.sqrt(delta)
    return required_steps(params, T, delta)[0]


def _toffolis_per_step(params: LatticeParams) -> int:
    # two electric halves per link, each a squarer and its inverse
    return 2 * (params.N - 1) * 2 * toffoli_squarer(params.eta)[0]


# -- direct sampling -------------------------------------------------------------

def sampling_budget(eps: float, kappa: float, tau: float, steps: float) -> ErrorBudget:
    state = eps * math.sqrt(kappa)
    return ErrorBudget(eps, kappa, tau, tau * state, (1 - tau) * state / steps)


def ft_sampling_cost(params: LatticeParams, T: float, eps: float, kappa: float = 0.5, tau: float = 0.5,
                     continuous: bool = False) -> CostReport:
    """T gates to estimate the mean pair density at time T by repeated sampling."""
    _check_positive(eps, "eps")
    _check_positive(T, "T")
    _check_fraction(kappa, "kappa")
    _check_fraction(tau, "tau")
    s = steps_for(params, T, tau * eps * math.sqrt(kappa), continuous)
    budget = sampling_budget(eps, kappa, tau, s)
    c_trot, _ = tcount_trotter_step(params, budget.delta_circ)
    shots, nu = shots_required(eps, kappa)
    if continuous:
        shots = nu / (4 * eps**2 * (1 - kappa))
    n_q = ft_qubits(params)
    return CostReport(expected_T=s * c_trot * shots, Toffoli=round(s * shots * _toffolis_per_step(params)),
                      ancillas=n_q - params.n_qubits, total_qubits=n_q, trotter_steps=s,
                      shots_or_queries=shots)


def sampling_cost_printed(params: LatticeParams, T: float, eps: float) -> float:
    """The displayed closed form for the sampling cost at kappa = tau = 1/2."""
    N, eta, L, x = params.N, params.eta, params.Lambda, params.x
    r = rho(params, T, eps / math.sqrt(8))
    arg = 2**2.25 * math.sqrt(N) * (6 * N - 5) * T**1.5 * L * math.sqrt(x) * r / eps**1.5
    gamma = (eta + math.log(arg)) / math.log(arg)
    lam = lambda_factor(params, eps**1.5 / (2**2.25 * math.sqrt(N) * T**1.5 * L * math.sqrt(x) * r))
    _, nu = shots_required(eps, 0.5)
    return ((N * T) ** 1.5 * L * log2(2 * L) * math.sqrt(x) / (2**0.25 * eps**2.5)
            * math.log(arg) * gamma * r * lam * nu)


# -- plain time evolution --------------------------------------------------------------

def ft_evolution_cost(params: LatticeParams, T: float, delta: float, continuous: bool = False) -> CostReport:
    """T gates for W(T) within delta of e^{-iHT}, split evenly between Trotter and synthesis error."""
    _check_positive(delta, "delta")
    _check_positive(T, "T")
    s = steps_for(params, T, delta / 2, continuous)
    c_trot, _ = tcount_trotter_step(params, delta / (2 * s))
    n_q = ft_qubits(params)
    return CostReport(expected_T=s * c_trot, Toffoli=round(s * _toffolis_per_step(params)),
                      ancillas=n_q - params.n_qubits, total_qubits=n_q, trotter_steps=s)


def evolution_cost_printed(params: LatticeParams, T: float, delta: float) -> float:
    N, eta, L, x = params.N, params.eta, params.Lambda, params.x
    r = rho(params, T, delta / 2)
    arg = 2**1.5 * (6 * N - 5) * math.sqrt(N) * T**1.5 * L * math.sqrt(x) * r / delta**1.5
    gamma = (eta + math.log(arg)) / math.log(arg)
    lam = lambda_factor(params, delta**1.5 / (2**1.5 * math.sqrt(N) * T**1.5 * L * math.sqrt(x) * r))
    return N**1.5 * T**1.5 * L * eta * math.sqrt(x) / math.sqrt(delta / 2) * math.log(arg) * gamma * r * lam


# -- amplitude estimation -------------------------------------------------------------------

def ae_alpha(eps: float) -> float:
    return 1 + 2 * eps / math.pi


def ae_zeta(params: LatticeParams, T: float, eps: float) -> float:
    return 1 + params.eta / math.log(_ae_log_arg(params, T, eps))


def _ae_log_arg(params, T, eps):
    return 384 * math.sqrt(params.N * params.x) * T**1.5 * params.Lambda * rho(params, T, eps / 16) / eps**1.5


def control_bits(params: LatticeParams) -> int:
    """Size m of the test's control index: N = 2^(m+1) sites."""
    return max(ceil_log2(params.N / 2), 0)


def ae_qubits(params: LatticeParams, eps: float) -> int:
    N, eta = params.N, params.eta
    return (N * (eta + 1) + 3 * eta - floor_log2(2 * eta - 1) + 1 + 2 * control_bits(params)
            + math.ceil(log2(2 * math.sqrt(2) * math.pi / eps + 4)))


def ft_ae_cost(params: LatticeParams, T: float, eps: float, continuous: bool = True) -> CostReport:
    """T gates to estimate the mean pair density by amplitude estimation.

    The oracle is held to eps/8, half Trotter and half synthesis error.  Each
    query runs the controlled evolution, which doubles the rotations.
    """
    _check_positive(eps, "eps")
    _check_positive(T, "T")
    s = steps_for(params, T, eps / 16, continuous)
    queries = ae_query_count(eps)
    if not continuous:
        queries = math.ceil(queries)
    c_trot, _ = tcount_trotter_step(params, eps / (16 * s))
    aux = ae_tgate_count(eps, control_bits(params))
    n_q = ae_qubits(params, eps)
    return CostReport(expected_T=2 * queries * s * c_trot + aux,
                      Toffoli=round(2 * queries * s * _toffolis_per_step(params)),
                      ancillas=n_q - params.n_qubits, total_qubits=n_q, trotter_steps=s,
                      shots_or_queries=queries)


def ae_cost_printed(params: LatticeParams, T: float, eps: float) -> float:
    """The displayed closed form for the amplitude-estimation cost, evaluated literally.

    Its argument of lambda carries eps^(5/2) where composing the step count
    with the synthesis budget gives eps^(3/2), and the auxiliary term uses
    (16N+8)log(N/2); ``ft_ae_cost`` is the authoritative value.
    """
    N, eta, L, x = params.N, params.eta, params.Lambda, params.x
    r = rho(params, T, eps / 16)
    arg = _ae_log_arg(params, T, eps)
    lam = lambda_factor(params, eps**2.5 / (64 * math.sqrt(N * x) * T**1.5 * L * r))
    main = (168 * math.pi**2 * math.sqrt(x) * (N * T) ** 1.5 * L * eta * math.log(5 / eps**2) / eps**1.5
            * r * ae_alpha(eps) * ae_zeta(params, T, eps) * math.log(arg) * lam)
    ladder = 32 * math.pi**2 * (16 * N + 8) * log2(N / 2) / ((16 - math.pi**2) * eps) * ae_alpha(eps)
    return main + (ladder + qft_tgate_count(eps)) * math.log(5 / eps**2)


# -- error-split optimisation -----------------------------------------------------------------

def _split_cost(params, T, eps, kappa, tau):
    return ft_sampling_cost(params, T, eps, kappa, tau).expected_T


def optimize_error_split(params: LatticeParams, T: float, eps: float,
                         step: float = 0.01, resolution: float = 1e-4) -> tuple[float, float, float]:
    """(kappa*, tau*, cost*) minimising the sampling cost.

    Grid search over the open unit square followed by alternating
    one-dimensional refinement; fully deterministic.
    """
    _check_positive(eps, "eps")
    grid = np.arange(1, round(1 / step)) * step
    best = (math.inf, 0.5, 0.5)
    for k in grid:
        for t in grid:
            c = _split_cost(params, T, eps, k, t)
            if c < best[0]:
                best = (c, float(k), float(t))
    cost, k, t = best
    h = step
    while h > resolution:
        h /= 10
        improved = True
        while improved:
            improved = False
            for dk, dt in ((h, 0), (-h, 0), (0, h), (0, -h)):
                nk, nt = k + dk, t + dt
                if 0 < nk < 1 and 0 < nt < 1:
                    c = _split_cost(params, T, eps, nk, nt)
                    if c < cost:
                        cost, k, t, improved = c, nk, nt, True
    return k, t, cost


# -- NEG model ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class NegResult:
    eps_min: float
    delta_trot: float
    n_gates: float
    objective: float
    gamma: float


def neg_gamma(params: LatticeParams) -> float:
    return math.sqrt(bound_polynomial(params)) / (params.Lambda * math.sqrt(params.x))


def neg_cnot_count(params: LatticeParams, T: float, delta: float) -> float:
    """CNOTs over the whole evolution at Trotter error delta (real-valued step count)."""
    return (params.N - 1) * cnot_per_link(params.eta) * steps_for(params, T, delta, continuous=True)


def neg_objective_at(params: LatticeParams, T: float, delta_g: float, delta: float) -> float:
    """Hardware error δ_g·N_g(δ) plus half the Trotter error; minimised by the optimal delta."""
    return delta_g * neg_cnot_count(params, T, delta) + delta / 2


def neg_min_rms_error(params: LatticeParams, T: float, delta_g: float) -> NegResult:
    _check_positive(delta_g, "delta_g")
    _check_positive(T, "T")
    N = params.N
    g = neg_gamma(params)
    c = cnot_per_link(params.eta)
    delta = T * (delta_g * g * math.sqrt(N) * (N - 1) * params.Lambda * math.sqrt(params.x) * c) ** (2 / 3)
    eps_min = 1.5 * delta + delta_g * (N - 1) * g
    return NegResult(eps_min, delta, neg_cnot_count(params, T, delta),
                     neg_objective_at(params, T, delta_g, delta), g)


NEG_TABLE_X = (0.01, 0.1, 1.0, 10.0)
NEG_TABLE_DELTA_G = (0.0, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3)
UNRESOLVED_MARK = "\N{EM DASH}"


def neg_error_table(xs=NEG_TABLE_X, delta_gs=NEG_TABLE_DELTA_G, N: int = 2, Lambda: int = 2,
                    mu: float = 1.0) -> list[dict]:
    """Squared minimum rms error and CNOTs per shot on an (x, δ_g) grid with T = 10/x.

    Cells whose squared error exceeds 1/4, the range of the squared density,
    are marked unresolved.
    """
    rows = []
    for x in xs:
        params = LatticeParams(N, Lambda, float(x), float(mu))
        T = 10 / x
        for dg in delta_gs:
            if dg == 0:
                eps2, n_g = 0.0, math.inf
            else:
                res = neg_min_rms_error(params, T, dg)
                eps2, n_g = res.eps_min**2, res.n_gates
            rows.append({"x": x, "delta_g": dg, "T": T, "eps_min_sq": eps2, "n_gates": n_g,
                         "resolved": eps2 <= 0.25})
    return rows


def render_neg_table(rows: list[dict]) -> str:
    xs = sorted({r["x"] for r in rows})
    dgs = sorted({r["delta_g"] for r in rows})
    cell = {(r["x"], r["delta_g"]): r for r in rows}
    head = "x \\ delta_g".ljust(12) + "".join(f"{dg:>22g}" for dg in dgs)
    lines = [head]
    for x in xs:
        parts = []
        for dg in dgs:
            r = cell[(x, dg)]
            if r["resolved"]:
                parts.append(f"{r['eps_min_sq']:>10.3g} / {r['n_gates']:<9.3g}")
            else:
                parts.append(f"{UNRESOLVED_MARK:>22}")
        lines.append(f"{x:<12g}" + "".join(parts))
    return "\n".join(lines)


# -- Lieb-Robinson sublattices ------------------------------------------------------------------

@dataclass(frozen=True)
class LiebRobinsonParams:
    xi: float
    eta_lr: float
    block_length: int
    n_eff: int
    cost_scaling: float
    sign_flag: bool


def lr_velocity(params: LatticeParams) -> float:
    return (8 * params.x + params.mu / 2 + params.Lambda**2) * math.e


def lr_eta(params: LatticeParams) -> float:
    return (params.mu + 4 * params.Lambda) / (params.mu + 2 * params.Lambda**2)


def _lr_inner(log_target, xi, eta_lr, T):
    return log_target - math.log(2 * xi * abs(T) / math.sqrt(eta_lr)) - xi * abs(T) * math.sqrt(8 * eta_lr)


def lieb_robinson_block(params: LatticeParams, T: float, delta: float, eps: float | None = None) -> LiebRobinsonParams:
    """Block length l for evolution error delta, the effective lattice size for rms target eps
    (defaults to delta), and the amplitude-estimation cost with N replaced by that size.

    ``sign_flag`` marks points where the expression inside the absolute value
    is positive, where the block length stops growing with T.
    """
    _check_positive(delta, "delta")
    _check_positive(T, "T")
    eps = delta if eps is None else eps
    xi, eta_lr = lr_velocity(params), lr_eta(params)
    inner_l = _lr_inner(math.log(math.sqrt(delta)), xi, eta_lr, T)
    inner_n = _lr_inner(math.log(eps), xi, eta_lr, T)
    n_eff = math.ceil(abs(inner_n))
    sub = replace(params, N=max(2, n_eff))
    return LiebRobinsonParams(xi, eta_lr, math.ceil(abs(inner_l)), n_eff,
                              ft_ae_cost(sub, T, eps).expected_T, inner_l > 0 or inner_n > 0)


# -- comparison sweep ---------------------------------------------------------------------------

def comparison_grid():
    """The default comparison sweep: (N, Lambda, T, eps)."""
    return [(N, L, T, e) for N in (8, 16, 32, 64) for L in (2, 4, 8) for T in (1, 10) for e in (0.1, 0.05, 0.01)]


def comparison_row(N: int, Lambda: int, T: float, eps: float, x: float = 1.0, mu: float = 1.0,
                   optimize: bool = True) -> dict:
    params = LatticeParams(N, Lambda, x, mu)
    half = ft_sampling_cost(params, T, eps).expected_T
    ae = ft_ae_cost(params, T, eps).expected_T
    row = {"N": N, "Lambda": Lambda, "T": T, "eps": eps, "sampling_T": half, "ae_T": ae, "ratio": ae / half}
    if optimize:
        k, t, best = optimize_error_split(params, T, eps)
        row.update(sampling_opt_T=best, kappa_opt=k, tau_opt=t, gain=half / best)
    return row


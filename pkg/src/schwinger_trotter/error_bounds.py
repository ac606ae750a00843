"""Second-order Trotter error: closed-form commutator bounds and dense checks.

Operators are named by tuples: ("D", r) is the diagonal term on site r
(mass plus the electric energy of link r), ("T", r, i) the i-th hopping piece
on link r.  Terms past the lattice edge are zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .circuit.sim import spectral_norm
from .lattice import (LatticeParams, build_dense_hamiltonian, check_dense_limit,
                      exact_propagator, local_term)
from .trotter_circuits import dense_trotter_step

PIECES = (1, 2, 3, 4)


def commutator_bound_case(case_id: int, params: LatticeParams) -> float:
    """Closed-form bound on one family of nested commutators (cases 1..8)."""
    x, mu, L = params.x, params.mu, params.Lambda
    if case_id == 1:
        return x * (2 * L**2 + (2 + 2 * mu) * L + mu**2 / 2 + mu + 0.5)
    if case_id in (2, 3):
        return x**2 * mu / 2
    if case_id == 4:
        return x**3 / 2
    if case_id in (5, 8):
        return x**2 * (mu / 2 + L + 0.5)
    if case_id == 6:
        return x * mu * (mu / 2 + L + 0.5)
    if case_id == 7:
        return x * mu**2 / 2
    raise ValueError(f"case id must be in 1..8, got {case_id}")


def bound_polynomial(params: LatticeParams) -> float:
    """Per-site coefficient B of t^3 in the single-step bound."""
    x, mu, L = params.x, params.mu, params.Lambda
    return (2 / 3 * x * L**2 + (2 * x**2 + 5 / 6 * x * mu + 2 / 3 * x) * L
            + 39 / 8 * x**3 + 25 / 12 * x**2 * mu + x**2 + x * mu**2 / 3
            + 5 / 12 * x * mu + x / 6)


def chi(params: LatticeParams) -> float:
    return params.N * bound_polynomial(params)


def trotter_step_bound(params: LatticeParams, t: float) -> float:
    """Upper bound on ‖V(t) − e^{−iHt}‖."""
    return chi(params) * abs(t) ** 3


# -- the full nested-commutator sum ------------------------------------------

@dataclass(frozen=True)
class CommutatorTerm:
    weight: float
    triple: tuple
    case: int


def _family(weight, case, gen):
    return [CommutatorTerm(weight, trip, case) for trip in gen]


def bigcombound_terms(r: int) -> list[CommutatorTerm]:
    """Nested commutators contributed by site r, with weights and bounding case.

    Terms are listed as if the lattice had no right edge; evaluating missing
    terms as zero (brute force) or at full bound (closed form) reproduces the
    boundary overcount of the closed form.
    """
    D = lambda s: ("D", s)  # noqa: E731
    T = lambda s, i: ("T", s, i)  # noqa: E731
    P = PIECES
    w12, w24 = 1 / 12, 1 / 24
    terms = []
    terms += _family(w12, 1, ((D(r), T(r, i), D(r)) for i in P))
    terms += _family(w12, 2, ((T(r, i), D(r + 1), T(r, i)) for i in P))
    terms += _family(w12, 4, ((T(r, i), T(r, j), T(r, i)) for i in P for j in P if j > i))
    terms += _family(w12, 4, ((T(r, i), T(r + 1, j), T(r, i)) for i in P for j in P))
    terms += _family(w24, 5, ((D(r), T(r, i), T(r, j)) for i in P for j in P))
    terms += _family(w24, 6, ((D(r), T(r, i), D(r + 1)) for i in P))
    terms += _family(w24, 5, ((D(r), T(r, i), T(r + 1, j)) for i in P for j in P))
    terms += _family(w24, 4, ((T(r, i), T(r, j), T(r, k))
                              for i in P for j in P for k in P if j > i and k > i))
    terms += _family(w24, 3, ((T(r, i), T(r, j), D(r + 1)) for i in P for j in P if j > i))
    terms += _family(w24, 4, ((T(r, i), T(r, j), T(r + 1, k))
                              for i in P for j in P if j > i for k in P))
    terms += _family(w24, 2, ((T(r, i), D(r + 1), T(r, j)) for i in P for j in P if j > i))
    terms += _family(w24, 7, ((T(r, i), D(r + 1), D(r + 1)) for i in P))
    terms += _family(w24, 2, ((T(r, i), D(r + 1), T(r + 1, j)) for i in P for j in P))
    terms += _family(w24, 4, ((T(r, i), T(r + 1, j), T(r, k))
                              for i in P for j in P for k in P if k > i))
    terms += _family(w24, 8, ((T(r, i), T(r + 1, j), D(r + 1)) for i in P for j in P))
    terms += _family(w24, 4, ((T(r, i), T(r + 1, j), T(r + 1, k)) for i in P for j in P for k in P))
    terms += _family(w24, 3, ((T(r, i), T(r + 1, j), D(r + 2)) for i in P for j in P))
    terms += _family(w24, 4, ((T(r, i), T(r + 1, j), T(r + 2, k)) for i in P for j in P for k in P))
    return terms


def bigcombound_closed_form(params: LatticeParams, t: float) -> float:
    """The commutator sum with every summand replaced by its case bound."""
    per_site = sum(term.weight * commutator_bound_case(term.case, params) for term in bigcombound_terms(1))
    return params.N * per_site * abs(t) ** 3


# -- dense evaluation ----------------------------------------------------------

class OperatorCache:
    """Dense D_r and T_r^(i) for one lattice, built on demand."""

    def __init__(self, params: LatticeParams, dense_limit: int | None = None):
        check_dense_limit(params.n_qubits, dense_limit)
        self.params = params
        self._ops: dict = {}

    def __getitem__(self, key) -> np.ndarray | None:
        if key not in self._ops:
            self._ops[key] = self._build(key)
        return self._ops[key]

    def _build(self, key):
        p, n = self.params, self.params.n_qubits
        if key[0] == "D":
            r = key[1]
            if not 1 <= r <= p.N:
                return None
            m = local_term(p, "DM", r).embed(n)
            if r < p.N:
                m = m + local_term(p, "DE", r).embed(n)
            return m
        _, r, i = key
        if not 1 <= r <= p.N - 1:
            return None
        return local_term(p, "T", r, i).embed(n)


def nested_commutator_norm(A: np.ndarray, B: np.ndarray, C: np.ndarray) -> float:
    AB = A @ B - B @ A
    return spectral_norm(AB @ C - C @ AB)


def brute_force_nested_commutator(params: LatticeParams, triple, cache: OperatorCache | None = None) -> float:
    """‖[[A,B],C]‖ for named operators; zero when any operator lies off the lattice."""
    cache = cache or OperatorCache(params)
    ops = [cache[k] for k in triple]
    if any(o is None for o in ops):
        return 0.0
    return nested_commutator_norm(*ops)


def bigcombound_brute_force(params: LatticeParams, t: float, cache: OperatorCache | None = None) -> float:
    cache = cache or OperatorCache(params)
    total = 0.0
    for r in range(1, params.N + 1):
        for term in bigcombound_terms(r):
            total += term.weight * brute_force_nested_commutator(params, term.triple, cache)
    return total * abs(t) ** 3


def case_instances(params: LatticeParams, case_id: int) -> list[tuple]:
    """Every operator triple on the lattice that matches a case's hypotheses."""
    links = range(1, params.N)
    sites = range(1, params.N + 1)
    T = [("T", r, i) for r in links for i in PIECES]
    out = []
    if case_id == 1:
        out = [(("D", r), ("T", r, i), ("D", r)) for r in links for i in PIECES]
    elif case_id == 2:
        out = [(a, ("D", s), c) for a in T for s in sites if s != a[1] for c in T]
    elif case_id == 3:
        out = [(a, b, ("D", s)) for a in T for b in T for s in sites if s not in (a[1], b[1])]
    elif case_id == 4:
        out = list(product(T, T, T))
    elif case_id == 5:
        out = [(("D", r), ("T", r, i), b) for r in links for i in PIECES for b in T]
    elif case_id == 6:
        out = [(("D", r), ("T", r, i), ("D", r + 1)) for r in links for i in PIECES]
    elif case_id == 7:
        out = [(("T", r, i), ("D", r + 1), ("D", r + 1)) for r in links for i in PIECES]
    elif case_id == 8:
        out = [(("T", r, i), ("T", r + 1, j), ("D", r + 1))
               for r in links if r + 1 <= params.N - 1 for i in PIECES for j in PIECES]
    else:
        raise ValueError(f"case id must be in 1..8, got {case_id}")
    return out


def check_case(params: LatticeParams, case_id: int, cache: OperatorCache | None = None,
               slack: float = 1e-9) -> tuple[float, float, int]:
    """(largest brute-force norm, case bound, number of instances checked)."""
    cache = cache or OperatorCache(params)
    inst = case_instances(params, case_id)
    worst = max((brute_force_nested_commutator(params, trip, cache) for trip in inst), default=0.0)
    return worst, commutator_bound_case(case_id, params), len(inst)


# -- step counts ----------------------------------------------------------------

def rho(params: LatticeParams, T: float, delta: float) -> float:
    N, L, x = params.N, params.Lambda, params.x
    scale = math.sqrt(N) * T**1.5 * L * math.sqrt(x)
    return math.sqrt(delta) / scale + math.sqrt(bound_polynomial(params)) / (L * math.sqrt(x))


def required_steps(params: LatticeParams, T: float, delta: float) -> tuple[int, float]:
    """Smallest s with s·(T/s)^3·χ ≤ δ, and the factor ρ(δ)."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not T > 0:
        raise ValueError("T must be positive")
    s = max(1, math.ceil(T**1.5 * math.sqrt(chi(params)) / math.sqrt(delta)))
    return s, rho(params, T, delta)


def empirical_trotter_error(params: LatticeParams, t: float, dense_limit: int | None = None) -> float:
    """‖V(t) − e^{−iHt}‖ from dense matrices."""
    V = dense_trotter_step(params, t, dense_limit)
    U = exact_propagator(build_dense_hamiltonian(params, dense_limit), t)
    return spectral_norm(V - U)


def multi_step_error(params: LatticeParams, T: float, s: int, dense_limit: int | None = None) -> float:
    """‖V(T/s)^s − e^{−iHT}‖."""
    V = dense_trotter_step(params, T / s, dense_limit)
    U = exact_propagator(build_dense_hamiltonian(params, dense_limit), T)
    return spectral_norm(np.linalg.matrix_power(V, s) - U)


def neg_objective(K: float, per_step_error: float, s: int) -> float:
    """Total error bound K/s^2 + s·e for s noisy Trotter steps."""
    return K / s**2 + s * per_step_error


def neg_optimal_steps_for(K: float, per_step_error: float) -> int:
    if not per_step_error > 0:
        raise ValueError("per-step circuit error must be positive")
    s0 = (2 * K / per_step_error) ** (1 / 3)
    cands = {max(1, math.floor(s0) + d) for d in (-1, 0, 1, 2)}
    return min(sorted(cands), key=lambda s: neg_objective(K, per_step_error, s))


def neg_optimal_steps(params: LatticeParams, T: float, per_step_error: float) -> int:
    """Step count minimising K/s^2 + s·e with K = T^3·χ (the objective is convex in s)."""
    return neg_optimal_steps_for(T**3 * chi(params), per_step_error)

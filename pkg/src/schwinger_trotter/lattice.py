"""Lattice parameters, qubit layout and dense Hamiltonian terms.

Qubit ``q`` is bit ``q`` of a basis-state index.  The register interleaves
sites and links: site 1, link 1 (eta qubits, little-endian), site 2, ...
Sites and links are numbered from 1.  A site qubit in |1> is occupied.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .mathutil import is_power_of_two

DEFAULT_DENSE_LIMIT = 14

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|, creates a fermion
SIGMA_PLUS = SIGMA_MINUS.T.copy()


@dataclass(frozen=True)
class LatticeParams:
    N: int
    Lambda: int
    x: float
    mu: float

    @property
    def eta(self) -> int:
        return (2 * self.Lambda).bit_length() - 1

    @property
    def n_qubits(self) -> int:
        return self.N + (self.N - 1) * self.eta

    def site_qubit(self, r: int) -> int:
        if not 1 <= r <= self.N:
            raise ValueError(f"site {r} out of range 1..{self.N}")
        return (r - 1) * (self.eta + 1)

    def link_lo(self, r: int) -> int:
        """Index of the least significant qubit of link ``r``."""
        if not 1 <= r <= self.N - 1:
            raise ValueError(f"link {r} out of range 1..{self.N - 1}")
        return (r - 1) * (self.eta + 1) + 1

    def link_qubits(self, r: int) -> list[int]:
        lo = self.link_lo(r)
        return list(range(lo, lo + self.eta))

    def layout(self) -> dict:
        """Map of register roles to qubit indices (a bijection onto 0..n_qubits-1)."""
        return {
            "sites": {r: self.site_qubit(r) for r in range(1, self.N + 1)},
            "links": {r: self.link_qubits(r) for r in range(1, self.N)},
        }


def validate_params(N, Lambda, x, mu, *, require_even: bool = True) -> LatticeParams:
    """Check raw values and return a LatticeParams.

    ``require_even=False`` admits odd chains, which are only used to probe
    commutator bounds on short lattices.
    """
    N = _as_int(N, "N")
    Lambda = _as_int(Lambda, "Lambda")
    if N < 2:
        raise ValueError("N must be at least 2")
    if require_even and N % 2:
        raise ValueError("N must be even")
    if not is_power_of_two(Lambda):
        raise ValueError("Lambda must be a power of 2")
    x = float(x)
    mu = float(mu)
    if not x > 0:
        raise ValueError("x must be positive")
    if not mu >= 0:
        raise ValueError("mu must be non-negative")
    return LatticeParams(N, Lambda, x, mu)


def _as_int(v, name):
    if isinstance(v, (bool, np.bool_)):
        raise ValueError(f"{name} must be an integer")
    if isinstance(v, (int, np.integer)):
        return int(v)
    fv = float(v)
    if not fv.is_integer():
        raise ValueError(f"{name} must be an integer, got {v}")
    return int(fv)


@dataclass(frozen=True)
class LocalOperator:
    """A matrix acting on the contiguous qubits lo .. lo+width-1."""

    lo: int
    width: int
    matrix: np.ndarray

    def embed(self, n_qubits: int) -> np.ndarray:
        return embed(self.matrix, self.lo, n_qubits)


def embed(matrix: np.ndarray, lo: int, n_qubits: int) -> np.ndarray:
    width = int(matrix.shape[0]).bit_length() - 1
    hi = n_qubits - lo - width
    if hi < 0 or lo < 0:
        raise ValueError("operator does not fit in the register")
    return np.kron(np.kron(np.eye(2**hi), matrix), np.eye(2**lo))


def check_dense_limit(n_qubits: int, dense_limit: int | None) -> None:
    limit = DEFAULT_DENSE_LIMIT if dense_limit is None else dense_limit
    if n_qubits > limit:
        raise ValueError(f"{n_qubits} qubits exceeds the dense limit of {limit}")


@lru_cache(maxsize=None)
def _link_ops(eta: int):
    d = 2**eta
    Lam = d // 2
    E = np.diag(np.arange(d) - Lam).astype(complex)
    U = np.zeros((d, d), dtype=complex)
    U[(np.arange(d) + 1) % d, np.arange(d)] = 1.0
    for m in (E, U):
        m.setflags(write=False)
    return E, U


def build_link_operators(eta: int):
    """Electric field E, cyclic raising operator U and its inverse on one link."""
    if eta < 1:
        raise ValueError("eta must be >= 1")
    E, U = _link_ops(eta)
    return E.copy(), U.copy(), U.conj().T.copy()


def _hopping_pieces(eta: int):
    """Link-space factors of the four hopping pieces: A, A~, B~, B."""
    _, S, _ = build_link_operators(eta)
    A = np.kron(np.eye(2 ** (eta - 1)), X)
    B = np.kron(np.eye(2 ** (eta - 1)), Y)
    return A, S.conj().T @ A @ S, S.conj().T @ B @ S, B


def _three_body(site_hi, link, site_lo):
    # local bit 0 = site r, bits 1..eta = link r, bit eta+1 = site r+1
    return np.kron(np.kron(site_hi, link), site_lo)


def local_term(params: LatticeParams, kind: str, r: int, j: int | None = None) -> LocalOperator:
    """One Hamiltonian term as a local operator.

    kind "T" with j in 1..4 is a hopping piece, "T" with j=None the whole
    hopping term on link r, "DM" the staggered mass on site r and "DE" the
    electric energy on link r.
    """
    eta = params.eta
    if kind == "DM":
        lo = params.site_qubit(r)
        return LocalOperator(lo, 1, -(params.mu / 2) * (-1) ** r * Z)
    if kind == "DE":
        if r == params.N:
            return LocalOperator(params.site_qubit(r), 1, np.zeros((2, 2), dtype=complex))
        E, _, _ = build_link_operators(eta)
        return LocalOperator(params.link_lo(r), eta, E @ E)
    if kind == "T":
        if not 1 <= r <= params.N - 1:
            raise ValueError(f"hopping term T({r}) out of range 1..{params.N - 1}")
        lo = params.site_qubit(r)
        x = params.x
        if j is None:
            _, U, Ud = build_link_operators(eta)
            m = x * (_three_body(SIGMA_PLUS, U, SIGMA_MINUS) + _three_body(SIGMA_MINUS, Ud, SIGMA_PLUS))
            return LocalOperator(lo, eta + 2, m)
        if j not in (1, 2, 3, 4):
            raise ValueError(f"hopping piece index {j} not in 1..4")
        link = _hopping_pieces(eta)[j - 1]
        if j <= 2:  # X_r X_{r+1} + Y_r Y_{r+1}
            m = _three_body(X, link, X) + _three_body(Y, link, Y)
        else:  # X_r Y_{r+1} - Y_r X_{r+1}
            m = _three_body(Y, link, X) - _three_body(X, link, Y)
        return LocalOperator(lo, eta + 2, (x / 4) * m)
    raise ValueError(f"unknown term kind {kind!r}")


def build_term(params: LatticeParams, kind: str, r: int, j: int | None = None,
               dense_limit: int | None = None) -> np.ndarray:
    check_dense_limit(params.n_qubits, dense_limit)
    return local_term(params, kind, r, j).embed(params.n_qubits)


def term_ids(params: LatticeParams) -> list[tuple]:
    """All terms in forward Trotter order: D_1, T_1^(1..4), D_2, ..., D_N."""
    ids = []
    for r in range(1, params.N + 1):
        ids.append(("DM", r, None))
        if r < params.N:
            ids.append(("DE", r, None))
            ids.extend(("T", r, j) for j in range(1, 5))
    return ids


def build_dense_hamiltonian(params: LatticeParams, dense_limit: int | None = None) -> np.ndarray:
    check_dense_limit(params.n_qubits, dense_limit)
    n = params.n_qubits
    H = np.zeros((2**n, 2**n), dtype=complex)
    for r in range(1, params.N + 1):
        H += local_term(params, "DM", r).embed(n)
        if r < params.N:
            H += local_term(params, "DE", r).embed(n)
            H += local_term(params, "T", r).embed(n)
    return H


def exact_propagator(H: np.ndarray, t: float) -> np.ndarray:
    """e^{-iHt} via the eigendecomposition of a Hermitian H."""
    if not np.allclose(H, H.conj().T, atol=1e-12):
        raise ValueError("exact_propagator needs a Hermitian matrix")
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def _bits(n_qubits: int, q: int) -> np.ndarray:
    return (np.arange(2**n_qubits) >> q) & 1


def occupation_diagonal(params: LatticeParams, r: int) -> np.ndarray:
    return _bits(params.n_qubits, params.site_qubit(r)).astype(float)


def electric_diagonal(params: LatticeParams, r: int) -> np.ndarray:
    """Field value j - Lambda on link r for every basis state; zero for r = 0 or N."""
    n = params.n_qubits
    if r in (0, params.N):
        return np.zeros(2**n)
    lo = params.link_lo(r)
    return ((np.arange(2**n) >> lo) & (2**params.eta - 1)) - float(params.Lambda)


def gauss_diagonal(params: LatticeParams, r: int) -> np.ndarray:
    rho = occupation_diagonal(params, r) + ((-1) ** r - 1) / 2
    return electric_diagonal(params, r) - electric_diagonal(params, r - 1) - rho


def gauss_operator(params: LatticeParams, r: int, dense_limit: int | None = None) -> np.ndarray:
    if not 1 <= r <= params.N:
        raise ValueError(f"site {r} out of range")
    check_dense_limit(params.n_qubits, dense_limit)
    return np.diag(gauss_diagonal(params, r)).astype(complex)


def positron_sites(params: LatticeParams) -> list[int]:
    """Even sites; an occupied even site is a positron."""
    return list(range(2, params.N + 1, 2))


def pair_number_diagonal(params: LatticeParams) -> np.ndarray:
    return sum(occupation_diagonal(params, r) for r in positron_sites(params))


def pair_number_operator(params: LatticeParams, dense_limit: int | None = None) -> np.ndarray:
    check_dense_limit(params.n_qubits, dense_limit)
    return np.diag(pair_number_diagonal(params)).astype(complex)


def fermion_number_operator(params: LatticeParams, dense_limit: int | None = None) -> np.ndarray:
    check_dense_limit(params.n_qubits, dense_limit)
    d = sum(occupation_diagonal(params, r) for r in range(1, params.N + 1))
    return np.diag(d).astype(complex)


def basis_index(params: LatticeParams, occupations, fields) -> int:
    """Basis index for site occupations (0/1 per site) and link field values in [-Lambda, Lambda-1]."""
    if len(occupations) != params.N or len(fields) != params.N - 1:
        raise ValueError("need N occupations and N-1 field values")
    idx = 0
    for r, occ in enumerate(occupations, start=1):
        idx |= int(occ) << params.site_qubit(r)
    for r, eps in enumerate(fields, start=1):
        j = int(eps) + params.Lambda
        if not 0 <= j < 2 * params.Lambda:
            raise ValueError(f"field {eps} outside the cutoff")
        idx |= j << params.link_lo(r)
    return idx


def vacuum_index(params: LatticeParams) -> int:
    """Staggered vacuum: odd sites filled, even sites empty, all fields zero."""
    occ = [r % 2 for r in range(1, params.N + 1)]
    return basis_index(params, occ, [0] * (params.N - 1))

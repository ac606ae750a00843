"""Circuits for one second-order Trotter step and its building blocks.

Two styles are provided.  "neg" targets near-term hardware and uses
Fourier-space incrementers plus a CNOT parity network for E^2.  "ft" targets
fault-tolerant hardware and uses ancilla-based incrementers plus a reversible
squarer for E^2.
"""
from __future__ import annotations

import math

import numpy as np

from .circuit.ir import AncillaPool, Circuit, dagger, place
from .circuit.kernels import apply_local
from .circuit.sim import MERGE_WIDTH, merge_factors
from .lattice import LatticeParams, check_dense_limit, local_term

MODES = ("neg", "ft")


def _check_mode(mode: str) -> str:
    mode = mode.lower()
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


def _rz_phase(c: Circuit, q: int, alpha: float) -> None:
    """diag(1, e^{i alpha}) on qubit q, as Rz plus an explicit global phase."""
    c.append("Rz", q, theta=alpha)
    c.append("Phase", theta=alpha / 2)


def _controlled_phase(c: Circuit, ctrl: int, tgt: int, theta: float) -> None:
    """diag(1, 1, 1, e^{i theta}) from two CNOTs and three Rz."""
    c.append("Rz", ctrl, theta=theta / 2)
    c.append("Rz", tgt, theta=theta / 2)
    c.append("CNOT", ctrl, tgt)
    c.append("Rz", tgt, theta=-theta / 2)
    c.append("CNOT", ctrl, tgt)
    c.append("Phase", theta=theta / 4)


def _qft_no_swap(c: Circuit, reg: list[int]) -> None:
    """Fourier transform leaving the output bits in reversed order."""
    for i in reversed(range(len(reg))):
        c.append("H", reg[i])
        for l in reversed(range(i)):
            _controlled_phase(c, reg[l], reg[i], 2 * math.pi / 2 ** (i - l + 1))


def build_incrementer_qft(eta: int) -> Circuit:
    """|j> -> |j+1 mod 2^eta> by diagonalising the shift in Fourier space."""
    if eta < 1:
        raise ValueError("eta must be >= 1")
    reg = list(range(eta))
    qft = Circuit(eta)
    _qft_no_swap(qft, reg)
    c = Circuit(eta, name=f"inc_qft_{eta}")
    c.extend(qft)
    # Fourier bit m sits on qubit eta-1-m and picks up e^{2 pi i 2^m / 2^eta}
    for m in range(eta):
        _rz_phase(c, reg[eta - 1 - m], 2 * math.pi / 2 ** (eta - m))
    c.extend(dagger(qft))
    return c


def build_incrementer_ancilla(eta: int) -> Circuit:
    """Ripple incrementer with logical-AND ancillas.

    Ancilla a_k holds q_0 AND ... AND q_k; each is erased right after its
    carry has been used.  Uses eta-2 Toffolis and eta-1 ancillas.
    """
    if eta < 1:
        raise ValueError("eta must be >= 1")
    c = Circuit(eta, name=f"inc_anc_{eta}")
    if eta == 1:
        return c.append("X", 0)
    pool = AncillaPool(c)
    a = [pool.alloc()]
    c.append("CNOT", 0, a[0])
    for k in range(1, eta - 1):
        a.append(pool.alloc())
        c.append("Toffoli", a[k - 1], k, a[k])
    for k in reversed(range(eta - 1)):
        c.append("CNOT", a[k], k + 1)
        if k:
            c.append("AndUncompute", a[k - 1], k, a[k])
        else:
            c.append("CNOT", 0, a[0])
        pool.release(a[k])
    return c.append("X", 0)


def build_decrementer(eta: int, mode: str = "neg") -> Circuit:
    if _check_mode(mode) == "neg":
        return dagger(build_incrementer_qft(eta))
    # complementing every bit turns +1 into -1 and keeps the AND structure intact
    c = Circuit(eta, name=f"dec_anc_{eta}")
    for q in range(eta):
        c.append("X", q)
    c.extend(build_incrementer_ancilla(eta))
    for q in range(eta):
        c.append("X", q)
    return c


def _incrementer(eta: int, mode: str) -> Circuit:
    return build_incrementer_qft(eta) if mode == "neg" else build_incrementer_ancilla(eta)


def _bell_diag(c: Circuit, b: int, r: int, f: int, theta: float) -> None:
    """exp(-i theta Z_b Z_r (1 - Z_f)) from four CNOTs and two Rz."""
    c.append("CNOT", b, r)
    c.append("Rz", r, theta=2 * theta)
    c.append("CNOT", f, r)
    c.append("Rz", r, theta=-2 * theta)
    c.append("CNOT", f, r)
    c.append("CNOT", b, r)


def build_hopping_step(params: LatticeParams, r: int, t: float, mode: str = "neg",
                       reverse: bool = False) -> Circuit:
    """exp(-itT4/2) exp(-itT3/2) exp(-itT2/2) exp(-itT1/2) on site r, link r, site r+1.

    Each piece is x/4 times (link factor) x (fermion pair factor).  A Bell-basis
    change on the two sites plus a Hadamard on the link's low qubit turns
    exp(-i(xt/8) X_b (XX+YY)) into a diagonal phase; the other three pieces
    are conjugates of the first by the link shift and by S gates.  Adjacent
    basis changes cancel, leaving 18 explicit CNOTs.

    ``reverse=True`` gives the opposite ordering (T4 first), used by the
    mirrored half of the Trotter step.
    """
    mode = _check_mode(mode)
    if not 1 <= r <= params.N - 1:
        raise ValueError(f"hopping link {r} out of range 1..{params.N - 1}")
    if reverse:
        return dagger(build_hopping_step(params, r, -t, mode))
    eta = params.eta
    sr, sf = params.site_qubit(r), params.site_qubit(r + 1)
    link = params.link_qubits(r)
    b = link[0]
    theta = params.x * t / 8
    c = Circuit(params.n_qubits, name=f"hop_{mode}_{r}")
    # piece 1
    c.append("CNOT", sr, sf).append("H", sr).append("H", b)
    _bell_diag(c, b, sr, sf, theta)
    c.append("H", b)
    # piece 2: conjugate by the link shift
    place(c, _incrementer(eta, mode), link)
    c.append("H", b)
    _bell_diag(c, b, sr, sf, theta)
    # piece 3: shift back through S^dag on link bit and site r
    c.append("H", b).append("Sdg", b).append("H", b)
    c.append("H", sr).append("Sdg", sr).append("H", sr)
    _bell_diag(c, b, sr, sf, -theta)
    # piece 4
    c.append("H", b).append("S", b)
    place(c, build_decrementer(eta, mode), link)
    c.append("Sdg", b).append("H", b)
    _bell_diag(c, b, sr, sf, -theta)
    c.append("H", sr).append("CNOT", sr, sf).append("H", b)
    c.append("S", b).append("S", sr)
    return c


def build_mass_step(params: LatticeParams, r: int, t: float) -> Circuit:
    """exp(-i D_M(r) t) as one Rz on site r."""
    q = params.site_qubit(r)
    c = Circuit(params.n_qubits, name=f"mass_{r}")
    return c.append("Rz", q, theta=-((-1) ** r) * params.mu * t)


def build_electric_step_neg(eta: int, t: float) -> Circuit:
    """exp(-i E^2 t) on one link register, exactly, using a CNOT parity network.

    E^2 = (E + 1/2)^2 - (E + 1/2) + 1/4 with E + 1/2 = -(1/2) sum_j 2^j Z_j, so
    the linear part is one Rz per qubit and the square is a sum of Z_j Z_k.
    Parities x_j ^ x_k are staged with fan-out blocks F_j = CNOT_{j,j+1}...CNOT_{j,eta-1},
    and consecutive blocks are merged via F_{j+1} F_j = CNOT_{j,j+1} F_{j+1}.
    """
    if eta < 1:
        raise ValueError("eta must be >= 1")
    c = Circuit(eta, name=f"elec_neg_{eta}")
    for j in range(eta):
        c.append("Rz", j, theta=2**j * t)

    def fan(j):
        for k in range(j + 1, eta):
            c.append("CNOT", j, k)

    def zz(j):
        for k in range(j + 1, eta):
            c.append("Rz", k, theta=2 ** (j + k) * t)

    if eta >= 2:
        fan(0)
        zz(0)
        for j in range(eta - 2):
            fan(j + 1)
            c.append("CNOT", j, j + 1)
            zz(j + 1)
        fan(eta - 2)
    c.append("Phase", theta=-t / 4 - t * (4**eta - 1) / 12)
    return c


def build_adder(n: int) -> Circuit:
    """In-place ripple-carry adder: |a>|b>|z> -> |a>|a+b mod 2^n>|z ^ carry>.

    Register: a on 0..n-1, b on n..2n-1, z on 2n; one carry ancilla.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    c = Circuit(2 * n + 1, name=f"adder_{n}")
    a = list(range(n))
    b = list(range(n, 2 * n))
    z = 2 * n
    pool = AncillaPool(c)
    cin = pool.alloc()

    def maj(x, y, w):
        c.append("CNOT", w, y).append("CNOT", w, x).append("Toffoli", x, y, w)

    def uma(x, y, w):
        c.append("Toffoli", x, y, w).append("CNOT", w, x).append("CNOT", x, y)

    carries = [cin] + a[:-1]
    for i in range(n):
        maj(carries[i], b[i], a[i])
    c.append("CNOT", a[-1], z)
    for i in reversed(range(n)):
        uma(carries[i], b[i], a[i])
    pool.release(cin)
    return c


def build_squarer(eta: int) -> Circuit:
    """|x>|0> -> |x>|x^2> by schoolbook multiplication.

    Register: x on 0..eta-1, product on eta..3eta-1 (must start at zero).
    Row j copies x AND x_j into a scratch register and adds it into the
    product at offset j; the scratch is cleared after each row.
    """
    if eta < 1:
        raise ValueError("eta must be >= 1")
    c = Circuit(3 * eta, name=f"square_{eta}")
    x = list(range(eta))
    p = list(range(eta, 3 * eta))

    def copy_row(j, dest):
        for i in range(eta):
            if i == j:
                c.append("CNOT", x[j], dest[i])
            else:
                c.append("Toffoli", x[j], x[i], dest[i])

    copy_row(0, p[:eta])
    if eta == 1:
        return c
    pool = AncillaPool(c)
    w = [pool.alloc() for _ in range(eta)]
    adder = build_adder(eta)
    for j in range(1, eta):
        copy_row(j, w)
        place(c, adder, w + p[j:j + eta] + [p[j + eta]])
        copy_row(j, w)
    for q in reversed(w):
        pool.release(q)
    return c


def squarer_zeroed_qubits(eta: int) -> int:
    """Zero-initialised qubits the squarer needs: product register plus scratch."""
    return 2 * eta + build_squarer(eta).ancilla_high_water


def build_electric_step_ft(eta: int, t: float) -> Circuit:
    """exp(-i E^2 t) via |j> -> e^{-i j^2 t} e^{i 2^eta j t} |j> and a global phase.

    The square is computed into ancillas, phased bit by bit, and uncomputed.
    """
    if eta < 1:
        raise ValueError("eta must be >= 1")
    c = Circuit(eta, name=f"elec_ft_{eta}")
    pool = AncillaPool(c)
    prod = [pool.alloc() for _ in range(2 * eta)]
    sq = build_squarer(eta)
    reg = list(range(eta)) + prod
    place(c, sq, reg)
    for m, q in enumerate(prod):
        c.append("Rz", q, theta=-t * 2**m)
    for m in range(eta):
        c.append("Rz", m, theta=t * 2 ** (eta + m))
    place(c, dagger(sq), reg)
    for q in reversed(prod):
        pool.release(q)
    phase = -t * (4**eta - 1) / 2 + t * 2**eta * (2**eta - 1) / 2 - t * 4 ** (eta - 1)
    c.append("Phase", theta=phase)
    return c


def build_electric_step(eta: int, t: float, mode: str = "neg") -> Circuit:
    if _check_mode(mode) == "neg":
        return build_electric_step_neg(eta, t)
    return build_electric_step_ft(eta, t)


def build_trotter_step(params: LatticeParams, t: float, mode: str = "neg") -> Circuit:
    """Second-order step V(t), gates in time order.

    Forward sweep r = 1..N-1 of (mass, electric) half steps then the hopping
    pieces T1..T4, a full mass step on site N, then the mirror image.
    """
    mode = _check_mode(mode)
    N = params.N
    c = Circuit(params.n_qubits, name=f"trotter_{mode}")

    def diag_half(r):
        c.extend(build_mass_step(params, r, t / 2))
        place(c, build_electric_step(params.eta, t / 2, mode), params.link_qubits(r))

    for r in range(1, N):
        diag_half(r)
        c.extend(build_hopping_step(params, r, t, mode))
    c.extend(build_mass_step(params, N, t))
    for r in reversed(range(1, N)):
        c.extend(build_hopping_step(params, r, t, mode, reverse=True))
        place(c, build_electric_step(params.eta, t / 2, mode), params.link_qubits(r))
        c.extend(build_mass_step(params, r, t / 2))
    return c


# -- dense oracles -----------------------------------------------------------

def _local_exp(matrix: np.ndarray, t: float) -> np.ndarray:
    w, v = np.linalg.eigh(matrix)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def trotter_factors(params: LatticeParams, t: float) -> list[tuple[int, np.ndarray]]:
    """V(t) as time-ordered local exponentials (lo, matrix) of the dense terms."""
    out = []

    def add(kind, r, j, tau):
        op = local_term(params, kind, r, j)
        out.append((op.lo, _local_exp(op.matrix, tau)))

    N = params.N
    for r in range(1, N):
        add("DM", r, None, t / 2)
        add("DE", r, None, t / 2)
        for j in (1, 2, 3, 4):
            add("T", r, j, t / 2)
    add("DM", N, None, t)
    for r in reversed(range(1, N)):
        for j in (4, 3, 2, 1):
            add("T", r, j, t / 2)
        add("DE", r, None, t / 2)
        add("DM", r, None, t / 2)
    return out


def hopping_oracle(params: LatticeParams, r: int, t: float, reverse: bool = False) -> np.ndarray:
    order = (4, 3, 2, 1) if reverse else (1, 2, 3, 4)
    M = np.eye(2**params.n_qubits, dtype=complex)
    for j in order:
        op = local_term(params, "T", r, j)
        M = apply_local(M, _local_exp(op.matrix, t / 2), op.lo)
    return M


def dense_trotter_step(params: LatticeParams, t: float, dense_limit: int | None = None) -> np.ndarray:
    """Dense V(t) from exact exponentials of the individual terms."""
    check_dense_limit(params.n_qubits, dense_limit)
    M = np.eye(2**params.n_qubits, dtype=complex)
    for lo, U in merge_factors(trotter_factors(params, t), MERGE_WIDTH):
        M = apply_local(M, U, lo)
    return M


def electric_oracle(eta: int, t: float) -> np.ndarray:
    d = 2**eta
    eps = np.arange(d) - d // 2
    return np.diag(np.exp(-1j * t * eps.astype(float) ** 2))


def shift_oracle(eta: int) -> np.ndarray:
    d = 2**eta
    S = np.zeros((d, d), dtype=complex)
    S[(np.arange(d) + 1) % d, np.arange(d)] = 1
    return S


def perturb_rotations(circuit: Circuit, delta: float, seed: int = 0) -> Circuit:
    """Copy of ``circuit`` with each Rz angle shifted so that ‖Rz' − Rz‖ ≤ delta."""
    rng = np.random.default_rng(seed)
    max_shift = 4 * math.asin(min(delta, 2.0) / 2)
    out = Circuit(circuit.n_qubits, name=circuit.name)
    for g in circuit.gates:
        if g.kind == "Rz":
            out.append("Rz", *g.qubits, theta=g.theta + rng.uniform(-max_shift, max_shift))
        else:
            out.gates.append(g)
    return out

"""Circuit evaluation: state-vector application, dense unitaries and distances."""
from __future__ import annotations

import numpy as np

from ..lattice import check_dense_limit, embed
from .ir import Circuit
from .kernels import apply_local, get_kernels

_SQ = 1 / np.sqrt(2)
_FIXED_1Q = {
    "H": np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
}
_DIAG = {
    "Z": (1, -1),
    "S": (1, 1j),
    "Sdg": (1, -1j),
    "T": (1, np.exp(1j * np.pi / 4)),
    "Tdg": (1, np.exp(-1j * np.pi / 4)),
}
LEAK_TOL = 1e-9
# widest window two local factors are multiplied into before touching a full matrix
MERGE_WIDTH = 8


def gate_matrix(kind: str, theta: float | None = None) -> np.ndarray:
    """Dense matrix of a one-, two- or three-qubit gate (first listed qubit is bit 0)."""
    if kind in _FIXED_1Q:
        return _FIXED_1Q[kind].copy()
    if kind == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind in _DIAG:
        return np.diag(np.array(_DIAG[kind], dtype=complex))
    if kind == "Rz":
        return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    c = Circuit(3 if kind in ("Toffoli", "AndUncompute") else 2)
    c.append(kind, *range(c.n_qubits), theta=theta)
    return circuit_to_unitary(c)


def _apply_gates(psi, gates, kern, qmap=None, check_free=True):
    """Apply gates in place to a batch ``psi``; returns the accumulated global phase."""
    phase = 0.0
    for g in gates:
        qs = g.qubits if qmap is None else tuple(qmap[q] for q in g.qubits)
        k = g.kind
        if k == "X":
            kern.apply_mcx(psi, (), qs[0])
        elif k in ("CNOT", "Toffoli", "AndUncompute"):
            kern.apply_mcx(psi, qs[:-1], qs[-1])
        elif k in _DIAG:
            d0, d1 = _DIAG[k]
            kern.apply_diag(psi, qs[0], d0, d1)
        elif k == "Rz":
            kern.apply_diag(psi, qs[0], np.exp(-0.5j * g.theta), np.exp(0.5j * g.theta))
        elif k in _FIXED_1Q:
            kern.apply_1q(psi, qs[0], _FIXED_1Q[k])
        elif k == "ControlledPhase":
            kern.apply_cphase(psi, qs[0], qs[1], np.exp(1j * g.theta))
        elif k == "Phase":
            phase += g.theta
        elif k == "AncillaFree" and check_free:
            bit = 1 << qs[0]
            rows = np.arange(psi.shape[0])
            if np.abs(psi[(rows & bit) != 0]).max(initial=0.0) > LEAK_TOL:
                raise ValueError(f"ancilla {g.qubits[0]} is not returned to |0>")
    return phase


def apply_circuit(circuit: Circuit, state: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Apply a circuit to a state vector (or a batch of column states).

    The state may span the register only, in which case ancillas start in |0>
    and must end there, or the full width including ancillas.
    """
    kern = get_kernels(backend)
    state = np.asarray(state, dtype=complex)
    vector = state.ndim == 1
    psi = state.reshape(state.shape[0], -1)
    dim_reg, width = 2**circuit.n_qubits, circuit.width
    if psi.shape[0] == 2**width:
        work = np.ascontiguousarray(psi.copy())
        padded = False
    elif psi.shape[0] == dim_reg:
        work = np.zeros((2**width, psi.shape[1]), dtype=complex)
        work[:dim_reg] = psi
        padded = True
    else:
        raise ValueError(f"state dimension {state.shape[0]} does not match circuit register")
    phase = _apply_gates(work, circuit.gates, kern)
    if phase:
        work *= np.exp(1j * phase)
    if padded:
        if np.abs(work[dim_reg:]).max(initial=0.0) > LEAK_TOL:
            raise ValueError("ancillas left entangled with the register")
        work = work[:dim_reg]
    return work[:, 0].copy() if vector else work


def _segments(circuit: Circuit, max_window: int):
    """Split the gate list into runs on a contiguous register window.

    A run only ends where no ancilla is allocated, so each run can be
    evaluated with its ancillas starting and ending in |0>.
    """
    n = circuit.n_qubits
    segs, cur = [], []
    lo = hi = None
    live = 0
    phase = 0.0
    for g in circuit.gates:
        if g.kind == "Phase":
            phase += g.theta
            continue
        if g.kind == "AncillaAlloc" and live == 0 and cur:
            # start ancilla blocks fresh so their window stays small
            segs.append((lo, hi, cur))
            cur, lo, hi = [], None, None
        phys = [q for q in g.qubits if q < n]
        if phys:
            nlo = min(phys) if lo is None else min(lo, *phys)
            nhi = max(phys) if hi is None else max(hi, *phys)
            if cur and live == 0 and lo is not None and nhi - nlo + 1 > max_window:
                segs.append((lo, hi, cur))
                cur = []
                nlo, nhi = min(phys), max(phys)
            lo, hi = nlo, nhi
        cur.append(g)
        if g.kind == "AncillaAlloc":
            live += 1
        elif g.kind == "AncillaFree":
            live -= 1
    if cur:
        segs.append((lo, hi, cur))
    return segs, phase


def _segment_unitary(lo, hi, gates, n_reg, kern):
    k = 0 if lo is None else hi - lo + 1
    ancs = sorted({q for g in gates for q in g.qubits if q >= n_reg})
    qmap = {q: q - lo for q in range(lo, hi + 1)} if k else {}
    qmap.update({q: k + i for i, q in enumerate(ancs)})
    psi = np.zeros((2 ** (k + len(ancs)), 2**k), dtype=complex)
    psi[np.arange(2**k), np.arange(2**k)] = 1.0
    _apply_gates(psi, gates, kern, qmap, check_free=False)
    if ancs and np.abs(psi[2**k:]).max() > LEAK_TOL:
        raise ValueError("ancillas left entangled with the register")
    return psi[: 2**k]


def _width(U):
    return U.shape[0].bit_length() - 1


def merge_factors(factors: list[tuple[int, np.ndarray]], max_width: int = 0) -> list[tuple[int, np.ndarray]]:
    """Multiply consecutive local factors (lo, matrix) together while their joint window stays small.

    A factor always folds into its predecessor when one window contains the
    other; otherwise the two merge if their union spans at most ``max_width``
    qubits.  Fewer, wider factors mean fewer passes over a large matrix.
    """
    out: list[tuple[int, np.ndarray]] = []
    for lo, U in factors:
        if out:
            plo, P = out[-1]
            w, pw = _width(U), _width(P)
            ulo, uhi = min(lo, plo), max(lo + w, plo + pw)
            if uhi - ulo <= max(max_width, w, pw):
                span = uhi - ulo
                out[-1] = (ulo, embed(U, lo - ulo, span) @ embed(P, plo - ulo, span))
                continue
        out.append((lo, U))
    return out


def circuit_factors(circuit: Circuit, max_window: int = 6, merge_width: int = MERGE_WIDTH,
                    backend: str | None = None) -> list[tuple[int, np.ndarray]]:
    """The circuit as time-ordered dense factors (lo, matrix) on small register windows.

    Gates are grouped into runs on contiguous windows, each run is evaluated
    on its window plus its own ancillas, and neighbouring runs are merged up
    to ``merge_width`` qubits.  Global phases are folded into the first factor.
    """
    kern = get_kernels(backend)
    segs, phase = _segments(circuit, max_window)
    scalar = np.exp(1j * phase)
    factors = []
    for lo, hi, gates in segs:
        L = _segment_unitary(lo, hi, gates, circuit.n_qubits, kern)
        if lo is None:
            scalar *= L[0, 0]
        else:
            factors.append((lo, L))
    factors = merge_factors(factors, merge_width)
    if not factors:
        return [(0, np.array([[scalar]]))]
    lo, L = factors[0]
    factors[0] = (lo, L * scalar)
    return factors


def apply_factors(psi: np.ndarray, factors: list[tuple[int, np.ndarray]]) -> np.ndarray:
    for lo, L in factors:
        psi = apply_local(psi, L, lo)
    return psi


def circuit_to_unitary(circuit: Circuit, dense_limit: int | None = None, max_window: int = 6,
                       backend: str | None = None) -> np.ndarray:
    """Dense unitary of a circuit on its register, ancillas fixed to |0> in and out.

    The dense limit applies to the register width, since ancillas never
    appear in a full-width matrix.
    """
    n = circuit.n_qubits
    check_dense_limit(n, dense_limit)
    return apply_factors(np.eye(2**n, dtype=complex), circuit_factors(circuit, max_window, backend=backend))


def factored_distance_bounds(candidates, reference, n_qubits: int, chunk: int = 512) -> list[float]:
    """Upper bounds on min over φ of ‖A − e^{iφ}B‖ for each candidate product A against B.

    All operators are products of local factors (lo, matrix).  Columns are
    processed in chunks so no full matrix is held, and the reference chunk is
    shared by all candidates.  Each phase is fixed from the first chunk's
    overlap, and the Frobenius norm of the difference bounds its spectral norm.
    """
    dim = 2**n_qubits
    phases = [None] * len(candidates)
    totals = [0.0] * len(candidates)
    for start in range(0, dim, chunk):
        cols = np.arange(start, min(start + chunk, dim))
        X = np.zeros((dim, cols.size), dtype=complex)
        X[cols, np.arange(cols.size)] = 1.0
        B = apply_factors(X, reference)
        for i, factors in enumerate(candidates):
            A = apply_factors(X, factors)
            if phases[i] is None:
                tr = np.vdot(B, A)
                phases[i] = np.exp(1j * np.angle(tr)) if abs(tr) > 0 else 1.0
            totals[i] += float(np.linalg.norm(A - phases[i] * B) ** 2)
    return [float(np.sqrt(t)) for t in totals]


def factored_distance_bound(factors_a, factors_b, n_qubits: int, chunk: int = 512) -> float:
    return factored_distance_bounds([factors_a], factors_b, n_qubits, chunk)[0]


def spectral_norm(A: np.ndarray, tol: float = 1e-10, max_iter: int = 5000, seed: int = 0) -> float:
    """Largest singular value: SVD up to dimension 4096, Gram power iteration above."""
    if max(A.shape) <= 4096:
        return float(np.linalg.norm(A, 2)) if A.size else 0.0
    return power_iteration_norm(A, tol, max_iter, seed)


def power_iteration_norm(A: np.ndarray, tol: float = 1e-10, max_iter: int = 5000, seed: int = 0,
                         atol: float = 1e-15) -> float:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1]) + 1j * rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iter):
        w = ((A @ v).conj() @ A).conj()  # A^H A v without forming A^H
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new = float(np.sqrt(nw))
        v = w / nw
        if abs(new - sigma) <= max(tol * new, atol):
            return new
        sigma = new
    return sigma


def distance_up_to_phase(U: np.ndarray, V: np.ndarray) -> float:
    """‖U − e^{iφ}V‖ with φ = arg tr(V†U).

    This is the minimum over φ whenever U is close to a multiple of V, which
    is the regime every equality check uses; for far-apart unitaries it can
    exceed the true minimum.
    """
    if U.shape != V.shape:
        raise ValueError("dimension mismatch")
    tr = np.vdot(V, U)
    phase = np.exp(1j * np.angle(tr)) if abs(tr) > 0 else 1.0
    return spectral_norm(U - phase * V)


def is_unitary(U: np.ndarray, tol: float = 1e-10) -> bool:
    return bool(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() <= tol)

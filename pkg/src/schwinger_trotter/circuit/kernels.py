"""In-place gate kernels on state batches.

A batch is a complex128 array of shape (2**n, k): k state vectors stored as
columns, qubit q being bit q of the row index.  Two implementations share one
interface: numba-compiled loops and a pure-numpy path built on strided views.
Set SCHWINGER_NO_NUMBA=1 to force the numpy path.
"""
import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

NUMBA_AVAILABLE = njit is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("SCHWINGER_NO_NUMBA", "").lower() not in ("1", "true", "yes")


# -- numpy path ------------------------------------------------------------

def _split(psi, q):
    """Views of the rows with bit q clear and set."""
    dim, k = psi.shape
    v = psi.reshape(dim >> (q + 1), 2, (1 << q) * k)
    return v[:, 0, :], v[:, 1, :]


def _np_apply_1q(psi, q, m00, m01, m10, m11):
    a, b = _split(psi, q)
    a0 = a.copy()
    a *= m00
    a += m01 * b
    b *= m11
    b += m10 * a0


def _np_apply_diag(psi, q, d0, d1):
    a, b = _split(psi, q)
    if d0 != 1:
        a *= d0
    b *= d1


def _control_mask(dim, controls):
    rows = np.arange(dim)
    mask = np.ones(dim, dtype=bool)
    for c in controls:
        mask &= ((rows >> c) & 1).astype(bool)
    return rows, mask


def _np_apply_mcx(psi, controls, t):
    rows, mask = _control_mask(psi.shape[0], controls)
    src = rows[mask & (((rows >> t) & 1) == 0)]
    dst = src | (1 << t)
    tmp = psi[src].copy()
    psi[src] = psi[dst]
    psi[dst] = tmp


def _np_apply_cphase(psi, c, t, phase):
    rows, mask = _control_mask(psi.shape[0], (c, t))
    psi[mask] *= phase


# -- numba path ------------------------------------------------------------

if NUMBA_AVAILABLE:

    @njit(cache=True)
    def _nb_apply_1q(psi, q, m00, m01, m10, m11):
        dim, k = psi.shape
        bit = 1 << q
        for i in range(dim):
            if i & bit:
                continue
            j = i | bit
            for c in range(k):
                a = psi[i, c]
                b = psi[j, c]
                psi[i, c] = m00 * a + m01 * b
                psi[j, c] = m10 * a + m11 * b

    @njit(cache=True)
    def _nb_apply_diag(psi, q, d0, d1):
        dim, k = psi.shape
        bit = 1 << q
        for i in range(dim):
            d = d1 if i & bit else d0
            for c in range(k):
                psi[i, c] *= d

    @njit(cache=True)
    def _nb_apply_mcx(psi, cmask, t):
        dim, k = psi.shape
        bit = 1 << t
        for i in range(dim):
            if (i & cmask) != cmask or (i & bit):
                continue
            j = i | bit
            for c in range(k):
                tmp = psi[i, c]
                psi[i, c] = psi[j, c]
                psi[j, c] = tmp

    @njit(cache=True)
    def _nb_apply_cphase(psi, cmask, phase):
        dim, k = psi.shape
        for i in range(dim):
            if (i & cmask) == cmask:
                for c in range(k):
                    psi[i, c] *= phase


class NumpyKernels:
    name = "numpy"

    @staticmethod
    def apply_1q(psi, q, m):
        _np_apply_1q(psi, q, complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    @staticmethod
    def apply_diag(psi, q, d0, d1):
        _np_apply_diag(psi, q, complex(d0), complex(d1))

    @staticmethod
    def apply_mcx(psi, controls, t):
        _np_apply_mcx(psi, controls, t)

    @staticmethod
    def apply_cphase(psi, c, t, phase):
        _np_apply_cphase(psi, c, t, complex(phase))


class NumbaKernels:
    name = "numba"

    @staticmethod
    def apply_1q(psi, q, m):
        _nb_apply_1q(psi, q, complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    @staticmethod
    def apply_diag(psi, q, d0, d1):
        _nb_apply_diag(psi, q, complex(d0), complex(d1))

    @staticmethod
    def apply_mcx(psi, controls, t):
        cmask = 0
        for c in controls:
            cmask |= 1 << c
        _nb_apply_mcx(psi, cmask, t)

    @staticmethod
    def apply_cphase(psi, c, t, phase):
        _nb_apply_cphase(psi, (1 << c) | (1 << t), complex(phase))


def get_kernels(name: str | None = None):
    """Kernel set by name ("numba" or "numpy"); default follows the env flag."""
    if name is None:
        name = "numba" if USE_NUMBA else "numpy"
    if name == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError("numba is not installed")
        return NumbaKernels
    if name == "numpy":
        return NumpyKernels
    raise ValueError(f"unknown kernel backend {name!r}")


def apply_local(psi: np.ndarray, matrix: np.ndarray, lo: int) -> np.ndarray:
    """Apply a dense operator on qubits lo..lo+w-1 to every column; returns a new array.

    Uses one batched matmul, so cost is dominated by BLAS rather than Python.
    """
    dim, k = psi.shape
    w = matrix.shape[0]
    view = psi.reshape(dim // (w << lo), w, (1 << lo) * k)
    return np.matmul(matrix, view).reshape(dim, k)

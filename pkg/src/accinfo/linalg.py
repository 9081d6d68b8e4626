"""Dense complex matrix helpers.

Operators are plain ``numpy`` complex arrays. Anything that is meant to be
Hermitian goes through :func:`herm` on construction so that round-off does not
accumulate over many iteration rounds.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    IndexOutOfRange,
    NotConverged,
    SingularMatrix,
    SpectrumOutOfRange,
)

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def as_cmatrix(m) -> np.ndarray:
    a = np.array(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def herm(m) -> np.ndarray:
    """Return the Hermitian part (M + M^dagger)/2 of a square matrix."""
    a = as_cmatrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"Hermitian matrix must be square, got {a.shape}")
    return 0.5 * (a + a.conj().T)


def is_hermitian(m, rtol: float = 1e-12) -> bool:
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = 1.0 + np.max(np.abs(a), initial=0.0)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= rtol * scale)


def max_abs(m) -> float:
    """Largest entry modulus, the norm used throughout for tolerances."""
    return float(np.max(np.abs(m), initial=0.0))


def is_psd(m, tol: float = 1e-10) -> bool:
    """True iff the smallest eigenvalue of the Hermitian part is >= -tol."""
    return bool(np.linalg.eigvalsh(herm(m))[0] >= -tol)


def _gershgorin_bounds(s: np.ndarray) -> tuple[float, float]:
    d = s.diagonal().real
    radius = np.sum(np.abs(s), axis=1) - np.abs(s.diagonal())
    return float(np.min(d - radius)), float(np.max(d + radius))


def _fixpoint_basin_ok(s: np.ndarray) -> bool:
    lo, hi = _gershgorin_bounds(s)
    if 0.0 < lo and hi < 3.0:
        return True
    w = np.linalg.eigvalsh(s)
    return bool(0.0 < w[0] and w[-1] < 3.0)


def inv_sqrt_fixpoint(s, tol: float = 1e-14, max_iter: int = 100) -> np.ndarray:
    """Inverse square root by the cubically-corrected Newton fixpoint.

    Iterates ``X <- 3/2 X - 1/4 X (S X + X S) X`` from ``X = 1``. The iteration
    only converges when the spectrum of ``S`` lies in (0, 3); this is checked up
    front (Gershgorin disc first, eigenvalues only if the discs are
    inconclusive).
    """
    s = herm(s)
    n = s.shape[0]
    if not _fixpoint_basin_ok(s):
        raise SpectrumOutOfRange("spectrum of S is not inside (0, 3)")
    eye = np.eye(n, dtype=complex)
    x = eye
    for _ in range(max_iter):
        x_next = 1.5 * x - 0.25 * x @ (s @ x + x @ s) @ x
        x_next = 0.5 * (x_next + x_next.conj().T)
        if not np.all(np.isfinite(x_next)) or max_abs(x_next) > 1e12:
            raise SpectrumOutOfRange("fixpoint iteration diverged")
        step = max_abs(x_next - x)
        x = x_next
        if step <= tol:
            break
    else:
        raise NotConverged(f"inverse square root not converged in {max_iter} steps")
    if max_abs(x @ s @ x - eye) > 1e-11:
        raise NotConverged("fixpoint stalled away from S^(-1/2)")
    return x


def inv_sqrt_eigen(s) -> np.ndarray:
    """S^(-1/2) from the eigendecomposition; S must be positive definite."""
    s = herm(s)
    w, v = np.linalg.eigh(s)
    if w[0] <= 1e-14:
        raise SingularMatrix(f"smallest eigenvalue {w[0]:.3e} is not positive")
    x = (v * w**-0.5) @ v.conj().T
    return 0.5 * (x + x.conj().T)


def inv_sqrt(s) -> np.ndarray:
    """Fixpoint inverse square root with eigendecomposition fallback."""
    try:
        return inv_sqrt_fixpoint(s)
    except (SpectrumOutOfRange, NotConverged):
        return inv_sqrt_eigen(s)


def tensor(*mats) -> np.ndarray:
    """Kronecker product of one or more matrices, first factor most significant."""
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, as_cmatrix(m))
    return out


def partial_trace(m, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduce ``m`` on the tensor product ``dims`` to the subsystems in ``keep``.

    Subsystems are numbered from 0 in the order of ``dims``; the kept factors
    stay in their original order. Keeping nothing returns the 1x1 trace.
    """
    a = as_cmatrix(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if a.shape != (total, total):
        raise DimensionMismatch(f"dims {dims} do not match matrix shape {a.shape}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise IndexOutOfRange(f"keep {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = a.reshape(dims + dims)
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out_idx = keep + [n + i for i in keep]
    reduced = np.einsum(t, row + col, out_idx)
    kd = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.asarray(reduced).reshape(kd, kd)


def pauli(axis: str, qubit: int, n_qubits: int) -> np.ndarray:
    """Pauli matrix ``axis`` acting on ``qubit`` (0 = leftmost factor)."""
    if axis not in PAULI:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    if not 0 <= qubit < n_qubits:
        raise IndexOutOfRange(f"qubit {qubit} not in range({n_qubits})")
    factors = [np.eye(2, dtype=complex)] * n_qubits
    factors = factors[:qubit] + [PAULI[axis]] + factors[qubit + 1 :]
    return tensor(*factors)


def random_hermitian_psd(dim: int, rng: np.random.Generator, lo: float, hi: float) -> np.ndarray:
    """Random Hermitian matrix with eigenvalues drawn uniformly from [lo, hi]."""
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, _ = np.linalg.qr(z)
    w = rng.uniform(lo, hi, size=dim)
    return herm((q * w) @ q.conj().T)

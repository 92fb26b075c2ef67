"""Small linear-algebra helpers for 2x2 (and batched Hermitian) matrices.

Everything here is plain numpy; the point is to keep the hot paths of the
protocol/estimation code free of scipy.linalg.expm calls, which dominate
runtime for long pulse trains.
"""
from __future__ import annotations

import numpy as np

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_MINUS = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


def rot_x(angle: float) -> np.ndarray:
    """exp(i * angle * sigma_x)."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 1.0j * s], [1.0j * s, c]])


def rot_z(angle: float) -> np.ndarray:
    """exp(-i * angle * sigma_z), i.e. diag(e^{-i angle}, e^{+i angle})."""
    return np.array([[np.exp(-1.0j * angle), 0.0], [0.0, np.exp(1.0j * angle)]])


def expm_herm(h: np.ndarray, scale: complex = -1.0j) -> np.ndarray:
    """exp(scale * h) for a (batched) Hermitian matrix via eigendecomposition.

    h may have shape (..., d, d); the result has the same shape.
    """
    w, v = np.linalg.eigh(h)
    phases = np.exp(scale * w)
    return np.einsum("...ik,...k,...jk->...ij", v, phases, v.conj())


def matpow_with_grad(m: np.ndarray, dms: list[np.ndarray], n: int):
    """Return (m**n, [d(m**n)/dp for each dm in dms]) by square-and-multiply.

    Uses the product rule at every squaring, so the derivatives are exact
    (no finite differences) and cost O(log n) matrix products.
    """
    p = np.eye(m.shape[0], dtype=complex)
    dps = [np.zeros_like(p) for _ in dms]
    base, dbases = m, list(dms)
    k = int(n)
    if k < 0:
        raise ValueError("negative power")
    while k:
        if k & 1:
            dps = [dp @ base + p @ db for dp, db in zip(dps, dbases)]
            p = p @ base
        k >>= 1
        if k:
            dbases = [db @ base + base @ db for db in dbases]
            base = base @ base
    return p, dps


def unitarity_defect(u: np.ndarray) -> float:
    """Frobenius norm of U^dag U - 1."""
    d = u.shape[-1]
    return float(np.linalg.norm(u.conj().T @ u - np.eye(d)))

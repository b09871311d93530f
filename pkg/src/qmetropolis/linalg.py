"""Dense complex linear-algebra kernel.

Operators are plain ``numpy`` arrays (complex128, row-major).  Everything here
is pure: inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

# eigenvalues closer than this (relative to max(1, ||H||)) are one level
LEVEL_TOL = 1e-9


class NotHermitian(ValueError):
    pass


@dataclass(frozen=True)
class HermitianEigensystem:
    """Ascending eigenvalues and the unitary whose columns are eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def to_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        v = self.eigenvectors
        return v.conj().T @ op @ v

    def from_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        v = self.eigenvectors
        return v @ op @ v.conj().T

    def level_labels(self, tol: float = LEVEL_TOL) -> tuple[np.ndarray, np.ndarray]:
        """Group numerically equal eigenvalues.

        Returns ``(labels, level_energies)`` where ``labels[j]`` indexes the
        degenerate level of eigenvector ``j`` and ``level_energies`` holds the
        mean energy of each level, ascending.
        """
        return group_levels(self.eigenvalues, tol)


def group_levels(eigenvalues, tol: float = LEVEL_TOL) -> tuple[np.ndarray, np.ndarray]:
    ev = np.asarray(eigenvalues, dtype=float)
    if ev.size == 0:
        return np.zeros(0, dtype=int), np.zeros(0)
    scale = tol * max(1.0, float(np.max(np.abs(ev))))
    order = np.argsort(ev, kind="stable")
    labels = np.empty(len(ev), dtype=int)
    levels: list[list[float]] = [[ev[order[0]]]]
    labels[order[0]] = 0
    for j in order[1:]:
        if ev[j] - levels[-1][0] > scale:
            levels.append([])
        levels[-1].append(ev[j])
        labels[j] = len(levels) - 1
    return labels, np.array([np.mean(lv) for lv in levels])


def op_norm(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def is_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return op_norm(m - m.conj().T) <= tol * max(1.0, op_norm(m))


def is_unitary(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return op_norm(m.conj().T @ m - np.eye(m.shape[0])) <= tol


def is_projector(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m)
    return is_hermitian(m, tol) and op_norm(m @ m - m) <= tol


def eig_hermitian(m: np.ndarray, tol: float = 1e-9) -> HermitianEigensystem:
    """Diagonalize a Hermitian matrix; raises :class:`NotHermitian` otherwise."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {m.shape}")
    if op_norm(m - m.conj().T) > tol * max(1.0, op_norm(m)):
        raise NotHermitian("matrix fails the Hermiticity check")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return HermitianEigensystem(w, v)


def kron(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of one or more operators, left factor most significant."""
    if not ops:
        return np.eye(1, dtype=complex)
    return reduce(np.kron, (np.asarray(o) for o in ops))


def expm_hermitian_phase(h: HermitianEigensystem, t: float) -> np.ndarray:
    """``exp(-i t H)`` from an eigensystem."""
    v = h.eigenvectors
    return (v * np.exp(-1j * t * h.eigenvalues)) @ v.conj().T


def trace_norm(m: np.ndarray) -> float:
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * trace_norm(np.asarray(a) - np.asarray(b))


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over phi of ||U - e^{i phi} V||_op, phi taken from Tr(V^dag U)."""
    u = np.asarray(u)
    v = np.asarray(v)
    overlap = np.trace(v.conj().T @ u)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return op_norm(u - phase * v)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (z + z.conj().T)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = d if rank is None else rank
    z = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


def random_projector(d: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    u = random_unitary(d, rng)[:, :rank]
    return u @ u.conj().T


def orthonormal_range(p: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Columns spanning the range of a Hermitian PSD operator (e.g. a projector)."""
    w, v = np.linalg.eigh(0.5 * (p + p.conj().T))
    return v[:, w > 0.5] if np.all((w < tol) | (w > 1 - tol)) else v[:, w > tol]


def complete_basis(cols: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal columns spanning the orthogonal complement of ``cols``."""
    if cols.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    proj = np.eye(dim) - cols @ cols.conj().T
    w, v = np.linalg.eigh(0.5 * (proj + proj.conj().T))
    return v[:, w > 0.5]

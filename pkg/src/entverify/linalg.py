"""
Dense complex linear algebra on small bipartite operators.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. The Hermitian
eigensolver is a cyclic Jacobi method with round-robin (parallel) ordering:
each round applies ``n/2`` disjoint complex Givens rotations at once, so a
sweep costs ``O(n^3)`` vectorised work instead of ``O(n^2)`` Python-level
rotations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NotHermitian,
    NotUnitary,
)

DEFAULT_TOL = 1e-10
JACOBI_TOL = 1e-13
MAX_SWEEPS = 60

# Phases tried for the Hermitian combination alpha*U + conj(alpha)*U^dagger.
# The first is the documented default; the others are used only when it
# leaves two eigenvalues of the combination unresolved.
UNITARY_PHASES = (0.7853981, 1.0, 2.0, 0.3, 2.7)
MIN_COMBINATION_GAP = 1e-6


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted nonincreasing and matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d array, got shape {m.shape}")
    return m


def is_hermitian(a, tol: float = DEFAULT_TOL) -> bool:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def is_projector(p, tol: float = DEFAULT_TOL) -> bool:
    p = as_matrix(p)
    if not is_hermitian(p, tol):
        return False
    return bool(np.max(np.abs(p @ p - p), initial=0.0) <= tol)


def is_unitary(u, tol: float = DEFAULT_TOL) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    eye = np.eye(u.shape[0])
    return bool(np.max(np.abs(u.conj().T @ u - eye), initial=0.0) <= tol)


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def maximally_entangled(d: int) -> np.ndarray:
    """The vector (1/sqrt(d)) sum_j |jj>."""
    phi = np.zeros(d * d, dtype=complex)
    phi[:: d + 1] = 1.0 / np.sqrt(d)
    return phi


def target_projector(d: int) -> np.ndarray:
    phi = maximally_entangled(d)
    return np.outer(phi, phi.conj())


@lru_cache(maxsize=64)
def _round_robin(n: int) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    """Pairings for one Jacobi sweep; every pair (p<q) appears exactly once."""
    m = n + (n % 2)  # odd n: a dummy player sits out one pair per round
    players = list(range(m))
    ps, qs = [], []
    for _ in range(m - 1):
        pairs = [
            (min(a, b), max(a, b))
            for a, b in zip(players[: m // 2], reversed(players[m // 2 :]))
            if a < n and b < n
        ]
        ps.append(np.array([a for a, _ in pairs], dtype=np.intp))
        qs.append(np.array([b for _, b in pairs], dtype=np.intp))
        players = [players[0], players[-1]] + players[1:-1]
    return tuple(ps), tuple(qs)


def _offdiag_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def hermitian_eig(a, tol: float = DEFAULT_TOL) -> Spectrum:
    """
    Full eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Parameters
    ----------
    a : array_like
        Square Hermitian matrix.
    tol : float
        Tolerance of the Hermiticity check on the input.

    Returns
    -------
    Spectrum
        Real eigenvalues sorted nonincreasing and orthonormal eigenvectors
        as columns.

    Raises
    ------
    NotHermitian
        If ``max|A - A^dagger| > tol``.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"matrix is not square: {a.shape}")
    if not is_hermitian(a, tol):
        raise NotHermitian("input matrix is not Hermitian")
    n = a.shape[0]
    w = 0.5 * (a + a.conj().T)
    vh = np.eye(n, dtype=complex)
    if n > 1:
        scale = float(np.linalg.norm(w))
        threshold = JACOBI_TOL * scale
        rounds_p, rounds_q = _round_robin(n)
        for _ in range(MAX_SWEEPS):
            if _offdiag_norm(w) <= threshold:
                break
            for p, q in zip(rounds_p, rounds_q):
                w = _rotate_round(w, vh, p, q)
    vals = np.real(np.diag(w)).copy()
    order = np.argsort(-vals, kind="stable")
    return Spectrum(vals[order], vh.conj().T[:, order])


def _rotate_round(w: np.ndarray, vh: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Apply one round of disjoint rotations; returns the updated matrix.

    ``w <- G^dagger w G`` is done as two row updates separated by a conjugate
    transpose (row slices are contiguous, column slices are not). ``vh``
    accumulates ``V^dagger`` in place.
    """
    apq = w[p, q]
    mag = np.abs(apq)
    active = mag > 0.0
    if not np.any(active):
        return w
    p, q, apq, mag = p[active], q[active], apq[active], mag[active]
    app = np.real(w[p, p])
    aqq = np.real(w[q, q])
    phase = apq / mag
    tau = (aqq - app) / (2.0 * mag)
    sign = np.where(tau >= 0.0, 1.0, -1.0)
    t = sign / (np.abs(tau) + np.hypot(1.0, tau))
    c = (1.0 / np.sqrt(1.0 + t * t))[:, None]
    s = t[:, None] * c
    # G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on each (p, q) pair
    gp = -s * phase[:, None]
    gq = c * phase[:, None]
    for m in (w, vh):
        rowp = m[p]
        rowq = m[q]
        m[p] = c * rowp + gp * rowq
        m[q] = s * rowp + gq * rowq
    w = w.conj().T.copy()
    rowp = w[p]
    rowq = w[q]
    w[p] = c * rowp + gp * rowq
    w[q] = s * rowp + gq * rowq
    w[p, q] = 0.0
    w[q, p] = 0.0
    w[p, p] = app - t * mag
    w[q, q] = aqq + t * mag
    return w


def fix_phase(ket: np.ndarray, threshold: float = 1e-7) -> np.ndarray:
    """Rotate a ket so that its first non-negligible amplitude is real positive."""
    ket = np.asarray(ket, dtype=complex)
    idx = np.flatnonzero(np.abs(ket) > threshold)
    if idx.size == 0:
        return ket.copy()
    lead = ket[idx[0]]
    out = ket * (np.conj(lead) / abs(lead))
    out[idx[0]] = abs(lead)
    return out


def _phase_key(z: complex) -> float:
    ang = float(np.angle(z)) % (2 * np.pi)
    if ang > 2 * np.pi - 1e-9:
        ang = 0.0
    return ang


def unitary_eigenbasis(u, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """
    Orthonormal eigenbasis of a unitary with nondegenerate spectrum.

    The unitary is turned into the Hermitian matrix
    ``alpha*U + conj(alpha)*U^dagger`` and diagonalised; each resulting
    vector is then checked to be an eigenvector of ``U`` to 1e-8.

    Returns
    -------
    kets : ndarray
        ``d x d`` array whose columns are the eigenvectors, sorted by the
        phase of their eigenvalue in ``[0, 2*pi)`` and phase-fixed so that
        the leading nonzero amplitude is real positive.
    eigenvalues : ndarray
        The matching eigenvalues of ``U``.
    """
    u = as_matrix(u)
    if not is_unitary(u, tol):
        raise NotUnitary("input matrix is not unitary")
    n = u.shape[0]
    last_error: Exception | None = None
    for theta in UNITARY_PHASES:
        alpha = np.exp(1j * theta)
        h = alpha * u + np.conj(alpha) * u.conj().T
        spec = hermitian_eig(h, tol=1e-8)
        gaps = -np.diff(spec.eigenvalues)
        if n > 1 and np.min(gaps) < MIN_COMBINATION_GAP:
            last_error = DegenerateSpectrum("Hermitian combination is degenerate")
            continue
        vecs = spec.eigenvectors
        lams = np.einsum("ij,ik,kj->j", vecs.conj(), u, vecs)
        resid = np.max(np.abs(u @ vecs - vecs * lams))
        if resid > 1e-8:
            last_error = DegenerateSpectrum("eigenvector check failed")
            continue
        order = sorted(range(n), key=lambda j: _phase_key(lams[j]))
        kets = np.column_stack([fix_phase(vecs[:, j]) for j in order])
        return kets, lams[order]
    # every phase collapsed two eigenvalues: the unitary itself is degenerate
    lams = np.linalg.eigvals(u)
    sep = min(
        (abs(lams[i] - lams[j]) for i in range(n) for j in range(i + 1, n)),
        default=np.inf,
    )
    if sep <= 1e-6:
        raise DegenerateSpectrum(f"unitary eigenvalues separated by only {sep:.3g}")
    raise last_error or DegenerateSpectrum("could not resolve eigenbasis")


def _check_bipartite(a: np.ndarray, d: int) -> None:
    if a.shape != (d * d, d * d):
        raise DimensionMismatch(f"expected a {d * d}x{d * d} matrix, got {a.shape}")


def partial_trace_b(a, d: int) -> np.ndarray:
    """Trace out the second tensor factor of a ``d^2 x d^2`` operator."""
    a = as_matrix(a)
    _check_bipartite(a, d)
    return np.einsum("ijkj->ik", a.reshape(d, d, d, d))


def partial_transpose_b(a, d: int) -> np.ndarray:
    """Transpose the second tensor factor of a ``d^2 x d^2`` operator."""
    a = as_matrix(a)
    _check_bipartite(a, d)
    return a.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(d * d, d * d)

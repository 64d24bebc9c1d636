"""
Orthonormal bases of the local space: computational, Fourier, eigenbases of
Heisenberg-Weyl operators, conjugation, mutual unbiasedness and MUB sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cmp_to_key

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidDimension,
    UnbiasednessViolation,
    UnsupportedDimension,
)
from .linalg import fix_phase, unitary_eigenbasis

ORTHONORMAL_TOL = 1e-10
MUB_CERT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Basis:
    """
    An ordered orthonormal basis of C^d.

    ``kets`` holds the basis vectors as columns of a ``d x d`` array.
    """

    kets: np.ndarray
    label: str = ""
    _unbiased_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        kets = np.array(self.kets, dtype=complex)
        if kets.ndim != 2 or kets.shape[0] != kets.shape[1]:
            raise DimensionMismatch(f"basis must be d x d, got shape {kets.shape}")
        gram = kets.conj().T @ kets
        if np.max(np.abs(gram - np.eye(kets.shape[0]))) > ORTHONORMAL_TOL:
            raise DimensionMismatch("kets are not orthonormal")
        kets.setflags(write=False)
        object.__setattr__(self, "kets", kets)

    @property
    def d(self) -> int:
        return self.kets.shape[0]

    def __len__(self) -> int:
        return self.d

    def __iter__(self):
        return iter(self.kets.T)

    def ket(self, j: int) -> np.ndarray:
        return self.kets[:, j]

    def to_json(self) -> list:
        """Kets as lists of ``[re, im]`` pairs."""
        return [[[float(z.real), float(z.imag)] for z in ket] for ket in self.kets.T]

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data, label: str = "") -> "Basis":
        kets = np.array([[complex(re, im) for re, im in ket] for ket in data])
        return cls(kets.T, label)

    @classmethod
    def loads(cls, text: str, label: str = "") -> "Basis":
        return cls.from_json(json.loads(text), label)


@dataclass(frozen=True)
class WeylPair:
    d: int
    Z: np.ndarray
    X: np.ndarray
    omega: complex


def weyl_pair(d: int) -> WeylPair:
    """Clock and shift operators: Z|j> = w^j |j>, X|j> = |j+1 mod d>."""
    if d < 2:
        raise InvalidDimension(f"local dimension must be >= 2, got {d}")
    omega = np.exp(2j * np.pi / d)
    z = np.diag(omega ** np.arange(d))
    x = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    for m in (z, x):
        m.setflags(write=False)
    return WeylPair(d, z, x, complex(omega))


def computational_basis(d: int) -> Basis:
    return Basis(np.eye(d, dtype=complex), "Z")


def fourier_basis(d: int) -> Basis:
    """Columns (1/sqrt d)(1, w^k, w^{2k}, ...) for k = 0..d-1."""
    j = np.arange(d)
    omega = np.exp(2j * np.pi / d)
    return Basis(omega ** np.outer(j, j) / np.sqrt(d), "F")


def eigenbasis(u: np.ndarray, label: str = "") -> Basis:
    kets, _ = unitary_eigenbasis(u)
    return Basis(kets, label)


def conjugate_basis(b: Basis) -> Basis:
    label = b.label[:-1] if b.label.endswith("*") else (b.label + "*" if b.label else "")
    return Basis(b.kets.conj(), label)


def overlaps(b1: Basis, b2: Basis) -> np.ndarray:
    """Matrix of |<psi_i|phi_j>|^2."""
    if b1.d != b2.d:
        raise DimensionMismatch(f"bases live in dimensions {b1.d} and {b2.d}")
    return np.abs(b1.kets.conj().T @ b2.kets) ** 2


def is_mutually_unbiased(b1: Basis, b2: Basis, tol: float = MUB_CERT_TOL) -> bool:
    key = (id(b2), tol)
    cached = b1._unbiased_cache.get(key)
    if cached is not None and cached[0] is b2:
        return cached[1]
    result = bool(np.max(np.abs(overlaps(b1, b2) - 1.0 / b1.d)) <= tol)
    b1._unbiased_cache[key] = (b2, result)
    return result


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % k for k in range(2, int(n**0.5) + 1))


def _weyl_labels(g: int) -> list[str]:
    names = ["Z", "X"] + [f"XZ^{m}" if m > 1 else "XZ" for m in range(1, g)]
    return names[:g]


def mub_set(d: int, g: int) -> list[Basis]:
    """
    ``g`` pairwise mutually unbiased bases in dimension ``d``.

    The bases are the eigenbases of Z, X, XZ, XZ^2, ..., XZ^{d-1} in that
    order. Any ``d`` supports the first three; a prime ``d`` supports up to the
    complete set of ``d+1``. Each result is certified pairwise unbiased at
    1e-8 before it is returned.
    """
    if d < 2:
        raise InvalidDimension(f"local dimension must be >= 2, got {d}")
    if g < 1:
        raise InvalidDimension(f"need at least one basis, got g={g}")
    if g > 3 and not is_prime(d):
        raise UnsupportedDimension(
            f"more than 3 MUB requested in non-prime dimension d={d}"
        )
    if g > d + 1:
        raise UnsupportedDimension(f"at most d+1={d + 1} MUB exist in dimension {d}")
    w = weyl_pair(d)
    bases = [computational_basis(d)]
    if g > 1:
        bases.append(eigenbasis(w.X, "X"))
    zm = np.eye(d, dtype=complex)
    for m, label in zip(range(1, g - 1), _weyl_labels(g)[2:]):
        zm = zm @ w.Z
        bases.append(eigenbasis(w.X @ zm, label))
    for i in range(len(bases)):
        for j in range(i + 1, len(bases)):
            if not is_mutually_unbiased(bases[i], bases[j], MUB_CERT_TOL):
                raise UnbiasednessViolation(
                    f"bases {bases[i].label} and {bases[j].label} are not unbiased (d={d})"
                )
    return bases


def random_basis(d: int, rng: np.random.Generator) -> Basis:
    """Haar-random basis from the QR decomposition of a Ginibre matrix."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return Basis(q, "random")


def _ket_cmp(a: np.ndarray, b: np.ndarray, tol: float = 1e-6) -> int:
    for x, y in zip(a, b):
        for u, v in ((x.real, y.real), (x.imag, y.imag)):
            if abs(u - v) > tol:
                return -1 if u > v else 1
    return 0


def canonical_form(b: Basis) -> Basis:
    """
    Phase-fix every ket and sort the kets into a reproducible order.

    Two bases that differ only by ket order and per-ket phases have the same
    canonical form. Kets are compared amplitude by amplitude (real part, then
    imaginary part, descending) with a 1e-6 tie tolerance.
    """
    kets = [fix_phase(k) for k in b.kets.T]
    kets.sort(key=cmp_to_key(_ket_cmp))
    return Basis(np.column_stack(kets), b.label)


def basis_distance(b1: Basis, b2: Basis) -> float:
    """Largest entrywise deviation between corresponding kets."""
    if b1.d != b2.d:
        raise DimensionMismatch(f"bases live in dimensions {b1.d} and {b2.d}")
    return float(np.max(np.abs(b1.kets - b2.kets)))

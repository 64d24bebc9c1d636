"""Robustness of entanglement for bipartite pure states and the spectral
lower bounds they impose on separable verification strategies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionTooLarge, InvalidSchmidt
from .linalg import hermitian_eig, partial_transpose_b

RENORMALIZE_TOL = 1e-8
PPT_MAX_DIM = 12


@dataclass(frozen=True)
class SchmidtVector:
    """Schmidt coefficients sorted nonincreasing with sum of squares 1."""

    s: tuple[float, ...]

    def __init__(self, coefficients: Sequence[float]):
        s = np.asarray(coefficients, dtype=float)
        if s.ndim != 1 or s.size < 1:
            raise InvalidSchmidt("Schmidt coefficients must be a nonempty 1-d sequence")
        if np.any(s < 0) or not np.all(np.isfinite(s)):
            raise InvalidSchmidt("Schmidt coefficients must be finite and nonnegative")
        norm2 = float(np.sum(s**2))
        if abs(norm2 - 1.0) > RENORMALIZE_TOL:
            raise InvalidSchmidt(f"sum of squares is {norm2}, not 1")
        s = np.sort(s)[::-1] / np.sqrt(norm2)
        object.__setattr__(self, "s", tuple(float(x) for x in s))

    @classmethod
    def maximally_entangled(cls, d: int) -> "SchmidtVector":
        return cls(np.full(d, 1.0 / np.sqrt(d)))

    @classmethod
    def product(cls, d: int) -> "SchmidtVector":
        s = np.zeros(d)
        s[0] = 1.0
        return cls(s)

    @classmethod
    def random(cls, d: int, rng: np.random.Generator) -> "SchmidtVector":
        x = np.abs(rng.standard_normal(d))
        return cls(x / np.linalg.norm(x))

    @property
    def d(self) -> int:
        return len(self.s)

    @property
    def s0s1(self) -> float:
        return self.s[0] * self.s[1] if self.d > 1 else 0.0

    def state(self) -> np.ndarray:
        """The vector sum_j s_j |jj>."""
        d = self.d
        psi = np.zeros(d * d, dtype=complex)
        psi[:: d + 1] = self.s
        return psi


@dataclass(frozen=True)
class RobustnessReport:
    E_R: float
    R: float
    T: float
    beta_lower_separable: float
    beta_lower_homogeneous: float
    D: int


def robustness_quantities(s: SchmidtVector) -> RobustnessReport:
    """
    Closed-form robustness measures of ``sum_j s_j |jj>``.

    ``E_R = (sum s_j)^2 - 1``, ``R = D s_0 s_1`` and ``T = (sum s_j)^2``
    with ``D = d^2``. The two bounds are the smallest second eigenvalue of a
    separable strategy and of a homogeneous separable strategy.
    """
    d = s.d
    big_d = d * d
    total = sum(s.s) ** 2
    e_r = total - 1.0
    r = big_d * s.s0s1
    sep = e_r / (big_d - 1) if big_d > 1 else 0.0
    return RobustnessReport(
        E_R=e_r,
        R=r,
        T=total,
        beta_lower_separable=sep,
        beta_lower_homogeneous=s.s0s1 / (1.0 + s.s0s1),
        D=big_d,
    )


def ppt_beta_witness(s: SchmidtVector) -> float:
    """Minus the smallest eigenvalue of the partial transpose of the state."""
    d = s.d
    if d > PPT_MAX_DIM:
        raise DimensionTooLarge(f"d={d} exceeds {PPT_MAX_DIM}")
    psi = s.state()
    pt = partial_transpose_b(np.outer(psi, psi.conj()), d)
    return float(-hermitian_eig(pt).eigenvalues[-1])

"""
Conjugate-basis tests and verification strategies for the maximally
entangled state.

A conjugate-basis test measures Alice in a basis ``B`` and Bob in the
complex-conjugate basis, and passes on equal outcomes. Its pass projector is
``P(B) = sum_psi |psi><psi| (x) |psi*><psi*|``. A strategy mixes such tests
(and possibly the always-pass trivial test) with probabilities ``p_l``; the
verification operator is ``Omega = sum_l p_l P_l``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bases import Basis, canonical_form
from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    LambdaOutOfRange,
    NotAProjector,
    NotConjugateBasisForm,
    NotOptimalStrategy,
    PreconditionError,
    RateOutOfRange,
    WeightError,
)
from .linalg import (
    Spectrum,
    as_matrix,
    hermitian_eig,
    is_projector,
    maximally_entangled,
    target_projector,
)

PROJECTOR_TOL = 1e-9
WEIGHT_TOL = 1e-12
CLASSIFY_TOL = 1e-9
SINGULAR_TOL = 1e-10
RECOVERY_SEED = 0xC0FFEE
RECOVERY_GAP = 1e-8


@dataclass(frozen=True, eq=False)
class TestProjector:
    """Pass projector of one test on the ``d^2``-dimensional bipartite space."""

    __test__ = False  # keep pytest from collecting this class

    d: int
    P: np.ndarray
    rank: int
    source_basis: Basis | None = None

    @classmethod
    def from_matrix(cls, p, d: int, source_basis: Basis | None = None) -> "TestProjector":
        p = as_matrix(p)
        if p.shape != (d * d, d * d):
            raise DimensionMismatch(f"expected {d * d}x{d * d} projector, got {p.shape}")
        if not is_projector(p, PROJECTOR_TOL):
            raise NotAProjector("matrix is not an orthogonal projector")
        phi = maximally_entangled(d)
        if np.max(np.abs(p @ phi - phi)) > PROJECTOR_TOL:
            raise PreconditionError("the target state does not pass this test")
        p = p.copy()
        p.setflags(write=False)
        # for a verified projector, trace = number of eigenvalues near 1
        rank = int(round(float(np.trace(p).real)))
        return cls(d, p, rank, source_basis)

    @property
    def is_trivial(self) -> bool:
        return self.source_basis is None and self.rank == self.d * self.d


def cb_projector(b: Basis) -> TestProjector:
    """Projector onto span{|psi> (x) |psi*> : psi in B}."""
    vecs = np.stack([np.kron(k, k.conj()) for k in b.kets.T], axis=1)
    return TestProjector.from_matrix(vecs @ vecs.conj().T, b.d, b)


def trivial_test(d: int) -> TestProjector:
    return TestProjector.from_matrix(np.eye(d * d), d)


@dataclass(frozen=True)
class WeightedBasisSet:
    entries: tuple[tuple[Basis, float], ...]

    def __init__(self, entries: Iterable[tuple[Basis, float]]):
        entries = tuple((b, float(p)) for b, p in entries)
        if not entries:
            raise WeightError("empty weighted basis set")
        weights = np.array([p for _, p in entries])
        if np.any(weights < 0):
            raise WeightError("weights must be nonnegative")
        if abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise WeightError(f"weights sum to {weights.sum()!r}, not 1")
        dims = {b.d for b, _ in entries}
        if len(dims) != 1:
            raise DimensionMismatch(f"bases of different dimensions: {sorted(dims)}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def uniform(cls, bases: Sequence[Basis]) -> "WeightedBasisSet":
        return cls((b, 1.0 / len(bases)) for b in bases)

    @property
    def d(self) -> int:
        return self.entries[0][0].d

    @property
    def bases(self) -> list[Basis]:
        return [b for b, _ in self.entries]

    @property
    def weights(self) -> np.ndarray:
        return np.array([p for _, p in self.entries])


@dataclass(frozen=True)
class StrategyFlags:
    parsimonious: bool
    optimal: bool
    perfect: bool
    homogeneous: bool
    singular: bool

    def as_dict(self) -> dict[str, bool]:
        return dict(self.__dict__)


@dataclass(frozen=True, eq=False)
class Strategy:
    """
    A verification strategy with its operator, spectrum and classification.

    Use :func:`build_strategy` or :meth:`Strategy.from_tests` rather than the
    raw constructor; they compute the spectrum eagerly.
    """

    d: int
    tests: tuple[tuple[TestProjector, float], ...]
    omega: np.ndarray
    spectrum: Spectrum
    beta: float
    nu: float
    flags: StrategyFlags

    @classmethod
    def from_tests(cls, tests: Iterable[tuple[TestProjector, float]]) -> "Strategy":
        tests = tuple((t, float(p)) for t, p in tests)
        if not tests:
            raise WeightError("a strategy needs at least one test")
        dims = {t.d for t, _ in tests}
        if len(dims) != 1:
            raise DimensionMismatch(f"tests of different dimensions: {sorted(dims)}")
        d = dims.pop()
        weights = np.array([p for _, p in tests])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > WEIGHT_TOL:
            raise WeightError("test probabilities must be nonnegative and sum to 1")

        omega = sum(p * t.P for t, p in tests)
        omega.setflags(write=False)
        spectrum = hermitian_eig(omega)
        vals = spectrum.eigenvalues
        phi = maximally_entangled(d)
        if abs(vals[0] - 1.0) > 1e-9 or np.max(np.abs(omega @ phi - phi)) > 1e-9:
            raise PreconditionError("target state is not the top eigenvector of Omega")
        beta = float(vals[1])
        g = len(tests)
        parsimonious = abs(beta - 1.0 / g) <= CLASSIFY_TOL
        optimal = abs(beta - 1.0 / (d + 1)) <= CLASSIFY_TOL
        proj = target_projector(d)
        homogeneous_target = proj + beta * (np.eye(d * d) - proj)
        homogeneous = bool(np.max(np.abs(omega - homogeneous_target)) <= CLASSIFY_TOL)
        flags = StrategyFlags(
            parsimonious=parsimonious,
            optimal=optimal,
            perfect=parsimonious and optimal,
            homogeneous=homogeneous,
            singular=bool(vals[-1] <= SINGULAR_TOL),
        )
        return cls(d, tests, omega, spectrum, beta, 1.0 - beta, flags)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.tests])

    @property
    def g(self) -> int:
        return len(self.tests)

    def pass_probability(self, rho) -> float:
        """tr(Omega rho)."""
        return float(np.real(np.trace(self.omega @ as_matrix(rho))))

    def beta_eigenvector(self) -> np.ndarray:
        """A unit eigenvector of Omega with eigenvalue beta, orthogonal to the target."""
        phi = maximally_entangled(self.d)
        vals = self.spectrum.eigenvalues
        vecs = self.spectrum.eigenvectors
        cols = np.flatnonzero(np.abs(vals - self.beta) <= 1e-9)
        cands = vecs[:, cols] - np.outer(phi, phi.conj() @ vecs[:, cols])
        norms = np.linalg.norm(cands, axis=0)
        best = int(np.argmax(norms))
        return cands[:, best] / norms[best]

    def to_json(self) -> dict:
        tests = []
        for t, p in self.tests:
            if t.source_basis is not None:
                tests.append({"basis": t.source_basis.to_json(), "p": p})
            elif t.is_trivial:
                tests.append({"basis": "trivial", "p": p})
            else:
                raise NotConjugateBasisForm("only CB and trivial tests can be serialized")
        return {
            "d": self.d,
            "tests": tests,
            "beta": self.beta,
            "nu": self.nu,
            "flags": self.flags.as_dict(),
        }

    def dumps(self, **kwargs) -> str:
        return json.dumps(self.to_json(), **kwargs)

    @classmethod
    def from_json(cls, data: dict) -> "Strategy":
        d = int(data["d"])
        tests = []
        for entry in data["tests"]:
            if entry["basis"] == "trivial":
                tests.append((trivial_test(d), entry["p"]))
            else:
                tests.append((cb_projector(Basis.from_json(entry["basis"])), entry["p"]))
        return cls.from_tests(tests)

    @classmethod
    def loads(cls, text: str) -> "Strategy":
        return cls.from_json(json.loads(text))


def cb_operator(wbs: WeightedBasisSet) -> np.ndarray:
    return sum(p * cb_projector(b).P for b, p in wbs.entries)


def build_strategy(wbs: WeightedBasisSet) -> Strategy:
    return Strategy.from_tests((cb_projector(b), p) for b, p in wbs.entries)


def optimal_operator(d: int) -> np.ndarray:
    """(1 + d |Phi><Phi|)/(d+1)."""
    return (np.eye(d * d) + d * target_projector(d)) / (d + 1)


def is_2design(wbs: WeightedBasisSet, tol: float = 1e-9) -> bool:
    """True when the weighted bases reproduce the optimal operator entrywise."""
    diff = cb_operator(wbs) - optimal_operator(wbs.d)
    return bool(np.max(np.abs(diff)) <= tol)


def trivial_probability(d: int, lam: float) -> float:
    """Weight of the trivial test that lifts an optimal strategy to beta = lam."""
    return ((d + 1) * lam - 1.0) / d


def homogenize(opt: Strategy, lam: float) -> Strategy:
    """
    Mix the trivial test into an optimal strategy to get a homogeneous one
    with second eigenvalue ``lam``.
    """
    d = opt.d
    if not opt.flags.optimal:
        raise NotOptimalStrategy("homogenize needs an optimal strategy")
    if not (1.0 / (d + 1) - 1e-12 <= lam < 1.0):
        raise LambdaOutOfRange(f"lambda={lam} outside [1/(d+1), 1) for d={d}")
    p = max(trivial_probability(d, lam), 0.0)
    if p <= 1e-15:
        return opt
    tests = [(t, q * (1.0 - p)) for t, q in opt.tests] + [(trivial_test(d), p)]
    return Strategy.from_tests(tests)


def worst_case_density(s: Strategy, epsilon: float) -> np.ndarray:
    phi = maximally_entangled(s.d)
    v = s.beta_eigenvector()
    return (1.0 - epsilon) * np.outer(phi, phi.conj()) + epsilon * np.outer(v, v.conj())


def max_pass_probability(s: Strategy, epsilon: float) -> tuple[float, np.ndarray]:
    """
    Largest pass probability of a state with infidelity at least ``epsilon``.

    Returns ``1 - nu*epsilon`` together with a state that attains it.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise RateOutOfRange(f"epsilon={epsilon} outside [0, 1]")
    return 1.0 - s.nu * epsilon, worst_case_density(s, epsilon)


def fidelity_from_pass_rate(s: Strategy, rate: float) -> float:
    """Fidelity with the target implied by a pass rate of an optimal strategy."""
    d = s.d
    if not (s.flags.optimal and s.flags.homogeneous):
        raise NotOptimalStrategy("fidelity inference needs an optimal strategy")
    if not (1.0 / (d + 1) - 1e-12 <= rate <= 1.0 + 1e-12):
        raise RateOutOfRange(f"rate={rate} outside [1/(d+1), 1]")
    return ((d + 1) * rate - 1.0) / d


def _support_generators(vecs: np.ndarray, d: int) -> list[np.ndarray]:
    """Hermitian parts of the d x d matrices |a><b*| spanning the support."""
    gens = []
    for w in vecs.T:
        m = w.reshape(d, d)
        gens.append(0.5 * (m + m.conj().T))
        gens.append(-0.5j * (m - m.conj().T))
    return gens


def recover_basis(p) -> Basis:
    """
    Recover ``B`` from a projector of the form ``P(B)``.

    The support of ``P`` is mapped to d x d matrices through
    ``|a> (x) |b>  ->  |a><b*|``; for ``P = P(B)`` these are exactly the
    matrices diagonal in ``B``. A random real combination of their Hermitian
    parts is diagonalised and the result is checked against ``P``.

    Raises
    ------
    PreconditionError
        If ``P`` does not have rank ``d`` or does not fix the target state.
    NotConjugateBasisForm
        If ``P`` is not ``P(B)`` for any basis.
    """
    if isinstance(p, TestProjector):
        d, mat = p.d, p.P
    else:
        mat = as_matrix(p)
        d = int(round(np.sqrt(mat.shape[0])))
        if d * d != mat.shape[0]:
            raise DimensionMismatch(f"{mat.shape} is not a bipartite d^2 x d^2 shape")
    phi = maximally_entangled(d)
    if np.max(np.abs(mat @ phi - phi)) > PROJECTOR_TOL:
        raise PreconditionError("projector does not fix the target state")
    spec = hermitian_eig(mat, tol=PROJECTOR_TOL)
    rank = int(np.sum(spec.eigenvalues > 0.5))
    if rank != d:
        raise PreconditionError(f"projector has rank {rank}, expected {d}")
    gens = _support_generators(spec.eigenvectors[:, :d], d)

    for seed in (RECOVERY_SEED, RECOVERY_SEED + 1):
        weights = np.random.default_rng(seed).standard_normal(len(gens))
        h = sum(w * g for w, g in zip(weights, gens))
        hs = hermitian_eig(h, tol=1e-8)
        if d == 1 or np.min(-np.diff(hs.eigenvalues)) >= RECOVERY_GAP:
            break
    else:
        raise DegenerateSpectrum("support combination stayed degenerate after reseeding")

    basis = canonical_form(Basis(hs.eigenvectors, "recovered"))
    if np.max(np.abs(cb_projector(basis).P - mat)) > 1e-8:
        raise NotConjugateBasisForm("projector is not of conjugate-basis form")
    return basis


def orthogonality_check(p1, p2) -> bool:
    """True when P1 - |Phi><Phi| and P2 - |Phi><Phi| are orthogonal."""
    m1 = p1.P if isinstance(p1, TestProjector) else as_matrix(p1)
    m2 = p2.P if isinstance(p2, TestProjector) else as_matrix(p2)
    if m1.shape != m2.shape:
        raise DimensionMismatch(f"shapes {m1.shape} and {m2.shape} differ")
    d = int(round(np.sqrt(m1.shape[0])))
    proj = target_projector(d)
    return bool(np.real(np.trace((m1 - proj) @ (m2 - proj))) <= 1e-9)

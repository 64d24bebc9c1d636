"""
Monte Carlo simulation of the verification protocol on i.i.d. noisy states.

Random numbers come from numpy's Philox-4x64-10 counter-based generator
(``numpy.random.Philox``), keyed by ``SeedSequence(seed)``. Worker streams
for split runs are ``SeedSequence(seed).spawn(workers)``. Each round draws a
test with probability ``p_l`` and then passes with probability
``tr(P_l rho)``; measurement outcomes themselves are not simulated.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EpsilonOutOfRange, NotOptimalStrategy
from .linalg import as_matrix, hermitian_eig, maximally_entangled, target_projector
from .strategy import Strategy, worst_case_density

CHUNK = 1 << 20

DEPOLARIZED = "depolarized"
WORST_CASE = "worst_case"
CUSTOM = "custom_density"


@dataclass(frozen=True, eq=False)
class NoisyStateModel:
    kind: str
    d: int
    epsilon: float
    density: np.ndarray

    def __post_init__(self):
        rho = as_matrix(self.density)
        n = self.d * self.d
        if rho.shape != (n, n):
            raise DimensionMismatch(f"density must be {n}x{n}, got {rho.shape}")
        if abs(np.trace(rho) - 1.0) > 1e-10:
            raise EpsilonOutOfRange("density matrix must have unit trace")
        if hermitian_eig(rho).eigenvalues[-1] < -1e-10:
            raise EpsilonOutOfRange("density matrix must be positive semidefinite")
        rho = rho.copy()
        rho.setflags(write=False)
        object.__setattr__(self, "density", rho)

    @property
    def fidelity(self) -> float:
        phi = maximally_entangled(self.d)
        return float(np.real(phi.conj() @ self.density @ phi))


def depolarized_state(d: int, epsilon: float) -> NoisyStateModel:
    """(1-q)|Phi><Phi| + q I/d^2 with fidelity exactly 1 - epsilon."""
    if not 0.0 <= epsilon <= 1.0 - 1.0 / d**2 + 1e-15:
        raise EpsilonOutOfRange(f"epsilon={epsilon} outside [0, 1 - 1/d^2]")
    q = epsilon / (1.0 - 1.0 / d**2)
    rho = (1.0 - q) * target_projector(d) + q * np.eye(d * d) / d**2
    return NoisyStateModel(DEPOLARIZED, d, epsilon, rho)


def worst_case_state(s: Strategy, epsilon: float) -> NoisyStateModel:
    """State of infidelity epsilon that passes ``s`` with the largest probability."""
    if not 0.0 <= epsilon <= 1.0:
        raise EpsilonOutOfRange(f"epsilon={epsilon} outside [0, 1]")
    return NoisyStateModel(WORST_CASE, s.d, epsilon, worst_case_density(s, epsilon))


def custom_state(rho) -> NoisyStateModel:
    rho = as_matrix(rho)
    d = int(round(np.sqrt(rho.shape[0])))
    phi = maximally_entangled(d)
    eps = 1.0 - float(np.real(phi.conj() @ rho @ phi))
    return NoisyStateModel(CUSTOM, d, eps, rho)


def make_generator(seed: int | np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class RunResult:
    trials: int
    passes: int
    per_test: tuple[tuple[int, int], ...]  # (uses, passes) by test index
    seed: int

    @property
    def rate(self) -> float:
        return self.passes / self.trials if self.trials else float("nan")

    @property
    def stderr(self) -> float:
        p = self.rate
        return float(np.sqrt(p * (1.0 - p) / self.trials))

    def merge(self, other: "RunResult") -> "RunResult":
        if self.seed != other.seed or len(self.per_test) != len(other.per_test):
            raise ValueError("can only merge runs of the same seed and strategy")
        tallies = tuple(
            (u1 + u2, p1 + p2) for (u1, p1), (u2, p2) in zip(self.per_test, other.per_test)
        )
        return RunResult(self.trials + other.trials, self.passes + other.passes, tallies, self.seed)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "passes": self.passes,
            "per_test": [{"test": i, "uses": u, "passes": p} for i, (u, p) in enumerate(self.per_test)],
        }

    def dumps(self, **kwargs) -> str:
        return json.dumps(self.to_json(), **kwargs)

    @classmethod
    def from_json(cls, data: dict) -> "RunResult":
        per = sorted(data["per_test"], key=lambda e: e["test"])
        return cls(
            int(data["trials"]),
            int(data["passes"]),
            tuple((int(e["uses"]), int(e["passes"])) for e in per),
            int(data["seed"]),
        )


def test_pass_probabilities(s: Strategy, model: NoisyStateModel) -> np.ndarray:
    """tr(P_l rho) for every test of the strategy."""
    if s.d != model.d:
        raise DimensionMismatch(f"strategy has d={s.d}, state has d={model.d}")
    probs = np.array([np.real(np.trace(t.P @ model.density)) for t, _ in s.tests])
    return np.clip(probs, 0.0, 1.0)


test_pass_probabilities.__test__ = False  # not a pytest test


def analytic_pass_rate(s: Strategy, model: NoisyStateModel) -> float:
    return s.pass_probability(model.density)


def _simulate(weights, probs, n, rng):
    g = len(weights)
    uses = np.zeros(g, dtype=np.int64)
    passes = np.zeros(g, dtype=np.int64)
    done = 0
    while done < n:
        m = min(CHUNK, n - done)
        picks = rng.choice(g, size=m, p=weights)
        ok = rng.random(m) < probs[picks]
        uses += np.bincount(picks, minlength=g)
        passes += np.bincount(picks[ok], minlength=g)
        done += m
    return uses, passes


def run_protocol(s: Strategy, model: NoisyStateModel, n: int, seed: int) -> RunResult:
    """Run ``n`` rounds of the protocol; deterministic given ``seed``."""
    probs = test_pass_probabilities(s, model)
    weights = s.probabilities / s.probabilities.sum()
    uses, passes = _simulate(weights, probs, n, make_generator(seed))
    return RunResult(n, int(passes.sum()), tuple(zip(map(int, uses), map(int, passes))), seed)


def run_protocol_parallel(
    s: Strategy, model: NoisyStateModel, n: int, seed: int, workers: int = 4
) -> RunResult:
    """Split ``n`` rounds over ``workers`` independent child streams and merge."""
    probs = test_pass_probabilities(s, model)
    weights = s.probabilities / s.probabilities.sum()
    children = np.random.SeedSequence(seed).spawn(workers)
    shares = [n // workers + (i < n % workers) for i in range(workers)]

    def work(i):
        uses, passes = _simulate(weights, probs, shares[i], make_generator(children[i]))
        return RunResult(shares[i], int(passes.sum()), tuple(zip(map(int, uses), map(int, passes))), seed)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(work, range(workers)))
    out = parts[0]
    for part in parts[1:]:
        out = out.merge(part)
    return out


def all_pass_frequency(
    s: Strategy, model: NoisyStateModel, n_tests: int, repetitions: int, seed: int
) -> float:
    """Fraction of independent ``n_tests``-round runs in which every test passed."""
    probs = test_pass_probabilities(s, model)
    weights = s.probabilities / s.probabilities.sum()
    rng = make_generator(seed)
    picks = rng.choice(len(weights), size=(repetitions, n_tests), p=weights)
    ok = rng.random((repetitions, n_tests)) < probs[picks]
    return float(np.mean(np.all(ok, axis=1)))


def estimate_fidelity(s: Strategy, result: RunResult) -> tuple[float, float]:
    """Fidelity estimate and its standard error from an optimal strategy's pass rate."""
    if not s.flags.optimal:
        raise NotOptimalStrategy("fidelity estimation needs an optimal strategy")
    d = s.d
    rate = result.rate
    return ((d + 1) * rate - 1.0) / d, (d + 1) / d * result.stderr

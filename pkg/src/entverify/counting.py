"""
Numbers of tests, fidelity bounds and one-test thresholds for verifying the
maximally entangled state in the nonadversarial and adversarial scenarios.

Every exact count is a ceiling of a real expression. Inputs that are floats
are first read as the nearest simple rational (denominator at most 10^6)
when they agree with it to a few ulps, so that values such as ``0.1`` or
``19/20`` behave exactly at the ceiling boundaries. Functions prefixed
``asymptotic_`` are large-N approximations and are never used by the exact
routines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import NamedTuple, Union

from scipy.optimize import bisect

from .errors import DomainError

Real = Union[float, int, Fraction]

NONADVERSARIAL = "nonadversarial"
ADVERSARIAL_SINGULAR = "adversarial-singular"
ADVERSARIAL_HOMOGENEOUS = "adversarial-homogeneous"
SCENARIOS = (NONADVERSARIAL, ADVERSARIAL_SINGULAR, ADVERSARIAL_HOMOGENEOUS)

_SNAP_DENOMINATOR = 10**6
_NEAR_INTEGER = 1e-9
_EXACT_POWER_LIMIT = 5000


def as_rational(x: Real) -> Fraction:
    """Exact rational reading of a parameter value."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    exact = Fraction(float(x))
    snapped = exact.limit_denominator(_SNAP_DENOMINATOR)
    if abs(snapped - exact) <= 4 * 2.0**-52 * abs(exact):
        return snapped
    return exact


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def _floor(q: Fraction) -> int:
    return q.numerator // q.denominator


def _pow_le(base: Fraction, n: int, bound: Fraction) -> bool:
    """base**n <= bound, exactly for moderate n."""
    if n <= _EXACT_POWER_LIMIT:
        return base**n <= bound
    with localcontext() as ctx:
        ctx.prec = 80
        lhs = (Decimal(base.numerator) / Decimal(base.denominator)) ** n
        rhs = Decimal(bound.numerator) / Decimal(bound.denominator)
        return lhs <= rhs * (1 + Decimal(10) ** -60)


def _require_open_unit(**values: Fraction) -> None:
    for name, v in values.items():
        if not 0 < v < 1:
            raise DomainError(f"{name}={float(v)} must lie in (0, 1)")


def _smallest_power_count(q: Fraction, delta: Fraction) -> int:
    """Smallest N >= 1 with q**N <= delta, for 0 < q < 1."""
    ratio = math.log(delta) / math.log(q)
    n = max(1, math.ceil(ratio))
    nearest = round(ratio)
    if abs(ratio - nearest) <= _NEAR_INTEGER and nearest >= 1:
        n = nearest if _pow_le(q, nearest, delta) else nearest + 1
    return n


# -- nonadversarial ---------------------------------------------------------


def tests_nonadversarial(epsilon: Real, delta: Real, nu: Real) -> int:
    """Smallest ``N`` with ``(1 - nu*epsilon)**N <= delta``."""
    eps, dl, nu_ = as_rational(epsilon), as_rational(delta), as_rational(nu)
    _require_open_unit(epsilon=eps, delta=dl)
    if not 0 < nu_ <= 1:
        raise DomainError(f"nu={float(nu_)} must lie in (0, 1]")
    if nu_ * eps >= 1:
        raise DomainError("nu*epsilon must be < 1")
    if nu_ * eps + dl >= 1:
        return 1
    return _smallest_power_count(1 - nu_ * eps, dl)


def one_test_nonadversarial(epsilon: Real, delta: Real, nu: Real) -> bool:
    return as_rational(nu) * as_rational(epsilon) + as_rational(delta) >= 1


def one_test_significance_nonadversarial(epsilon: Real, nu: Real) -> float:
    """Significance level guaranteed by passing a single test."""
    return float(1 - as_rational(nu) * as_rational(epsilon))


# -- adversarial, singular strategies ---------------------------------------


class FidelityBound(NamedTuple):
    value: float
    exact: bool  # True when nu >= 1/2, where the bound is attained


def fidelity_bound_singular(n: int, delta: Real, nu: Real) -> FidelityBound:
    """Fidelity guaranteed after passing ``n`` tests of a singular strategy."""
    if n < 1:
        raise DomainError("N must be >= 1")
    dl, nu_ = as_rational(delta), as_rational(nu)
    _require_open_unit(delta=dl)
    if not 0 < nu_ <= 1:
        raise DomainError(f"nu={float(nu_)} must lie in (0, 1]")
    worst = min((1 - dl) / (n * dl * nu_), 1 / ((n + 1) * dl), Fraction(1))
    return FidelityBound(float(1 - worst), bool(nu_ >= Fraction(1, 2)))


def tests_adversarial_singular(epsilon: Real, delta: Real, nu: Real) -> int:
    eps, dl, nu_ = as_rational(epsilon), as_rational(delta), as_rational(nu)
    _require_open_unit(epsilon=eps, delta=dl)
    if not 0 < nu_ <= 1:
        raise DomainError(f"nu={float(nu_)} must lie in (0, 1]")
    return min(_ceil((1 - dl) / (nu_ * dl * eps)), _ceil(1 / (dl * eps) - 1))


# -- adversarial, homogeneous strategies ------------------------------------


@dataclass(frozen=True)
class EtaZeta:
    N: int
    lam: float
    k: int
    eta: float
    zeta: float


def eta(n: int, lam: float, k: int) -> float:
    lead = k * lam ** (k - 1) if k > 0 else 0.0
    return (lead + (n + 1 - k) * lam**k) / (n + 1)


def zeta(n: int, lam: float, k: int) -> float:
    return (n + 1 - k) * lam**k / (n + 1)


def eta_zeta(n: int, lam: float, k: int) -> EtaZeta:
    return EtaZeta(n, lam, k, eta(n, lam, k), zeta(n, lam, k))


class AdversarialFidelity(NamedTuple):
    value: float
    k: int | None
    p1: float | None
    p2: float | None


def min_fidelity_adversarial_detail(n: int, delta: float, lam: float) -> AdversarialFidelity:
    """
    Minimum fidelity of the unmeasured system after ``n`` passed tests of a
    homogeneous strategy with second eigenvalue ``lam``.

    ``k`` is the largest integer with ``eta_k >= delta``; it is found by a
    linear scan, without assuming ``eta_k`` is monotone in ``k``.
    """
    if n < 1:
        raise DomainError("N must be >= 1")
    if not (0 < delta < 1 and 0 < lam < 1):
        raise DomainError("delta and lambda must lie in (0, 1)")
    if delta <= lam**n:
        return AdversarialFidelity(0.0, None, None, None)
    # eta_{N+1} = lam**N < delta, so the scan starts at N
    k = next(j for j in range(n, -1, -1) if eta(n, lam, j) >= delta)
    e1, e2 = eta(n, lam, k), eta(n, lam, k + 1)
    p1 = (delta - e2) / (e1 - e2)
    p2 = 1.0 - p1
    value = (p1 * zeta(n, lam, k) + p2 * zeta(n, lam, k + 1)) / delta
    return AdversarialFidelity(value, k, p1, p2)


def min_fidelity_adversarial(n: int, delta: float, lam: float) -> float:
    return min_fidelity_adversarial_detail(n, delta, lam).value


def min_fidelity_one_test(delta: float, lam: float) -> float:
    """Closed form of the minimum fidelity for a single test."""
    if delta <= lam:
        return 0.0
    if delta <= (1 + lam) / 2:
        return lam * (delta - lam) / (delta * (1 - lam))
    return (delta * (2 - lam) - 1) / (delta * (1 - lam))


def one_test_adversarial(epsilon: Real, delta: Real, lam: Real) -> bool:
    """
    Whether one passed test certifies infidelity ``< epsilon`` at level ``delta``.

    Sufficient in general; also necessary when ``delta <= (1 + lam)/2``.
    """
    eps, dl, la = as_rational(epsilon), as_rational(delta), as_rational(lam)
    _require_open_unit(epsilon=eps, delta=dl, lam=la)
    return la * (dl - la) / (dl * (1 - la)) >= 1 - eps


def one_test_significance_adversarial(epsilon: Real, lam: Real) -> float:
    """Smallest significance level one passed test can guarantee (inf if none)."""
    eps, la = as_rational(epsilon), as_rational(lam)
    denom = la - (1 - la) * (1 - eps)
    if denom <= 0:
        return math.inf
    return float(la**2 / denom)


def n_tilde(epsilon: Real, delta: Real, lam: Real, k: int) -> Fraction:
    """Real-valued test count attained at the integer ``k``."""
    eps, dl, la = as_rational(epsilon), as_rational(delta), as_rational(lam)
    fid, nu = 1 - eps, 1 - la
    num = k * nu**2 * dl * fid + la ** (k + 1) + la * dl * (k * nu - 1)
    return num / (la * nu * dl * eps)


def _largest_k(lam: Fraction, bound: Fraction) -> int:
    """Largest k >= 0 with lam**k >= bound (bound <= 1)."""
    k = max(0, math.floor(math.log(bound) / math.log(lam)))
    while lam ** (k + 1) >= bound:
        k += 1
    while k > 0 and lam**k < bound:
        k -= 1
    return k


@dataclass(frozen=True)
class CountPlan:
    """Inputs and outputs of one test-count computation."""

    scenario: str
    epsilon: float
    delta: float
    nu_or_lambda: float
    N: int
    one_test: bool
    d: int | None = None
    k_star: int | None = None
    k_minus: int | None = None
    k_plus: int | None = None
    p1: float | None = None
    p2: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "extra"}
        out.update(self.extra)
        return out


def tests_adversarial_homogeneous(epsilon: Real, delta: Real, lam: Real) -> CountPlan:
    """
    Number of tests for a homogeneous strategy in the adversarial scenario.

    Evaluates the real-valued count at ``k*``, the largest ``k`` with
    ``delta <= lam**k / (F + lam*epsilon)``, and rounds up.
    """
    eps, dl, la = as_rational(epsilon), as_rational(delta), as_rational(lam)
    _require_open_unit(epsilon=eps, delta=dl, lam=la)
    k_star = _largest_k(la, dl * (1 - eps + la * eps))
    # log_lambda(delta) bracket: k_minus = floor, k_plus = ceil
    k_minus = _largest_k(la, dl)
    k_plus = k_minus if la**k_minus == dl else k_minus + 1
    n = max(1, _ceil(n_tilde(eps, dl, la, k_star)))
    fid = min_fidelity_adversarial_detail(n, float(dl), float(la))
    return CountPlan(
        scenario=ADVERSARIAL_HOMOGENEOUS,
        epsilon=float(eps),
        delta=float(dl),
        nu_or_lambda=float(la),
        N=n,
        one_test=n == 1,
        k_star=k_star,
        k_minus=k_minus,
        k_plus=k_plus,
        p1=fid.p1,
        p2=fid.p2,
        extra={"n_tilde": float(n_tilde(eps, dl, la, k_star)), "fidelity_at_N": fid.value},
    )


def count_plan(
    scenario: str, epsilon: Real, delta: Real, nu_or_lambda: Real, d: int | None = None
) -> CountPlan:
    """Dispatch a test-count computation by scenario name."""
    if scenario == NONADVERSARIAL:
        n = tests_nonadversarial(epsilon, delta, nu_or_lambda)
        one = one_test_nonadversarial(epsilon, delta, nu_or_lambda)
        return CountPlan(scenario, float(epsilon), float(delta), float(nu_or_lambda), n, one, d)
    if scenario == ADVERSARIAL_SINGULAR:
        n = tests_adversarial_singular(epsilon, delta, nu_or_lambda)
        branch = (
            "1/(delta*eps)-1"
            if n == _ceil(1 / (as_rational(delta) * as_rational(epsilon)) - 1)
            else "(1-delta)/(nu*delta*eps)"
        )
        return CountPlan(
            scenario, float(epsilon), float(delta), float(nu_or_lambda), n, n == 1, d,
            extra={"branch": branch},
        )
    if scenario == ADVERSARIAL_HOMOGENEOUS:
        plan = tests_adversarial_homogeneous(epsilon, delta, nu_or_lambda)
        return CountPlan(**{**plan.__dict__, "d": d})
    raise DomainError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")


# -- entanglement detection -------------------------------------------------


def _detection_epsilon(d: int) -> Fraction:
    if d < 2:
        raise DomainError(f"local dimension must be >= 2, got {d}")
    return Fraction(d - 1, d)


def entanglement_tests_nonadversarial(d: int, delta: Real, nu: Real) -> int:
    """Tests needed to certify entanglement (infidelity (d-1)/d) at level delta."""
    return tests_nonadversarial(_detection_epsilon(d), delta, nu)


def entanglement_tests_optimal(d: int, delta: Real) -> int:
    """Same count for an optimal strategy, nu = d/(d+1)."""
    return entanglement_tests_nonadversarial(d, delta, Fraction(d, d + 1))


def one_test_dimension_nonadversarial(delta: Real) -> int:
    """Smallest d for which one test of an optimal strategy certifies entanglement."""
    dl = as_rational(delta)
    _require_open_unit(delta=dl)
    return max(2, _ceil(2 / dl - 1))


def entanglement_tests_adversarial(d: int, delta: Real, lam: Real) -> int:
    eps = _detection_epsilon(d)
    dl, la = as_rational(delta), as_rational(lam)
    _require_open_unit(delta=dl)
    if not 0 <= la < 1:
        raise DomainError(f"lambda={float(la)} must lie in [0, 1)")
    if la == 0:
        return _ceil(d * (1 - dl) / ((d - 1) * dl))
    return tests_adversarial_homogeneous(eps, dl, la).N


def lambda_star(d: int) -> float:
    """Root in (0, 1) of 1 + (d-1)*lam + ln(lam) = 0."""
    if d < 2:
        raise DomainError(f"local dimension must be >= 2, got {d}")
    return bisect(lambda x: 1 + (d - 1) * x + math.log(x), 1e-12, 1 - 1e-12, xtol=1e-14, maxiter=200)


@dataclass(frozen=True)
class OneTestThreshold:
    """Dimension threshold and admissible second eigenvalues for one-test detection."""

    delta: float
    d_star: int

    def bounds(self, d: int) -> tuple[float, float]:
        """Interval ``[lambda_minus, lambda_plus]`` of admissible beta at dimension d."""
        if d < self.d_star:
            raise DomainError(f"d={d} is below the one-test threshold {self.d_star}")
        dl = self.delta
        disc = dl * ((d + 1) ** 2 * dl - 4 * d)
        lam_plus = ((d + 1) * dl + math.sqrt(max(disc, 0.0))) / (2 * d)
        lam_minus = dl / (d * lam_plus)  # product of the roots is delta/d
        return lam_minus, lam_plus

    def admits(self, d: int, beta: float) -> bool:
        if d < self.d_star:
            return False
        lo, hi = self.bounds(d)
        return lo <= beta <= hi


def one_test_condition(d: int, delta: Real) -> bool:
    """delta >= 4d/(d+1)^2, evaluated exactly."""
    return as_rational(delta) >= Fraction(4 * d, (d + 1) ** 2)


def one_test_threshold(delta: Real) -> OneTestThreshold:
    dl = as_rational(delta)
    if not 0 < dl <= Fraction(1, 2):
        raise DomainError(f"delta={float(dl)} must lie in (0, 1/2]")
    x = float(dl)
    d = max(2, math.ceil((2 + 2 * math.sqrt(1 - x) - x) / x))
    # settle boundary rounding with the exact equivalent condition
    while not one_test_condition(d, dl):
        d += 1
    while d > 2 and one_test_condition(d - 1, dl):
        d -= 1
    return OneTestThreshold(float(dl), d)


# -- asymptotic approximations ----------------------------------------------


def asymptotic_tests_small_delta(epsilon: float, delta: float, lam: float) -> float:
    """Homogeneous adversarial count as delta -> 0."""
    fid = 1 - epsilon
    return (fid + lam * epsilon) / (lam * epsilon * math.log(lam)) * math.log(delta)


def asymptotic_tests_high_precision(epsilon: float, delta: float, lam: float) -> float:
    """Homogeneous adversarial count as epsilon, delta -> 0."""
    return math.log(delta) / (lam * epsilon * math.log(lam))


def asymptotic_high_precision_minimum(epsilon: float, delta: float) -> float:
    """e * ln(1/delta) / epsilon, the optimum over lambda (attained at 1/e)."""
    return math.e * math.log(1 / delta) / epsilon


def asymptotic_entanglement_tests(d: int, delta: float, lam: float) -> float:
    """Adversarial detection count for delta << lam."""
    return (1 + (d - 1) * lam) / ((d - 1) * lam * math.log(lam)) * math.log(delta)


def asymptotic_entanglement_tests_inverse_lambda(d: int, delta: float) -> float:
    """Adversarial detection count at lam = 1/(d-1); assumes delta << lam, d >= 3."""
    if d < 3:
        raise DomainError("needs d >= 3")
    return 2 * math.log(1 / delta) / math.log(d - 1)

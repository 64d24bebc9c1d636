import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entverify.bases import (
    Basis,
    basis_distance,
    canonical_form,
    computational_basis,
    fourier_basis,
    mub_set,
    random_basis,
)
from entverify.errors import (
    LambdaOutOfRange,
    NotAProjector,
    NotConjugateBasisForm,
    NotOptimalStrategy,
    PreconditionError,
    RateOutOfRange,
    WeightError,
)
from entverify.linalg import maximally_entangled, target_projector
from entverify.strategy import (
    Strategy,
    TestProjector,
    WeightedBasisSet,
    build_strategy,
    cb_operator,
    cb_projector,
    fidelity_from_pass_rate,
    homogenize,
    is_2design,
    max_pass_probability,
    optimal_operator,
    orthogonality_check,
    recover_basis,
    trivial_probability,
    trivial_test,
)

I2 = np.eye(2)
X = np.array([[0, 1], [1, 0]])
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1, -1])


def uniform(d, g):
    return build_strategy(WeightedBasisSet.uniform(mub_set(d, g)))


def test_qubit_projectors():
    b = mub_set(2, 3)
    np.testing.assert_allclose(cb_projector(b[0]).P, (np.kron(I2, I2) + np.kron(Z, Z)) / 2, atol=1e-12)
    np.testing.assert_allclose(cb_projector(b[1]).P, (np.kron(I2, I2) + np.kron(X, X)) / 2, atol=1e-12)
    np.testing.assert_allclose(cb_projector(b[2]).P, (np.kron(I2, I2) - np.kron(Y, Y)) / 2, atol=1e-12)


def test_cb_projector_rank_and_fixes_phi():
    rng = np.random.default_rng(3)
    for d in (2, 3, 4, 5):
        t = cb_projector(random_basis(d, rng))
        assert t.rank == d
        phi = maximally_entangled(d)
        np.testing.assert_allclose(t.P @ phi, phi, atol=1e-12)


def test_from_matrix_errors():
    with pytest.raises(NotAProjector):
        TestProjector.from_matrix(0.5 * np.eye(4), 2)
    with pytest.raises(PreconditionError):
        TestProjector.from_matrix(np.diag([1.0, 0, 0, 0]), 2)


def test_weights_validated():
    b = mub_set(2, 2)
    with pytest.raises(WeightError):
        WeightedBasisSet([(b[0], 0.6), (b[1], 0.6)])
    with pytest.raises(WeightError):
        WeightedBasisSet([(b[0], 1.5), (b[1], -0.5)])


def test_d2_perfect():
    s = uniform(2, 3)
    assert s.beta == pytest.approx(1 / 3, abs=1e-9)
    f = s.flags
    assert f.perfect and f.parsimonious and f.optimal and f.homogeneous and not f.singular
    np.testing.assert_allclose(s.spectrum.eigenvalues, [1, 1 / 3, 1 / 3, 1 / 3], atol=1e-12)


def test_d5_complete():
    s = uniform(5, 6)
    assert s.beta == pytest.approx(1 / 6, abs=1e-9)
    assert s.nu == pytest.approx(5 / 6, abs=1e-9)
    assert s.flags.optimal


def test_d7_two_bases():
    s = uniform(7, 2)
    assert s.beta == pytest.approx(0.5, abs=1e-9)
    assert s.flags.parsimonious and not s.flags.optimal
    assert s.flags.singular


@pytest.mark.parametrize("d", range(2, 8))
@pytest.mark.parametrize("g", [2, 3])
def test_mub_uniform_beta_is_one_over_g(d, g):
    assert uniform(d, g).beta == pytest.approx(1 / g, abs=1e-9)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_complete_set_beta(d):
    assert uniform(d, d + 1).beta == pytest.approx(1 / (d + 1), abs=1e-9)


def test_parsimonious_needs_uniform_weights():
    b = mub_set(3, 3)
    s = build_strategy(WeightedBasisSet([(b[0], 0.4), (b[1], 0.3), (b[2], 0.3)]))
    assert not s.flags.parsimonious


def test_parsimonious_needs_unbiased_bases():
    rng = np.random.default_rng(11)
    bases = [computational_basis(3), random_basis(3, rng), random_basis(3, rng)]
    assert not build_strategy(WeightedBasisSet.uniform(bases)).flags.parsimonious


def test_trace_is_d():
    rng = np.random.default_rng(0)
    for d in (2, 3, 4):
        bases = [random_basis(d, rng) for _ in range(3)]
        w = rng.dirichlet(np.ones(3))
        omega = cb_operator(WeightedBasisSet(zip(bases, w / w.sum())))
        assert np.trace(omega).real == pytest.approx(d, abs=1e-9)


def test_two_design():
    assert is_2design(WeightedBasisSet.uniform(mub_set(2, 3)))
    assert is_2design(WeightedBasisSet.uniform(mub_set(3, 4)))
    assert not is_2design(WeightedBasisSet.uniform(mub_set(3, 1)))
    assert not is_2design(WeightedBasisSet.uniform(mub_set(5, 5)))


def test_optimal_iff_2design_under_perturbation():
    bases = mub_set(3, 4)
    w = np.array([0.26, 0.24, 0.25, 0.25])
    wbs = WeightedBasisSet(zip(bases, w))
    assert not build_strategy(wbs).flags.optimal
    assert not is_2design(wbs)
    wbs = WeightedBasisSet.uniform(bases)
    assert build_strategy(wbs).flags.optimal
    assert is_2design(wbs)


def test_overlap_trace_inequality():
    rng = np.random.default_rng(4)
    b1, b2 = random_basis(3, rng), random_basis(3, rng)
    assert np.trace(cb_projector(b1).P @ cb_projector(b2).P).real >= 1 - 1e-12
    m = mub_set(3, 2)
    assert np.trace(cb_projector(m[0]).P @ cb_projector(m[1]).P).real == pytest.approx(1, abs=1e-12)


def test_homogenize_boundary_is_identity():
    s = uniform(3, 4)
    assert homogenize(s, 1 / 4) is s


def test_homogenize_one_over_e():
    s = homogenize(uniform(5, 6), 1 / math.e)
    p = s.tests[-1][1]
    assert p == pytest.approx((6 / math.e - 1) / 5, abs=1e-12)
    assert p == pytest.approx(0.241455, abs=1e-6)
    assert s.beta == pytest.approx(1 / math.e, abs=1e-9)
    assert s.flags.homogeneous and not s.flags.optimal


def test_homogenize_qubit_half():
    assert trivial_probability(2, 0.5) == pytest.approx(0.25)
    s = homogenize(uniform(2, 3), 0.5)
    np.testing.assert_allclose(s.spectrum.eigenvalues, [1, 0.5, 0.5, 0.5], atol=1e-12)


def test_homogenize_errors():
    with pytest.raises(NotOptimalStrategy):
        homogenize(uniform(3, 2), 0.5)
    with pytest.raises(LambdaOutOfRange):
        homogenize(uniform(2, 3), 0.2)
    with pytest.raises(LambdaOutOfRange):
        homogenize(uniform(2, 3), 1.0)


def test_max_pass_probability():
    s = uniform(2, 3)
    val, sigma = max_pass_probability(s, 0.3)
    assert val == pytest.approx(0.8)
    assert s.pass_probability(sigma) == pytest.approx(0.8, abs=1e-9)
    assert max_pass_probability(s, 0.0)[0] == 1
    d = 5
    assert max_pass_probability(uniform(d, d + 1), 0.2)[0] == pytest.approx(1 - d * 0.2 / (d + 1))


def test_worst_case_beats_random_states():
    # the worst-case state maximizes tr(Omega sigma) at fixed infidelity
    rng = np.random.default_rng(8)
    s = uniform(3, 2)
    eps = 0.2
    best, _ = max_pass_probability(s, eps)
    phi = maximally_entangled(3)
    for _ in range(50):
        v = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        v -= phi * np.vdot(phi, v)
        v /= np.linalg.norm(v)
        sigma = (1 - eps) * np.outer(phi, phi.conj()) + eps * np.outer(v, v.conj())
        assert s.pass_probability(sigma) <= best + 1e-12


def test_fidelity_from_pass_rate():
    s = uniform(2, 3)
    assert fidelity_from_pass_rate(s, 1.0) == 1.0
    assert fidelity_from_pass_rate(s, 0.9) == pytest.approx(0.85)
    d = 3
    s3 = uniform(d, d + 1)
    mixed = np.eye(d * d) / d**2
    rate = s3.pass_probability(mixed)
    assert rate == pytest.approx(1 / d)
    assert fidelity_from_pass_rate(s3, rate) == pytest.approx(1 / d**2)
    with pytest.raises(RateOutOfRange):
        fidelity_from_pass_rate(s, 0.1)
    with pytest.raises(NotOptimalStrategy):
        fidelity_from_pass_rate(uniform(3, 2), 0.9)


def test_fidelity_from_pass_rate_cross_check():
    s = uniform(2, 3)
    phi = maximally_entangled(2)
    v = np.array([1, 0, 0, -1]) / np.sqrt(2)
    rho = 0.85 * np.outer(phi, phi) + 0.15 * np.outer(v, v)
    assert fidelity_from_pass_rate(s, s.pass_probability(rho)) == pytest.approx(0.85)


@pytest.mark.parametrize("make", [computational_basis, fourier_basis])
@pytest.mark.parametrize("d", [2, 3, 4])
def test_recover_named_bases(make, d):
    b = make(d)
    rec = recover_basis(cb_projector(b))
    assert basis_distance(rec, canonical_form(b)) < 1e-9


def test_recover_errors():
    # fixes |00> and |11> but not |Phi>
    v = np.zeros((4, 2))
    v[0, 0] = 1
    v[1, 1] = v[2, 1] = 1 / np.sqrt(2)
    with pytest.raises(PreconditionError):
        recover_basis(v @ v.T)
    with pytest.raises(PreconditionError):
        recover_basis(trivial_test(2))
    # rank-d projector fixing Phi but not of CB form
    phi = maximally_entangled(2)
    w = np.array([0, 1, 0, 0.0])
    p = np.outer(phi, phi) + np.outer(w, w)
    with pytest.raises(NotConjugateBasisForm):
        recover_basis(p)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_recover_round_trip_property(d, seed):
    b = random_basis(d, np.random.default_rng(seed))
    rec = recover_basis(cb_projector(b))
    np.testing.assert_allclose(cb_projector(rec).P, cb_projector(b).P, atol=1e-9)


def test_orthogonality_check():
    m = mub_set(3, 2)
    assert orthogonality_check(cb_projector(m[0]), cb_projector(m[1]))
    t = cb_projector(m[0])
    assert not orthogonality_check(t, t)
    theta = 0.05
    r = np.array([[np.cos(theta), -np.sin(theta), 0], [np.sin(theta), np.cos(theta), 0], [0, 0, 1]])
    assert not orthogonality_check(t, cb_projector(Basis(r)))


def test_strategy_json_round_trip():
    s = homogenize(uniform(3, 4), 0.4)
    t = Strategy.loads(s.dumps())
    np.testing.assert_allclose(t.omega, s.omega, atol=1e-12)
    assert t.flags == s.flags
    data = s.to_json()
    assert set(data) == {"d", "tests", "beta", "nu", "flags"}
    assert data["tests"][-1]["basis"] == "trivial"


def test_optimal_operator_spectrum():
    d = 3
    np.testing.assert_allclose(
        optimal_operator(d), (np.eye(9) + d * target_projector(d)) / (d + 1), atol=0
    )

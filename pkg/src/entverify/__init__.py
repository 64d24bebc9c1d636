"""Verification of the maximally entangled state with conjugate-basis tests."""

from .bases import Basis, computational_basis, fourier_basis, mub_set, random_basis
from .counting import (
    count_plan,
    one_test_threshold,
    tests_adversarial_homogeneous,
    tests_adversarial_singular,
    tests_nonadversarial,
)
from .errors import EntVerifyError
from .linalg import hermitian_eig, maximally_entangled
from .robustness import SchmidtVector, robustness_quantities
from .sim import depolarized_state, estimate_fidelity, run_protocol, worst_case_state
from .strategy import (
    Strategy,
    WeightedBasisSet,
    build_strategy,
    cb_projector,
    homogenize,
    is_2design,
    recover_basis,
)

__version__ = "0.1.0"

"""Ruelle transfer operators on one-sided subshifts of finite type.

Exact eigendata and Gibbs measures for locally constant potentials, together
with the explicit spectral constants of the Ruelle-Perron-Frobenius theorem
and checks of every inequality they enter.
"""

from .certificate import (
    BoundConstants,
    ConeSpec,
    Report,
    bound_constants,
    check_lambda_membership,
    compute_constants,
    verify_all,
    verify_basic_inequalities,
    verify_convergence,
    verify_decomposition,
    verify_perron_bounds,
)
from .exceptions import *  # noqa: F401,F403
from .functions import LocallyConstantFn, NormReport, birkhoff_sum, combine, evaluate, holder_norms, var_k
from .gibbs import (
    GibbsMeasure,
    check_shift_invariance,
    correlation,
    cylinder_mass,
    empirical_average,
    gibbs_measure,
    integrate,
    sample_orbit,
)
from .symbolic import TransitionMatrix, admissible_words, check_aperiodic, extend_word, full_shift, golden_mean_shift
from .transfer import (
    PerronData,
    TransferLift,
    apply_transfer,
    iterate_normalized,
    lambda_bounds,
    lift_matrix,
    perron_data,
    pressure,
    spectrum_of_lift,
)

__version__ = "0.1.0"

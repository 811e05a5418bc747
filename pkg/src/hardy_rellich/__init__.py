"""Numerical toolkit for optimal weighted Hardy and Hardy-Rellich inequalities.

The package reduces each weighted inequality on a ball to the positivity of
a singular radial ODE (the Bessel-pair criterion), computes the optimal
improvement weight beta(V, W; R) and boundary ratio theta by shooting and
bisection, cross-checks best constants through spherical-harmonics
Rayleigh-quotient minimization, and evaluates inequality deficits on
explicit test functions by panel quadrature.
"""

__version__ = "0.1.0"

from .bessel_weight import (  # noqa: F401
    PairCheck,
    WeightResult,
    is_bessel_pair,
    verify_pair_equivalence,
    weight,
)
from .inequality import (  # noqa: F401
    DeficitReport,
    check_decay_conditions,
    ckn_pair,
    hardy_deficit,
    hardy_rellich_deficit,
    improved_rellich_deficit,
    one_dim_deficit,
)
from .potentials import (  # noqa: F401
    LambdaData,
    RadialPotential,
    candidate_solution,
    lambda_limit,
    make_potential,
)
from .profiles import RadialProfile, TestFunction, builtin_suite  # noqa: F401
from .radial_ode import (  # noqa: F401
    OdeProblem,
    Trajectory,
    indicial_exponents,
    shoot_from_origin,
    theta,
)
from .special_functions import (  # noqa: F401
    bessel_j,
    first_zero_j0,
    mu_for_dimension,
)
from .spectral import (  # noqa: F401
    Discretization,
    GridParams,
    ModeForm,
    check_equal_infima,
    check_hr_conditions,
    min_rayleigh,
)

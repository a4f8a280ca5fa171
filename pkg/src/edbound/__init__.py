"""Energy bounds for robust transmission under staircase fidelity profiles.

Library layout:

- profile: staircase and geometric profile types, duality conversions.
- lower_bounds: the family lower bound and its closed forms.
- upper_bounds: the layered achievable scheme and its closed forms.
- oracle: brute-force verifiers for every closed form.
- verify: the seeded verification suite behind `edbound verify`.
- cli: the `edbound` command-line front end.
"""

from .lower_bounds import (
    BoundResult,
    Direction,
    LowerBoundSchedule,
    lemma1_bound,
    square_law_constant_c,
    thm3_geometric_lower,
    thm3_partial_sum,
    thm5_tau_star,
    thm5_two_level_lower,
    two_level_objective,
)
from .oracle import (
    OracleConfig,
    Verdict,
    finite_diff_check,
    golden_min_e0,
    grid_max_tau1,
    lemma1_search,
    sample_beta_feasible,
)
from .profile import (
    GeometricSpec,
    StaircaseProfile,
    UNBOUNDED,
    distortion_at,
    expand_geometric,
    fidelity_at,
    make_staircase,
    truncation_level,
)
from .upper_bounds import (
    InfeasibleError,
    OptimizeReport,
    SchemeConfig,
    achieved_fidelity,
    beta_star,
    digital_energy,
    digital_energy_gradient,
    digital_energy_hessian_diag,
    digital_only_energy,
    dilog_at_minus2,
    e0_feasible_max,
    layer_energy,
    optimize_e0,
    point_to_point_distortion,
    square_law_constant_d,
    thm4_geometric_upper,
    thm6_two_level,
    total_energy,
    total_energy_derivative,
)

__version__ = "0.1.0"

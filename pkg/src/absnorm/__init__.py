"""Construction of absolutely normal numbers, digit by digit, with exact
discrepancy and exponential-sum diagnostics."""

__version__ = "0.1.0"

from .constants import (
    BasePairAnalysis,
    ConstantSet,
    MultiplicativelyDependent,
    analyze_pair,
    compute_constants,
    constants_for_pair,
    factorize,
    mult_dependent,
    solve_exact_a4,
)
from .equidist import (
    HS5Result,
    OrbitSpec,
    PointSet,
    cell_deviation_discrepancy_bound,
    discrepancy_extreme,
    discrepancy_star,
    erdos_turan_bound,
    hs5_sum,
    nice_digit_pairs,
    orbit_points,
    weyl_sum,
)
from .exact import (
    CertifiedReal,
    DigitString,
    PrecisionExhausted,
    Rational,
    certain_digits,
    certified_floor,
    digits_of_rational,
    frac_mod1,
)
from .plan import (
    HorizonTooShort,
    PlanInfeasible,
    SequencePlan,
    apply_phi,
    build_default_plan,
    compute_m0,
    default_s_sequence,
)
from .schmidt import (
    ConstructionState,
    Schedule,
    WidthExceedsCap,
    emit_digits,
    step,
    step_objective,
    verify_state,
)
from .sierpinski import (
    IntervalSet,
    ScaleExceedsCap,
    SierpinskiParams,
    ToyCaps,
    delta_family,
    delta_measure_bound,
    n_lower,
    select_digit,
)

__all__ = [
    "__version__",
    "BasePairAnalysis",
    "CertifiedReal",
    "ConstantSet",
    "ConstructionState",
    "DigitString",
    "HS5Result",
    "HorizonTooShort",
    "IntervalSet",
    "MultiplicativelyDependent",
    "OrbitSpec",
    "PlanInfeasible",
    "PointSet",
    "PrecisionExhausted",
    "Rational",
    "ScaleExceedsCap",
    "Schedule",
    "SequencePlan",
    "SierpinskiParams",
    "ToyCaps",
    "WidthExceedsCap",
    "analyze_pair",
    "apply_phi",
    "build_default_plan",
    "cell_deviation_discrepancy_bound",
    "certain_digits",
    "certified_floor",
    "compute_constants",
    "compute_m0",
    "constants_for_pair",
    "default_s_sequence",
    "delta_family",
    "delta_measure_bound",
    "digits_of_rational",
    "discrepancy_extreme",
    "discrepancy_star",
    "emit_digits",
    "erdos_turan_bound",
    "factorize",
    "frac_mod1",
    "hs5_sum",
    "mult_dependent",
    "n_lower",
    "nice_digit_pairs",
    "orbit_points",
    "select_digit",
    "solve_exact_a4",
    "step",
    "step_objective",
    "verify_state",
    "weyl_sum",
]

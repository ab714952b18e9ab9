"""Separation analysis of power sequences, shift-perturbed diagonal operator
constructions, their matrix semigroup lifts, and the weighted half-line star
norm used to bound the translation action along a sequence."""

from .construction import (
    EigenvectorChain,
    LevelBudget,
    PowerBoundReport,
    PowerBoundRow,
    ShiftConstruction,
    TruncatedOperator,
    WeightSchedule,
    analytic_power_bound,
    assemble_operator,
    build_construction,
    chain_difference_norms,
    eigenvector_chain,
    fiber_map,
    matrix_power,
    operator_norm,
    power_coefficient,
    product_difference,
    symmetric_sum,
    verify_partial_power_bound,
)
from .semigroup import (
    BoundedReport,
    LatticeReport,
    MatrixSemigroup,
    SpectrumReport,
    bounded_along,
    check_lattice,
    evolve,
    generator_spectrum_check,
    lift_report,
    principal_log,
    unit_interval_sup,
)
from .starnorm import (
    DjBoundReport,
    EigenfieldTable,
    ExponentialVector,
    ExpSpan,
    StarNormValue,
    TranslationBoundReport,
    base_norm,
    dj_bound_check,
    eigenfield_modulus,
    radians_to_turns,
    star_norm,
    translate,
    turns_to_radians,
    verify_translation_bound,
)
from .serialize import (
    load_construction,
    load_sequence,
    save_construction,
    save_sequence,
)
from .sequences import (
    INCONCLUSIVE,
    SEPARATED,
    VANISHING,
    ClassificationResult,
    IndexSequence,
    SeparationReport,
    TorusPoint,
    box_dimension_estimate,
    chord_distance,
    chord_torus_bounds_check,
    classify_jamison,
    d_metric,
    integer_part_reduce,
    lacunary_digit_points,
    near_return_search,
    separated_family,
    separation_constant,
    shifted_separation_check,
    torus_norm,
    two_point_separation_scan,
    unit_diff,
)

__all__ = [
    "INCONCLUSIVE",
    "SEPARATED",
    "VANISHING",
    "BoundedReport",
    "ClassificationResult",
    "DjBoundReport",
    "EigenfieldTable",
    "EigenvectorChain",
    "ExpSpan",
    "ExponentialVector",
    "IndexSequence",
    "LatticeReport",
    "LevelBudget",
    "MatrixSemigroup",
    "SpectrumReport",
    "StarNormValue",
    "TranslationBoundReport",
    "PowerBoundReport",
    "PowerBoundRow",
    "SeparationReport",
    "ShiftConstruction",
    "TorusPoint",
    "TruncatedOperator",
    "WeightSchedule",
    "analytic_power_bound",
    "assemble_operator",
    "base_norm",
    "bounded_along",
    "build_construction",
    "chain_difference_norms",
    "check_lattice",
    "dj_bound_check",
    "eigenfield_modulus",
    "eigenvector_chain",
    "evolve",
    "fiber_map",
    "generator_spectrum_check",
    "lift_report",
    "matrix_power",
    "operator_norm",
    "power_coefficient",
    "principal_log",
    "product_difference",
    "radians_to_turns",
    "star_norm",
    "symmetric_sum",
    "translate",
    "turns_to_radians",
    "unit_interval_sup",
    "verify_partial_power_bound",
    "verify_translation_bound",
    "box_dimension_estimate",
    "chord_distance",
    "chord_torus_bounds_check",
    "classify_jamison",
    "d_metric",
    "integer_part_reduce",
    "lacunary_digit_points",
    "load_construction",
    "load_sequence",
    "near_return_search",
    "save_construction",
    "save_sequence",
    "separated_family",
    "separation_constant",
    "shifted_separation_check",
    "torus_norm",
    "two_point_separation_scan",
    "unit_diff",
]

__version__ = "0.1.0"

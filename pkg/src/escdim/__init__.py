"""Numerical toolkit for meromorphic functions with polynomial Schwarzian
derivative: evaluation through the underlying linear ODE, pole censuses,
Koebe inverse-branch covers, and escaping-set dimension estimates."""

__version__ = "0.1.0"

from .census import (
    Census,
    FitReport,
    PoleRecord,
    counting_function_order,
    find_poles,
    fit_modulus_exponent,
    fit_residue_exponent,
    read_census_csv,
    residue_at,
    synthetic_census,
    write_census_csv,
)
from .config import ConfigError, RunConfig, emit_config, load_config, parse_config
from .covers import (
    BranchInfo,
    admissibility_threshold,
    branch_info,
    cylinder_diameter,
    empirical_cylinder_diameter,
    koebe_sandwich_check,
    newton_inverse,
    verify_nesting,
)
from .dimension import (
    DimensionReport,
    EmptyAnnulus,
    EscapeRaster,
    FitUnstable,
    McMullenInput,
    NoRoot,
    PressureCurve,
    balanced_escape_radius,
    bk_upper_bound,
    bowen_root,
    box_count,
    cylinder_cover,
    escape_grid,
    mcmullen_bound,
    mcmullen_closed_form,
    mcmullen_input,
    mcmullen_lower,
    moran_root,
    pressure_curve,
    report,
    tail_critical_exponent,
    theoretical_dimension,
)
from .geometry import (
    Annulus,
    Disk,
    MoebiusMap,
    Polynomial,
    SpherePoint,
    chordal_distance,
    spherical_area,
)
from .nevanlinna import (
    AccuracyBudgetExceeded,
    NevanlinnaSpec,
    StencilNearPole,
    infinity_asymptotic_screen,
    spec_airy,
    spec_exp_like,
    spec_lambda_tan,
    spec_tan,
    spec_weber,
)

__all__ = [
    "Annulus",
    "Disk",
    "MoebiusMap",
    "Polynomial",
    "SpherePoint",
    "chordal_distance",
    "spherical_area",
    "AccuracyBudgetExceeded",
    "NevanlinnaSpec",
    "StencilNearPole",
    "infinity_asymptotic_screen",
    "spec_airy",
    "spec_exp_like",
    "spec_lambda_tan",
    "spec_tan",
    "spec_weber",
    "Census",
    "FitReport",
    "PoleRecord",
    "counting_function_order",
    "find_poles",
    "fit_modulus_exponent",
    "fit_residue_exponent",
    "read_census_csv",
    "residue_at",
    "synthetic_census",
    "write_census_csv",
    "BranchInfo",
    "admissibility_threshold",
    "branch_info",
    "cylinder_diameter",
    "empirical_cylinder_diameter",
    "koebe_sandwich_check",
    "newton_inverse",
    "verify_nesting",
    "DimensionReport",
    "EmptyAnnulus",
    "EscapeRaster",
    "FitUnstable",
    "McMullenInput",
    "NoRoot",
    "PressureCurve",
    "balanced_escape_radius",
    "bk_upper_bound",
    "bowen_root",
    "box_count",
    "cylinder_cover",
    "escape_grid",
    "mcmullen_bound",
    "mcmullen_closed_form",
    "mcmullen_input",
    "mcmullen_lower",
    "moran_root",
    "pressure_curve",
    "report",
    "tail_critical_exponent",
    "theoretical_dimension",
    "ConfigError",
    "RunConfig",
    "emit_config",
    "load_config",
    "parse_config",
]

"""kondra-lab: elliptic boundary value problems on 2D singular domains.

Weighted Sobolev (Kondratiev) norms computed through two independent routes,
graded meshing toward corner / cusp / oscillating singular points, conforming
finite elements with deterministic assembly, discrete Hardy constants, and an
experiment layer (CLI `kondra-lab`) that turns configs into reports.
"""

from .domains import (
    Arc,
    BoundaryCurve,
    CuspWall,
    Domain2D,
    OscillatingWall,
    Segment,
    SingularPoint,
    TrigPoly,
    admissible_scale_weight,
    bounded_geometry_weight,
    distance_to_singular_set,
    make_domain,
)
from .errors import (
    ConfigError,
    GradingError,
    InvalidParameterError,
    KondraError,
    SolverError,
    WeightDomainError,
)
from .fem import (
    ConstrainedSystem,
    FEFunction,
    FESpace,
    ManufacturedProblem,
    SolveInfo,
    SparseSystem,
    apply_bc,
    assemble,
    assemble_blocks,
    interpolate,
    load_csr,
    manufactured_problem,
    save_csr,
    solve,
    triangle_rule,
    write_function_csv,
)
from .hardy import (
    HardyResult,
    TrichotomyReport,
    TrichotomyRow,
    classify_sequence,
    hardy_constant,
    hardy_trichotomy,
)
from .lab import (
    RateFit,
    convergence_study,
    fit_rate,
    geometry_check,
    parse_config,
    parse_config_text,
    profile_from_text,
    resolve_config,
    run_experiment,
    stability_sweep,
    svg_mesh,
    svg_plot,
    write_csv,
    write_json,
)
from .meshing import (
    Mesh,
    MeshQuality,
    grade_mesh,
    load_mesh,
    mesh_quality,
    rectangle_mesh,
    refine,
    save_mesh,
)
from .metric import (
    CoefficientField,
    ConformalMetric,
    CurvatureProfile,
    admissibility_probe,
    boundary_curvature_profile,
    coefficient_catalog,
    completeness_probe,
    conformal_symbol_check,
    gauss_curvature,
    legendre_bounds,
)
from .weights import (
    Constant,
    ExponentialCusp,
    MollifiedDistancePower,
    RadialPower,
    Weight,
    eval_log_gradient,
    eval_log_hessian,
    eval_weight,
)
from .wnorm import (
    AnalyticFunction,
    DifferenceFunction,
    RelationReport,
    WeightedNormSpec,
    kondratiev_norm,
    relation_check,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # domains
    "SingularPoint", "BoundaryCurve", "Segment", "Arc", "CuspWall",
    "OscillatingWall", "TrigPoly", "Domain2D", "make_domain",
    "distance_to_singular_set", "bounded_geometry_weight", "admissible_scale_weight",
    # weights
    "Constant", "RadialPower", "MollifiedDistancePower", "ExponentialCusp",
    "Weight", "eval_weight", "eval_log_gradient", "eval_log_hessian",
    # metric probes
    "ConformalMetric", "CoefficientField", "coefficient_catalog",
    "admissibility_probe", "legendre_bounds", "conformal_symbol_check",
    "boundary_curvature_profile", "CurvatureProfile", "completeness_probe",
    "gauss_curvature",
    # meshing
    "Mesh", "MeshQuality", "grade_mesh", "refine", "mesh_quality",
    "rectangle_mesh", "save_mesh", "load_mesh",
    # fem
    "triangle_rule", "FESpace", "FEFunction", "SparseSystem", "ConstrainedSystem",
    "assemble", "assemble_blocks", "apply_bc", "solve", "SolveInfo", "interpolate",
    "manufactured_problem", "ManufacturedProblem", "save_csr", "load_csr",
    "write_function_csv",
    # weighted norms
    "WeightedNormSpec", "AnalyticFunction", "DifferenceFunction", "RelationReport",
    "kondratiev_norm", "relation_check",
    # hardy
    "HardyResult", "hardy_constant", "classify_sequence", "hardy_trichotomy",
    "TrichotomyRow", "TrichotomyReport",
    # lab
    "parse_config", "parse_config_text", "profile_from_text", "resolve_config",
    "run_experiment", "convergence_study", "stability_sweep", "geometry_check",
    "RateFit", "fit_rate", "write_csv", "write_json", "svg_plot", "svg_mesh",
    # errors
    "KondraError", "InvalidParameterError", "WeightDomainError", "GradingError",
    "SolverError", "ConfigError",
]

"""Exact-arithmetic square-cut and straight-cut pizza sharing.

Mass distributions are weighted rational polygons in the unit square; the
library decomposes them into axis-aligned right triangles, evaluates
side-A/side-B masses of y-monotone square-cut paths exactly, searches for
balanced paths numerically with an exact polish, and encodes
consensus-halving instances as pizza instances (and maps solutions back).
"""

from .geometry import (
    InstanceError,
    MassDistribution,
    PizzaInstance,
    Point2,
    RightTriangleAtom,
    Transform,
    Triangle,
    WeightedPolygon,
    decompose_axis_aligned,
    format_scalar,
    normalize_instance,
    parse_instance,
    parse_scalar,
    serialize_instance,
    split_obtuse,
    transform_instance,
    triangulate,
    validate_instance,
)
from .measure import (
    CompiledInstance,
    EtrFormula,
    atom_strip_mass,
    balance_residual,
    balance_residual_float,
    bu_eval,
    bu_eval_float,
    build_single_gate_formula,
    compile_instance,
    decode_float,
    eval_solution,
    evaluate_etr,
    export_etr,
    parse_etr,
    per_color_gap,
    region_mass_oracle,
    residual,
    residual_float,
    serialize_eval_report,
    solution_gap,
    strip_table,
)
from .reductions import (
    CHInstance,
    CHSolution,
    CHValuation,
    ReductionMeta,
    StraightCutSet,
    lines_to_ch_cuts,
    parse_ch_instance,
    parse_ch_solution,
    parse_lines,
    parse_meta,
    path_to_ch_cuts,
    points_of_interest,
    reduce_checkerboard,
    reduce_exact,
    reduce_overlapping,
    reduce_straight,
    serialize_ch_instance,
    serialize_ch_solution,
    serialize_lines,
    serialize_meta,
    verify_ch,
    verify_scpath,
    verify_straight,
)
from .scpath import (
    FeasibleSolution,
    SCPath,
    SpherePoint,
    antipode,
    make_solution,
    make_sphere_point,
    parse_path,
    point_side,
    serialize_path,
    slice_count,
    solution_to_path,
    solution_to_sphere,
    sphere_to_solution,
    turn_count,
)
from .solver import (
    BudgetError,
    SolveReport,
    SolverConfig,
    float_to_sphere,
    polish,
    solve,
    solve_grid,
    worker_count,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

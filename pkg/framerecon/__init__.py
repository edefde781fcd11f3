"""
framerecon - function reconstruction from jittered Fourier frame coefficients

Usage:
    from framerecon import make_frame, reconstruct, test_function, JITTERED

    frame = make_frame(JITTERED, 22, delta=0.25, seed=7)
    result = reconstruct("new", test_function("gaussian"), frame, n=16, m=22)
    print(result.l2_error, result.iterations, result.condition_number)

Command line:
    framerecon bench --example 1
"""

__version__ = "0.2.1"

from .frames import (
    FRAME_KINDS,
    INTEGER,
    JITTERED,
    CrossGram,
    FrameFamily,
    IndexSet,
    SingularSystemError,
    exp_inner_product,
    gram,
    make_frame,
    synthesize,
)
from .sampling import (
    CoefVector,
    QuadratureError,
    QuadratureRule,
    TargetFunction,
    build_quadrature,
    coef_vector,
    expansion_target,
    frame_coefficients,
    test_function,
)
from .theory import (
    LocalizationFit,
    TheoryConstants,
    bound_certificate,
    choose_m,
    coefficient_decay,
    estimate_localization,
    theory_constants,
)
from .operators import LinearMap, assemble_V, assemble_W, finite_section, moment_rhs, project
from .solvers import (
    FrameBounds,
    SolveReport,
    cg_solve,
    condition_number,
    direct_ls,
    estimate_frame_bounds,
    richardson_solve,
)
from .reconstruct import (
    ReconstructionResult,
    SolverOptions,
    error_metrics,
    evaluate_expansion,
    reconstruct,
)
from .bench import BenchConfig, BenchTable, ConfigError, example_config, run_benchmark
from .exporters import emit

__all__ = [
    "FRAME_KINDS",
    "INTEGER",
    "JITTERED",
    "BenchConfig",
    "BenchTable",
    "CoefVector",
    "ConfigError",
    "CrossGram",
    "FrameBounds",
    "FrameFamily",
    "IndexSet",
    "LinearMap",
    "LocalizationFit",
    "QuadratureError",
    "QuadratureRule",
    "ReconstructionResult",
    "SingularSystemError",
    "SolveReport",
    "SolverOptions",
    "TargetFunction",
    "TheoryConstants",
    "assemble_V",
    "assemble_W",
    "bound_certificate",
    "build_quadrature",
    "cg_solve",
    "choose_m",
    "coef_vector",
    "coefficient_decay",
    "condition_number",
    "direct_ls",
    "emit",
    "error_metrics",
    "estimate_frame_bounds",
    "estimate_localization",
    "evaluate_expansion",
    "example_config",
    "exp_inner_product",
    "expansion_target",
    "finite_section",
    "frame_coefficients",
    "gram",
    "make_frame",
    "moment_rhs",
    "project",
    "reconstruct",
    "richardson_solve",
    "run_benchmark",
    "synthesize",
    "test_function",
    "theory_constants",
]

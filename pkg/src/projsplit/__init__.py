"""Projective splitting solvers for monotone inclusions.

Solves 0 in sum_i A_i(z) + B(z) where each A_i is accessed through its
resolvent and the Lipschitz field B through an exact or stochastic oracle.
Ships the stochastic splitting solver, deterministic baselines (projective
splitting, Tseng, FRB, DSEG), a proximal toolbox, the distributionally robust
sparse logistic regression benchmark, and a CSV/figure harness.
"""

from .baselines import (
    deterministic_ps_iterate,
    frb_iterate,
    gda_run,
    product_field_B,
    product_resolvent_A,
    run_dseg,
    run_frb,
    run_ps,
    run_tseng,
    tseng_iterate,
    tseng_residual,
)
from .data_io import (
    SparseDataset,
    parse_libsvm,
    read_manifest,
    read_trace_csv,
    serialize_libsvm,
    write_manifest,
    write_trace_csv,
)
from .errors import (
    DivergenceError,
    EstimationError,
    InvalidParameterError,
    ManifestError,
    ParseError,
    ShapeError,
    StalledLinesearchError,
)
from .operators import (
    LipschitzMap,
    SetValuedOperator,
    block_operator,
    exact_lipschitz_map,
    inverse_resolvent_via_moreau,
    l1_operator,
    normal_cone_operator,
    product_resolvent,
    project_linf_ball,
    project_scaled_soc,
    resolvent_of_normal_cone,
    soft_threshold,
    zero_operator,
)
from .plotting import PlotSpec, aggregate_traces, render_convergence_plot
from .problems import (
    DrslrProblem,
    ProblemInstance,
    drslr_batch_field,
    drslr_component,
    drslr_full_field,
    drslr_lipschitz_bound,
    drslr_loss,
    drslr_minibatch_oracle,
    estimate_lipschitz_bound,
    make_bilinear_game,
    make_box_constrained_bilinear,
    make_drslr_instance,
    synthetic_drslr_dataset,
)
from .sps import (
    ExtendedPoint,
    OperatorPairSet,
    RunResult,
    StepSchedule,
    TraceRecord,
    hyperplane_eval,
    hyperplane_gradient,
    initial_point,
    residual_O,
    residual_R,
    residuals_from_state,
    run_sps,
    run_sps_compact,
    schedule_decay,
    schedule_fixed,
    sps_iterate,
    validate_decay_exponents,
)

__version__ = "0.1.0"

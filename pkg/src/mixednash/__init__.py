"""Mixed-strategy Nash equilibrium approximation for continuous games.

Players' mixed strategies are pushforwards of uniform latent noise through
generator networks; training descends a Monte-Carlo estimate of the local
regret (the gap each player could close with one steepest-descent step).
Pure-strategy baselines and a seeded benchmark harness are included.
"""

from .baselines import (
    PureProfile,
    baseline_step,
    gni_grad,
    gni_value,
    sga_direction,
    simultaneous_gradient,
)
from .checks import selfcheck
from .games import (
    BLOTTO,
    MULTIQUADRATIC,
    QUADRATIC,
    GameInstance,
    cost,
    cost_grad,
    cost_hvp,
    feasible_map,
    game_from_json,
    game_to_json,
    gen_blotto,
    gen_convex_quadratic,
    gen_gamut,
    gen_quadratic,
    gradient_lipschitz_bound,
    make_blotto,
    make_quadratic,
    stationary_point,
)
from .harness import (
    ConfigError,
    RunSpec,
    SuiteConfig,
    SummaryTable,
    parse_config,
    run_suite,
    write_metrics_csv,
    write_summary_json,
)
from .mcgni import (
    GradEstimate,
    MCGNIConfig,
    Profile,
    draw_batches,
    estimate_F,
    estimate_grad_F,
    fd_hvp,
    mcgni_grad,
    mcgni_value,
    snp_residual,
)
from .optim import (
    MetricsRow,
    SolverConfig,
    TrainState,
    min_grad_decay,
    momentum_step,
    run,
)
from .pushforward import (
    Generator,
    OmegaBatch,
    axpy_params,
    forward,
    forward_batch,
    generator_from_json,
    generator_to_json,
    init_generator,
    make_constant,
    make_net,
    sample_omega,
    vjp_params,
    vjp_params_batch,
)

__version__ = "0.1.0"

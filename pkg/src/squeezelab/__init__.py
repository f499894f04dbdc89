"""squeezelab: projection-noise simulator for synchronous differential
Ramsey comparison of two atomic pixels, with coherent and one-axis-twisting
squeezed preparations, Monte Carlo sampling and Allan-deviation analysis."""

from .dicke import (
    AngularMomentumOperator,
    DickeSpace,
    PixelState,
    angular_momentum_matrix,
    build_space,
    css,
    ground_state,
    oat_evolve,
    observable_stats,
    population_distribution,
    rotate,
)
from .errors import (
    EllipseFitError,
    ResourceLimitError,
    SingularConfigurationError,
    SqueezeLabError,
)
from .twopixel import (
    PreparationSpec,
    ProjectionStats,
    TwoPixelState,
    brute_force_oracle,
    collective_rotate,
    global_oat,
    joint_distribution,
    local_oat,
    prepare,
    projection_stats,
    tensor,
)
from .ramsey import (
    EllipseGeometry,
    OMEGA0_DEFAULT,
    RamseyConfig,
    ellipse_geometry,
    estimate_delta_eff,
    excitation_curve,
    fit_ellipse,
    free_evolution,
    run_ramsey,
    sensitivity,
    single_ensemble_curve,
)
from .sampler import (
    SeededRng,
    ShotSample,
    histogram,
    monte_carlo_ramsey,
    sample_inverse_cdf,
    sample_rejection,
)
from .allan import (
    AllanCurve,
    FrequencySeries,
    allan_deviation,
    analytic_allan,
    fit_white_noise,
    redshift_fraction,
    resolution_time,
    simulate_series,
)
from .optimizer import (
    AngleGrid,
    MinResult,
    NoiseMap,
    PhaseMinResult,
    minimize_dpd,
    minimize_phase_sensitivity,
    phase_sensitivity,
    scan_noise_map,
    sweep_n,
)

__version__ = "0.1.0"

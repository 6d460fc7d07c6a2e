"""Pseudo-spectral incompressible Hall-MHD on a periodic box, with a
verification harness that audits energy identities, Fourier amplitude
bounds, splitting-ball arithmetic and temporal decay rates at desk scale.
"""

from .grid import (
    Grid,
    NormBundle,
    make_grid,
    forward_transform,
    inverse_transform,
    leray_project,
    dealias,
    norms,
    fourier_amplitude,
)
from .dynamics import (
    RhsPair,
    momentum_nonlinear,
    induction_nonlinear,
    hall_term,
    primitive_form_rhs,
    divergence_form_rhs,
    cross_validate_forms,
)
from .integrator import (
    PhysicsParams,
    SolverState,
    StepControl,
    Schedule,
    BlowupError,
    compute_dt,
    step,
    run,
    linear_evolve,
    health_check,
)
from .initial import (
    InitSpec,
    gaussian_blob,
    random_band,
    gaussian_spectrum,
    make_initial_fields,
    rescale_small,
    admissibility_report,
)
from .audits import (
    AuditReport,
    SplittingSpec,
    energy_identity_residual,
    hm_monotonicity_audit,
    fourier_bound_audit,
    low_frequency_derivative_audit,
    splitting_ball_energies,
    duhamel_residual,
    dissipation_inequality_audit,
    TrackedModeSink,
)
from .decay import (
    DecaySeries,
    FitResult,
    BootstrapInput,
    BootstrapResult,
    fit_power_law,
    heat_oracle,
    heat_oracle_slope,
    gaussian_profile,
    gagliardo_nirenberg_exponent,
    remainder_forcing_rates,
    bootstrap_step,
    bootstrap_compose,
    decay_rate_check,
)
from .config import RunConfig, parse_config, render_config, ConfigError
from .seriesio import (
    emit_series,
    read_series,
    write_checkpoint,
    read_checkpoint,
    CheckpointError,
)
from .driver import run_simulation, resume_simulation, RunResult

__version__ = "0.1.0"

"""Time integration: exact integrating-factor diffusion + explicit SSP-RK3.

Diffusion is diagonal in spectral space, so each Runge-Kutta stage applies
the exact factor exp(-coef |k|^2 tau) and the explicit stages only see the
nonlinear tendency.  With the nonlinearity switched off a step is therefore
exact to roundoff for any dt.  The Hall term's whistler branch (omega ~
|k|^2 |B|) is stabilized by an explicit dt ~ dx^2 CFL constraint instead of
an implicit treatment.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .grid import (
    Grid,
    dealias,
    divergence_residual,
    inverse_transform,
    leray_project,
    pin_zero_mode,
)

RHS_FORMS = ("divergence", "primitive", "linear")


class BlowupError(RuntimeError):
    """Integration produced non-finite values or exceeded the Linf threshold."""

    def __init__(self, message: str, t: float, step_index: int, diagnostics: dict):
        self.t = t
        self.step_index = step_index
        self.diagnostics = diagnostics
        super().__init__(f"{message} (t={t:.6g}, step={step_index}): {diagnostics}")


@dataclass(frozen=True)
class PhysicsParams:
    nu: float = 1.0
    mu_resistivity: float = 1.0
    hall_coefficient: float = 1.0
    rhs_form: str = "divergence"

    def __post_init__(self):
        if self.nu <= 0 or self.mu_resistivity <= 0:
            raise ValueError("nu and mu_resistivity must be positive")
        if self.hall_coefficient < 0:
            raise ValueError("hall_coefficient must be >= 0")
        if self.rhs_form not in RHS_FORMS:
            raise ValueError(f"rhs_form must be one of {RHS_FORMS}")


@dataclass(frozen=True)
class StepControl:
    cfl_advective: float = 0.4
    cfl_whistler: float = 0.3
    dt_min: float = 1e-10
    dt_max: float = 0.1
    blowup_threshold: float = 1e6

    def __post_init__(self):
        if not (0 < self.cfl_advective <= 1 and 0 < self.cfl_whistler <= 1):
            raise ValueError("CFL factors must lie in (0, 1]")
        if self.dt_min > self.dt_max:
            raise ValueError("dt_min must not exceed dt_max")


@dataclass(frozen=True)
class Schedule:
    t_end: float
    sample_interval: float

    def __post_init__(self):
        if self.t_end < 0:
            raise ValueError("t_end must be >= 0")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")


@dataclass
class SolverState:
    """The single evolving object: spectral u, B plus clock and counter."""

    u_hat: np.ndarray
    B_hat: np.ndarray
    t: float = 0.0
    step_index: int = 0

    def copy(self) -> "SolverState":
        return SolverState(self.u_hat.copy(), self.B_hat.copy(), self.t, self.step_index)


def _max_pointwise(state: SolverState, g: Grid):
    with np.errstate(invalid="ignore", over="ignore"):
        u = inverse_transform(state.u_hat, g, check=False)
        B = inverse_transform(state.B_hat, g, check=False)
        umag = np.sqrt(np.sum(u * u, axis=0))
        bmag = np.sqrt(np.sum(B * B, axis=0))
        return float((umag + bmag).max()), float(bmag.max()), float(umag.max())


def compute_dt(state: SolverState, g: Grid, params: PhysicsParams, control: StepControl) -> float:
    """Stable step from advective and whistler CFL constraints.

    dt = min(cfl_adv * dx / max|u|+|B|,
             cfl_whistler * dx^2 / (pi^2 * hall * max|B|),
             dt_max),
    floored at dt_min with a warning.  Diffusion adds no constraint because
    the integrating factor treats it exactly.
    """
    speed, bmax, _ = _max_pointwise(state, g)
    dt = control.dt_max
    if speed > 0:
        dt = min(dt, control.cfl_advective * g.dx / speed)
    if params.hall_coefficient > 0 and bmax > 0:
        dt = min(
            dt,
            control.cfl_whistler * g.dx**2 / (np.pi**2 * params.hall_coefficient * bmax),
        )
    if dt < control.dt_min:
        warnings.warn(
            f"CFL step {dt:.3e} below dt_min={control.dt_min:.3e}; flooring",
            RuntimeWarning,
            stacklevel=2,
        )
        dt = control.dt_min
    return dt


def _nonlinear(state_u, state_B, params: PhysicsParams, g: Grid):
    if params.rhs_form == "linear":
        return None
    if params.rhs_form == "primitive":
        pair = dynamics.primitive_form_rhs(state_u, state_B, params.hall_coefficient, g)
    else:
        pair = dynamics.divergence_form_rhs(state_u, state_B, params.hall_coefficient, g)
    return pair


def step(
    state: SolverState,
    g: Grid,
    params: PhysicsParams,
    dt: float,
    control: StepControl | None = None,
) -> SolverState:
    """One integrating-factor SSP-RK3 step of size dt.

    Stage combinations follow the Shu-Osher form transported by the exact
    diffusion factors; the pure-diffusion limit reduces to a single exact
    multiplier application.  The result is re-projected, re-truncated and
    zero-mean.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    h = float(dt)
    Eu = lambda tau: g.decay_factor(params.nu, tau)  # noqa: E731
    Eb = lambda tau: g.decay_factor(params.mu_resistivity, tau)  # noqa: E731

    u0, B0 = state.u_hat, state.B_hat
    try:
        n0 = _nonlinear(u0, B0, params, g)
        if n0 is None:  # linear: exact one-shot
            u_new = Eu(h) * u0
            B_new = Eb(h) * B0
        else:
            u1 = Eu(h) * (u0 + h * n0.du)
            B1 = Eb(h) * (B0 + h * n0.dB)
            n1 = _nonlinear(u1, B1, params, g)
            u2 = Eu(0.5 * h) * (u0 + 0.25 * h * n0.du) + 0.25 * h * Eu(-0.5 * h) * n1.du
            B2 = Eb(0.5 * h) * (B0 + 0.25 * h * n0.dB) + 0.25 * h * Eb(-0.5 * h) * n1.dB
            n2 = _nonlinear(u2, B2, params, g)
            u_new = (1.0 / 3.0) * Eu(h) * u0 + (2.0 / 3.0) * Eu(0.5 * h) * (
                u2 + h * n2.du
            )
            B_new = (1.0 / 3.0) * Eb(h) * B0 + (2.0 / 3.0) * Eb(0.5 * h) * (
                B2 + h * n2.dB
            )
    except dynamics.FieldNaNError as exc:
        raise BlowupError(
            "non-finite value during RK stage",
            state.t,
            state.step_index,
            {"stage_error": str(exc)},
        ) from exc

    u_new = pin_zero_mode(leray_project(dealias(u_new, g), g))
    B_new = pin_zero_mode(leray_project(dealias(B_new, g), g))

    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(B_new))):
        raise BlowupError(
            "non-finite state after step",
            state.t,
            state.step_index,
            _blowup_diagnostics(state, g),
        )
    new = SolverState(u_new, B_new, state.t + h, state.step_index + 1)
    if control is not None:
        _, bmax, umax = _max_pointwise(new, g)
        if max(bmax, umax) > control.blowup_threshold:
            raise BlowupError(
                "Linf exceeded blowup threshold",
                new.t,
                new.step_index,
                {"max_u": umax, "max_B": bmax, "threshold": control.blowup_threshold},
            )
    return new


def _blowup_diagnostics(state: SolverState, g: Grid) -> dict:
    return {
        "t": state.t,
        "step_index": state.step_index,
        "max_abs_u_hat": float(np.nanmax(np.abs(state.u_hat))),
        "max_abs_B_hat": float(np.nanmax(np.abs(state.B_hat))),
    }


def linear_evolve(state: SolverState, g: Grid, params: PhysicsParams, t: float) -> SolverState:
    """Exact heat-semigroup evolution by time t (single multiplier, any t)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return SolverState(
        g.decay_factor(params.nu, t) * state.u_hat,
        g.decay_factor(params.mu_resistivity, t) * state.B_hat,
        state.t + t,
        state.step_index,
    )


def run(
    state: SolverState,
    g: Grid,
    params: PhysicsParams,
    control: StepControl,
    schedule: Schedule,
    sinks=(),
    step_sinks=(),
) -> SolverState:
    """Advance to t_end, invoking `sinks` at exact sample times.

    Sample times are integer multiples of the sample interval, hit exactly
    by clipping dt; `step_sinks` fire after every accepted step.  Sinks see
    the state object but must not mutate it.  On blowup, sinks with a
    ``flush`` method are flushed before the error propagates.
    """
    eps = 1e-12 * max(schedule.sample_interval, 1.0)
    for sink in sinks:
        sink(state)
    for sink in step_sinks:
        sink(state)
    if schedule.t_end <= state.t + eps:
        return state

    sample_idx = int(np.floor(state.t / schedule.sample_interval + 0.5)) + 1
    try:
        while state.t < schedule.t_end - eps:
            target = min(sample_idx * schedule.sample_interval, schedule.t_end)
            dt = compute_dt(state, g, params, control)
            clipped = False
            if state.t + dt >= target - eps:
                dt = target - state.t
                clipped = True
            state = step(state, g, params, dt, control)
            if clipped:
                state.t = target  # keep sample times exact
                for sink in sinks:
                    sink(state)
                sample_idx += 1
            for sink in step_sinks:
                sink(state)
    except BlowupError:
        for sink in sinks:
            flush = getattr(sink, "flush", None)
            if callable(flush):
                flush()
        raise
    return state


@dataclass
class HealthReport:
    passed: bool
    metrics: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)


def health_check(state: SolverState, g: Grid, control: StepControl) -> HealthReport:
    """Finiteness, solenoidality, Linf bound, dealias mask and zero mean."""
    metrics = {}
    failures = []

    finite = bool(np.all(np.isfinite(state.u_hat)) and np.all(np.isfinite(state.B_hat)))
    metrics["finite"] = finite
    if not finite:
        for name, arr in (("u_hat", state.u_hat), ("B_hat", state.B_hat)):
            bad = np.argwhere(~np.isfinite(arr))
            if len(bad):
                failures.append(f"non-finite {name} at {tuple(int(i) for i in bad[0])}")
        return HealthReport(False, metrics, failures)

    for name, arr in (("u", state.u_hat), ("B", state.B_hat)):
        resid = divergence_residual(arr, g)
        metrics[f"div_residual_{name}"] = resid
        if resid > 1e-11:
            failures.append(f"divergence residual of {name} = {resid:.3e} > 1e-11")
        outside = float(np.abs(arr * ~g.dealias_mask).max())
        metrics[f"outside_mask_{name}"] = outside
        if outside > 1e-13 * max(float(np.abs(arr).max()), 1e-300):
            failures.append(f"{name} has energy outside the dealias mask: {outside:.3e}")
        mean = float(np.abs(arr[:, 0, 0, 0]).max())
        metrics[f"mean_mode_{name}"] = mean
        if mean != 0.0:
            failures.append(f"{name} mean mode not pinned: {mean:.3e}")

    speed, bmax, umax = _max_pointwise(state, g)
    metrics["max_u"] = umax
    metrics["max_B"] = bmax
    if max(umax, bmax) > control.blowup_threshold:
        failures.append(f"Linf {max(umax, bmax):.3e} above blowup threshold")

    return HealthReport(not failures, metrics, failures)

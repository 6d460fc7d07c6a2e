"""Self-contained invariant and audit suites behind the `verify` subcommand.

Runs exact-identity checks (transform round trip, Parseval, projector
algebra, vector-calculus identities), the Hall energy-neutrality and
form-equivalence properties on seeded random fields, a linear-oracle
equivalence run, and the Fourier amplitude-bound audit on a short
simulation of the given config (or on a stored checkpoint state).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from . import audits, dynamics
from .config import RunConfig
from .driver import build_grid, build_initial_state, build_params
from .grid import (
    Grid,
    curl,
    dealias,
    divergence,
    divergence_residual,
    forward_transform,
    inverse_transform,
    leray_project,
    norms,
    pin_zero_mode,
    spectral_inner,
    spectral_l2_sq,
)
from .integrator import PhysicsParams, Schedule, SolverState, StepControl, linear_evolve, run
from .seriesio import read_checkpoint


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


def _random_solenoidal(g: Grid, seed: int, amplitude: float = 1.0):
    rng = np.random.default_rng(seed)
    f = rng.standard_normal((3, g.n, g.n, g.n))
    s = pin_zero_mode(leray_project(dealias(forward_transform(f, g), g), g))
    peak = np.abs(s).max()
    return s * (amplitude / peak) if peak > 0 else s


def operator_identity_checks(g: Grid, seed: int = 20) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    f = rng.standard_normal((3, g.n, g.n, g.n))
    s = forward_transform(f, g)

    out = []
    f2 = inverse_transform(s, g)
    v = float(np.abs(f - f2).max() / np.abs(f).max())
    out.append(CheckResult("transform_round_trip", v <= 1e-13, v, 1e-13))
    lhs = float(np.sum(f * f)) * g.dx**3
    rhs = spectral_l2_sq(s, g)
    v = abs(lhs - rhs) / lhs
    out.append(CheckResult("parseval", v <= 1e-12, v, 1e-12))

    w = _random_solenoidal(g, seed + 1)
    v = float(np.abs(divergence(curl(w, g), g)).max() / np.abs(w).max())
    out.append(CheckResult("div_curl_zero", v <= 1e-13, v, 1e-13))

    p = leray_project(w, g)
    v = float(np.abs(leray_project(p, g) - p).max() / max(np.abs(p).max(), 1e-300))
    out.append(CheckResult("leray_idempotent", v <= 1e-12, v, 1e-12))
    a = _random_solenoidal(g, seed + 2)
    b = forward_transform(rng.standard_normal((3, g.n, g.n, g.n)), g)
    lhs_ip = spectral_inner(leray_project(b, g), a, g)
    rhs_ip = spectral_inner(b, leray_project(a, g), g)
    scale = max(abs(lhs_ip), abs(rhs_ip), 1e-300)
    v = abs(lhs_ip - rhs_ip) / scale
    out.append(CheckResult("leray_self_adjoint", v <= 1e-12, v, 1e-12))
    v = divergence_residual(p, g)
    out.append(CheckResult("leray_divergence_free", v <= 1e-13, v, 1e-13))
    return out


def dynamics_checks(g: Grid, n_samples: int = 10, seed: int = 40) -> list[CheckResult]:
    out = []
    worst_neutral = 0.0
    worst_forms = 0.0
    worst_ideal = 0.0
    for i in range(n_samples):
        B = _random_solenoidal(g, seed + 2 * i)
        u = _random_solenoidal(g, seed + 2 * i + 1)
        h = dynamics.hall_term(B, g)
        ip = abs(spectral_inner(h, B, g))
        scale = (
            np.sqrt(spectral_l2_sq(curl(B, g), g))
            * np.sqrt(spectral_l2_sq(B, g))
            * norms(B, g, 0).linf
        )
        worst_neutral = max(worst_neutral, ip / max(scale, 1e-300))
        worst_forms = max(worst_forms, dynamics.cross_validate_forms(u, B, 1.0, g))
        du = dynamics.momentum_nonlinear(u, B, g)
        dB = dynamics.induction_nonlinear(u, B, 0.0, g)
        tot = abs(spectral_inner(du, u, g) + spectral_inner(dB, B, g))
        sc = np.sqrt(spectral_l2_sq(du, g)) * np.sqrt(spectral_l2_sq(u, g))
        worst_ideal = max(worst_ideal, tot / max(sc, 1e-300))
    out.append(CheckResult("hall_energy_neutrality", worst_neutral <= 1e-10, worst_neutral, 1e-10))
    out.append(CheckResult("cross_validate_forms", worst_forms <= 1e-10, worst_forms, 1e-10))
    out.append(CheckResult("ideal_transport_neutrality", worst_ideal <= 1e-9, worst_ideal, 1e-9))
    return out


def linear_oracle_check(g: Grid, state: SolverState, params: PhysicsParams) -> CheckResult:
    """Stepped linear run against the one-shot semigroup, per-mode 1e-12."""
    lin_params = dataclasses.replace(params, rhs_form="linear")
    horizon = 1.0
    stepped = run(
        state.copy(),
        g,
        lin_params,
        StepControl(dt_max=0.11),
        Schedule(t_end=state.t + horizon, sample_interval=horizon / 4),
    )
    exact = linear_evolve(state, g, lin_params, horizon)
    scale = max(np.abs(exact.u_hat).max(), np.abs(exact.B_hat).max(), 1e-300)
    v = float(
        max(
            np.abs(stepped.u_hat - exact.u_hat).max(),
            np.abs(stepped.B_hat - exact.B_hat).max(),
        )
        / scale
    )
    return CheckResult("linear_oracle_equivalence", v <= 1e-12, v, 1e-12)


def verify_config(cfg: RunConfig) -> list[CheckResult]:
    g = build_grid(cfg)
    params = build_params(cfg)
    state = build_initial_state(cfg, g)
    results = []
    results += operator_identity_checks(g)
    small = g if g.n <= 48 else build_grid(
        dataclasses.replace(cfg, grid=dataclasses.replace(cfg.grid, n=32))
    )
    results += dynamics_checks(small)
    results.append(linear_oracle_check(g, state, params))

    init_norms = (norms(state.u_hat, g, 1), norms(state.B_hat, g, 1))
    t_end = min(cfg.time.t_end, 10 * cfg.time.dt_max) or cfg.time.dt_max
    fb_samples = []
    sink_state = [state]

    def fb_sink(s):
        fb_samples.append(audits.fourier_bound_audit(s, g, init_norms))
        sink_state[0] = s

    run(
        state.copy(),
        g,
        params,
        StepControl(dt_max=cfg.time.dt_max),
        Schedule(t_end=t_end, sample_interval=t_end / 4),
        sinks=(fb_sink,),
    )
    report = audits.fourier_bound_report(fb_samples)
    results.append(
        CheckResult(
            "fourier_amplitude_bound",
            report.passed,
            float(-min(min(s.worst_margin_u, s.worst_margin_B) for s in fb_samples)),
            0.0,
            detail=f"C_emp={report.empirical_constant:.6g}",
        )
    )
    return results


def verify_checkpoint(path) -> list[CheckResult]:
    state, g, params = read_checkpoint(path)
    results = operator_identity_checks(g)
    small_g = g if g.n <= 48 else None
    if small_g is not None:
        results += dynamics_checks(small_g)
    results.append(linear_oracle_check(g, state, params))
    for name, arr in (("u", state.u_hat), ("B", state.B_hat)):
        v = divergence_residual(arr, g)
        results.append(CheckResult(f"state_divergence_{name}", v <= 1e-11, v, 1e-11))
    return results

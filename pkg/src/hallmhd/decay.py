"""Decay-rate analysis: power-law fits, a heat-semigroup oracle, and the
exponent arithmetic of the higher-order bootstrap.

The heat oracle evaluates weighted spectral integrals of radial profiles by
adaptive quadrature and provides the independent reference rates that box
runs are compared against.  The bootstrap utilities manipulate decay
exponents in exact rational arithmetic; the produced constants are
admissible rather than sharp.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import quad, solve_ivp

from .sampling import SampleRecord


@dataclass(frozen=True)
class DecaySeries:
    """Sampled squared-norm series with strictly increasing times."""

    times: np.ndarray
    values: np.ndarray
    label: str = ""
    m: int = 0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if len(t) >= 2 and not (np.diff(t) > 0).all():
            raise ValueError("times must be strictly increasing")
        if (v <= 0).any():
            raise ValueError("values must be positive for log-log fitting")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


def series_from_records(records: list[SampleRecord], m: int = 0, label: str | None = None) -> DecaySeries:
    """Squared-seminorm series ||D^m u||^2 + ||D^m B||^2 from run records."""
    t = np.array([r.t for r in records])
    v = np.array([r.dm_u[m] + r.dm_B[m] for r in records])
    return DecaySeries(times=t, values=v, label=label or f"d{m}_sq", m=m)


@dataclass(frozen=True)
class FitResult:
    exponent: float
    prefactor: float
    window: tuple[float, float]
    rms_residual: float
    n_samples: int = 0
    t_valid: float | None = None
    alpha: float | None = None


def validity_horizon(box_length: float, alpha: float = 0.1) -> float:
    """Largest time before box-size effects contaminate whole-space decay.

    The thermal peak wavenumber ~ t^(-1/2) must stay well above the smallest
    resolved wavenumber 2 pi / L, giving t_valid = alpha (L / 2 pi)^2.
    """
    return alpha * (box_length / (2.0 * math.pi)) ** 2


def fit_power_law(
    series: DecaySeries,
    window: tuple[float, float],
    min_samples: int = 10,
    min_span: float = 4.0,
) -> FitResult:
    """Least-squares line in (log(t+1), log value) over the window.

    Requires at least `min_samples` points spanning a factor `min_span` in
    (t + 1); the default span of 4 can be relaxed for reduced desk-scale
    windows.
    """
    a, b = float(window[0]), float(window[1])
    if not a < b:
        raise ValueError("window must satisfy a < b")
    sel = (series.times >= a - 1e-12) & (series.times <= b + 1e-12)
    t = series.times[sel]
    v = series.values[sel]
    if len(t) < min_samples:
        raise ValueError(f"window [{a}, {b}] holds {len(t)} samples, need >= {min_samples}")
    span = (t[-1] + 1.0) / (t[0] + 1.0)
    if span < min_span * (1 - 1e-12):
        raise ValueError(
            f"window spans factor {span:.3g} in (t+1), need >= {min_span}"
        )
    x = np.log(t + 1.0)
    y = np.log(v)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return FitResult(
        exponent=float(slope),
        prefactor=float(np.exp(intercept)),
        window=(a, b),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        n_samples=int(len(t)),
    )


def with_validity(fit: FitResult, box_length: float, alpha: float = 0.1) -> FitResult:
    """Attach the box-validity horizon metadata to a fit."""
    return FitResult(
        exponent=fit.exponent,
        prefactor=fit.prefactor,
        window=fit.window,
        rms_residual=fit.rms_residual,
        n_samples=fit.n_samples,
        t_valid=validity_horizon(box_length, alpha),
        alpha=alpha,
    )


# -- heat-semigroup oracle -----------------------------------------------------


def heat_oracle(spectrum_profile, m: int, t: float) -> float:
    """4 pi * integral of r^(2m+2) exp(-2 r^2 t) profile(r) dr over r >= 0.

    `spectrum_profile` is the radial squared-amplitude profile |u0_hat(r)|^2.
    The substitution y = r sqrt(1 + 2t) keeps the integrand well-scaled for
    any t >= 0; adaptive quadrature targets 1e-8 relative error and clearly
    divergent profiles are rejected.
    """
    if m < 0 or t < 0:
        raise ValueError("m and t must be nonnegative")
    s = math.sqrt(1.0 + 2.0 * t)
    c = 2.0 * t / (s * s)

    def integrand(y):
        r = y / s
        return y ** (2 * m + 2) * math.exp(-c * y * y) * spectrum_profile(r)

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        try:
            val, err = quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=1e-10, limit=400)
        except (Warning, OverflowError, ZeroDivisionError) as exc:
            raise ValueError(f"quadrature failed, profile may diverge: {exc}") from None
    if not np.isfinite(val) or (val != 0.0 and err > 1e-8 * abs(val)):
        raise ValueError(
            f"quadrature did not reach 1e-8 relative accuracy (value {val}, error {err})"
        )
    return 4.0 * math.pi * val / s ** (2 * m + 3)


def heat_oracle_slope(spectrum_profile, m: int, t: float, rel_step: float = 0.05) -> float:
    """d log(value) / d log(t+1) by central difference at time t."""
    lo = (t + 1.0) * (1.0 - rel_step) - 1.0
    hi = (t + 1.0) * (1.0 + rel_step) - 1.0
    v_lo = heat_oracle(spectrum_profile, m, lo)
    v_hi = heat_oracle(spectrum_profile, m, hi)
    return (math.log(v_hi) - math.log(v_lo)) / (math.log(hi + 1.0) - math.log(lo + 1.0))


def gaussian_profile(r):
    """The canonical radial profile exp(-r^2)."""
    return math.exp(-(r * r))


# -- exponent arithmetic ---------------------------------------------------------


def gagliardo_nirenberg_exponent(m: int, j: int) -> Fraction:
    """Interpolation exponent a_j = (j + 3/2) / (m + 1), exact and in (0, 1)."""
    if m < 2:
        raise ValueError("m must be >= 2")
    if not (1 <= j <= m / 2):
        raise ValueError(f"j must satisfy 1 <= j <= m/2, got j={j}, m={m}")
    a = Fraction(2 * j + 3, 2 * (m + 1))
    assert 0 < a < 1
    return a


def remainder_forcing_rates(m: int, mu) -> list[dict]:
    """Decay rates s_j of the remainder forcing terms, in exact arithmetic.

    For each 1 <= j <= m/2 returns s_j = 2 mu + (m+1)(m-j) / (m-j-1/2) and
    whether the structural bound s_j >= 2 mu + m + 1 holds.  The remainder
    only exists for m >= 3.
    """
    if m < 3:
        raise ValueError("the remainder forcing only appears for m >= 3")
    mu = Fraction(mu)
    out = []
    for j in range(1, m // 2 + 1):
        s_j = 2 * mu + Fraction(2 * (m + 1) * (m - j), 2 * (m - j) - 1)
        bound = 2 * mu + m + 1
        out.append({"j": j, "s": s_j, "bound": bound, "ok": s_j >= bound})
    return out


# -- bootstrap ------------------------------------------------------------------


@dataclass(frozen=True)
class BootstrapInput:
    """Hypothesis data for one decay-order bootstrap step.

    rho_prev, C_prev: certified rate and constant at derivative order m-1.
    C_0: coefficient of the (t+1)^(-1) X self-interaction term.
    forcing: list of (C_i, s_i) algebraic forcing terms, s_i >= rho_prev + 2.
    T_star: start of the certified window (the produced constant must not
    depend on it).
    """

    rho_prev: Fraction
    C_prev: float
    C_0: float
    forcing: tuple = ()
    T_star: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "rho_prev", Fraction(self.rho_prev))
        if self.C_prev <= 0 or self.C_0 < 0 or self.T_star < 0:
            raise ValueError("C_prev must be positive, C_0 and T_star nonnegative")
        forcing = tuple((float(c), Fraction(s)) for c, s in self.forcing)
        object.__setattr__(self, "forcing", forcing)
        for c_i, s_i in forcing:
            if c_i < 0:
                raise ValueError("forcing coefficients must be nonnegative")
            if s_i < self.rho_prev + 2:
                raise ValueError(
                    f"forcing rate s={s_i} violates s >= rho_prev + 2 = {self.rho_prev + 2}"
                )


@dataclass(frozen=True)
class BootstrapResult:
    rho: Fraction
    constant: float
    k_const: float
    details: dict = field(default_factory=dict)


def bootstrap_step(inp: BootstrapInput) -> BootstrapResult:
    """One splitting-ball bootstrap step: rho_m = 1 + rho_prev plus a constant.

    With the ball radius squared (C_0 + k)/(t+1), k = 1 + max s_i, weighted
    integration of the hypothesis gives the admissible forced-response
    constant

        C_m = (C_0 + k)^2 C_prev / (k - 1 - rho_prev)
              + sum_i C_i / (k + 1 - s_i),

    independent of T_star by construction.  Transients of the initial value
    at T_star decay at the faster rate (t+1)^(-k) and are outside the
    certified forced response (see the worst-case trajectory oracle).
    """
    rho_m = inp.rho_prev + 1
    if inp.forcing:
        k = 1 + max(s for _, s in inp.forcing)
    else:
        k = inp.rho_prev + 3  # any k > rho_prev + 1 works without forcing
    kf = float(k)
    q = float(k - 1 - inp.rho_prev)
    constant = (inp.C_0 + kf) ** 2 * inp.C_prev / q
    for c_i, s_i in inp.forcing:
        constant += c_i / float(k + 1 - s_i)
    return BootstrapResult(
        rho=rho_m,
        constant=constant,
        k_const=kf,
        details={"q": q, "rho_prev": inp.rho_prev},
    )


def bootstrap_compose(rho0, steps: int) -> Fraction:
    """Exact rate after `steps` bootstrap iterations from rho0."""
    return Fraction(rho0) + steps


def bootstrap_particular_solution(inp: BootstrapInput, result: BootstrapResult, t: np.ndarray) -> np.ndarray:
    """Closed-form worst-case (zero-transient) trajectory of the equality ODE."""
    kf = result.k_const
    q = float(result.k_const - 1 - float(inp.rho_prev))
    x = (inp.C_0 + kf) ** 2 * inp.C_prev / q * (t + 1.0) ** (-(1.0 + float(inp.rho_prev)))
    for c_i, s_i in inp.forcing:
        x = x + c_i / float(Fraction(result.k_const) + 1 - s_i) * (t + 1.0) ** (1.0 - float(s_i))
    return x


def bootstrap_trajectory(inp: BootstrapInput, result: BootstrapResult, t_end: float, n_points: int = 200):
    """Numerically integrate the equality version of the hypothesis ODE.

    X' = -k/(t+1) X + (C_0+k)^2 C_prev (t+1)^(-2-rho_prev)
         + sum C_i (t+1)^(-s_i),

    started on the zero-transient worst case at T_star.  Returns (t, X).
    """
    kf = result.k_const
    rho_prev = float(inp.rho_prev)

    def rhs(t, x):
        f = (inp.C_0 + kf) ** 2 * inp.C_prev * (t + 1.0) ** (-2.0 - rho_prev)
        for c_i, s_i in inp.forcing:
            f += c_i * (t + 1.0) ** (-float(s_i))
        return -kf / (t + 1.0) * x[0] + f

    t0 = float(inp.T_star)
    x0 = bootstrap_particular_solution(inp, result, np.array([t0]))
    t_eval = np.linspace(t0, t_end, n_points)
    sol = solve_ivp(rhs, (t0, t_end), x0, t_eval=t_eval, rtol=1e-10, atol=1e-14)
    if not sol.success:
        raise RuntimeError(f"bootstrap ODE integration failed: {sol.message}")
    return sol.t, sol.y[0]


# -- claim checks -----------------------------------------------------------------


@dataclass(frozen=True)
class RateVerdict:
    passed: bool
    fitted_exponent: float
    claimed_exponent: float
    margin: float
    style: str


def decay_rate_check(
    fit: FitResult,
    m: int,
    decay_mu: float,
    tolerance: float,
    style: str = "higher_order",
) -> RateVerdict:
    """One-sided check of a fitted exponent against a claimed decay rate.

    style="higher_order": claim is -(m + 2 mu) for the order-m seminorm.
    style="uniform": claim is the m-independent -3/2 Sobolev-norm rate.
    Upper bounds are audited one-sided: pass when the fitted exponent is at
    least as negative as the claim minus the tolerance.
    """
    if style == "higher_order":
        claimed = -(m + 2.0 * decay_mu)
    elif style == "uniform":
        claimed = -1.5
    else:
        raise ValueError("style must be 'higher_order' or 'uniform'")
    margin = claimed + tolerance - fit.exponent
    return RateVerdict(
        passed=fit.exponent <= claimed + tolerance,
        fitted_exponent=fit.exponent,
        claimed_exponent=claimed,
        margin=margin,
        style=style,
    )

"""Run configuration: dotted-key text grammar, validation, defaults.

Config files are plain text, one `section.key = value` per line, with `#`
comments and blank lines ignored:

    # small Hall run
    grid.n = 64
    grid.box_length = 32.0
    time.t_end = 5.0
    init.kind = gaussian_blob

Unknown keys are rejected by name; parse errors carry line numbers.
`render_config` writes the canonical form and round-trips through
`parse_config` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

_SENTINEL = object()


class ConfigError(ValueError):
    pass


@dataclass
class GridConfig:
    n: int = 32
    box_length: float = 2.0 * math.pi
    dealias_fraction: float = 2.0 / 3.0


@dataclass
class PhysicsConfig:
    nu: float = 1.0
    mu_resistivity: float = 1.0
    hall_coefficient: float = 1.0
    rhs_form: str = "divergence"


@dataclass
class InitConfig:
    kind: str = "gaussian_blob"
    amplitude: float = 1e-2
    center_x: float | None = None
    center_y: float | None = None
    center_z: float | None = None
    width: float | None = None
    band_lo: float | None = None
    band_hi: float | None = None
    seed: int = 1234
    rescale_hm_target: float | None = None
    rescale_m: int = 3


@dataclass
class TimeConfig:
    t_end: float = 1.0
    sample_interval: float | None = None
    cfl_advective: float = 0.4
    cfl_whistler: float = 0.3
    dt_min: float = 1e-10
    dt_max: float = 0.1
    blowup_threshold: float = 1e6


@dataclass
class AnalysisConfig:
    fit_window_lo: float | None = None
    fit_window_hi: float | None = None
    alpha_valid: float = 0.1
    splitting_k_const: float = 1.5
    m_max: int = 4
    j_max: int = 2
    audit_energy: bool = True
    audit_fourier_bound: bool = True
    audit_splitting: bool = True
    audit_monotonicity: bool = False
    monotonicity_m: int = 3
    energy_tolerance: float = 1e-4
    small_data: bool = False


@dataclass
class OutputConfig:
    directory: str = "out"
    checkpoint_every: int = 0  # in samples; 0 writes only the final state


@dataclass
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    init: InitConfig = field(default_factory=InitConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def sample_interval(self) -> float:
        if self.time.sample_interval is not None:
            return self.time.sample_interval
        return self.time.t_end / 20.0 if self.time.t_end > 0 else 1.0


_SECTIONS = {
    "grid": GridConfig,
    "physics": PhysicsConfig,
    "init": InitConfig,
    "time": TimeConfig,
    "analysis": AnalysisConfig,
    "output": OutputConfig,
}


def _coerce(raw: str, ftype, key: str, lineno: int):
    raw = raw.strip()
    base = ftype
    optional = False
    if ftype in (float | None, int | None):
        optional = True
        base = float if ftype == (float | None) else int
    if optional and raw.lower() in ("none", ""):
        return None
    try:
        if base is int:
            v = int(raw)
        elif base is float:
            v = float(raw)
        elif base is bool:
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError("not a boolean")
        elif base is str:
            return raw
        else:
            raise TypeError(f"unhandled config field type {ftype}")
        return v
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"line {lineno}: cannot parse {key} = {raw!r}: {exc}") from None


def parse_config(text: str) -> RunConfig:
    """Parse the dotted-key grammar into a validated RunConfig."""
    import typing

    cfg = RunConfig()
    seen = set()
    # get_type_hints resolves the string annotations from future-import mode
    field_types = {name: typing.get_type_hints(cls) for name, cls in _SECTIONS.items()}

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw_line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key.count(".") != 1:
            raise ConfigError(f"line {lineno}: key {key!r} must be section.name")
        section, name = key.split(".")
        if section not in _SECTIONS:
            raise ConfigError(f"line {lineno}: unknown section {section!r} in key {key!r}")
        if name not in field_types[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        coerced = _coerce(value, field_types[section][name], key, lineno)
        setattr(getattr(cfg, section), name, coerced)

    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig):
    """Cross-field validation; raises ConfigError naming the constraint."""
    g = cfg.grid
    if g.n < 8 or g.n % 2 != 0:
        raise ConfigError(f"grid.n must be even and >= 8, got {g.n}")
    if g.box_length <= 0:
        raise ConfigError("grid.box_length must be positive")
    if not (0 < g.dealias_fraction <= 1):
        raise ConfigError("grid.dealias_fraction must lie in (0, 1]")
    p = cfg.physics
    if p.nu <= 0 or p.mu_resistivity <= 0:
        raise ConfigError("physics.nu and physics.mu_resistivity must be positive")
    if p.hall_coefficient < 0:
        raise ConfigError("physics.hall_coefficient must be >= 0")
    if p.rhs_form not in ("divergence", "primitive", "linear"):
        raise ConfigError("physics.rhs_form must be divergence, primitive or linear")
    i = cfg.init
    if i.kind not in ("gaussian_blob", "random_band", "gaussian_spectrum"):
        raise ConfigError(f"init.kind {i.kind!r} is not a known constructor")
    if i.kind == "random_band" and (i.band_lo is None or i.band_hi is None):
        raise ConfigError("init.band_lo and init.band_hi are required for random_band")
    if i.amplitude < 0:
        raise ConfigError("init.amplitude must be >= 0")
    if i.rescale_hm_target is not None and i.rescale_hm_target <= 0:
        raise ConfigError("init.rescale_hm_target must be positive when set")
    t = cfg.time
    if t.t_end < 0:
        raise ConfigError("time.t_end must be >= 0")
    if t.sample_interval is not None:
        if t.sample_interval <= 0:
            raise ConfigError("time.sample_interval must be positive")
        if t.t_end > 0:
            ratio = t.t_end / t.sample_interval
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                raise ConfigError(
                    f"time.sample_interval must divide time.t_end "
                    f"(t_end/interval = {ratio!r})"
                )
    if not (0 < t.cfl_advective <= 1 and 0 < t.cfl_whistler <= 1):
        raise ConfigError("CFL factors must lie in (0, 1]")
    if t.dt_min > t.dt_max:
        raise ConfigError("time.dt_min must not exceed time.dt_max")
    a = cfg.analysis
    if a.splitting_k_const <= 0:
        raise ConfigError("analysis.splitting_k_const must be positive")
    if a.m_max < 1 or a.j_max < 1:
        raise ConfigError("analysis.m_max and analysis.j_max must be >= 1")
    if a.audit_monotonicity and a.monotonicity_m + 1 > a.m_max:
        raise ConfigError(
            "analysis.m_max must be at least monotonicity_m + 1 when the "
            "monotonicity audit is enabled"
        )
    if cfg.output.checkpoint_every < 0:
        raise ConfigError("output.checkpoint_every must be >= 0")


def render_config(cfg: RunConfig) -> str:
    """Canonical text form; None-valued optionals are omitted."""
    lines = ["# hallmhd run configuration"]
    for section, cls in _SECTIONS.items():
        obj = getattr(cfg, section)
        for f in fields(cls):
            v = getattr(obj, f.name)
            if v is None:
                continue
            if isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{section}.{f.name} = {v}")
    return "\n".join(lines) + "\n"

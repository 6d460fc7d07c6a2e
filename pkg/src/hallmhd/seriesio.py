"""Persistence: delimited-text series, JSON audit records, binary checkpoints.

Series files are whitespace-delimited text with one self-describing header
line, full double precision (%.17g), re-read losslessly by `read_series`.
Checkpoints are raw little-endian binary with a fixed header (magic "HMHD")
followed by the u and B coefficient arrays, component-major, in numpy fft
index order; a write/read round trip is bit-exact.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_config, render_config
from .grid import Grid, make_grid
from .integrator import PhysicsParams, SolverState
from .sampling import SampleRecord

MAGIC = b"HMHD"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sIIddddQddd")
# magic, version, n, box_length, dealias_fraction, reserved, t, step, nu, mu, hall


class CheckpointError(IOError):
    pass


# -- series -------------------------------------------------------------------


def series_columns(m_max: int, j_max: int) -> list[str]:
    cols = ["t", "energy", "u_l2_sq", "B_l2_sq"]
    for m in range(1, m_max + 1):
        cols += [f"u_d{m}_sq", f"B_d{m}_sq"]
    cols += ["u_linf", "B_linf"]
    for j in range(1, j_max + 1):
        cols += [f"u_d{j}_linf", f"B_d{j}_linf"]
    cols += ["l1_u", "l1_B", "dt"]
    return cols


def emit_series(records: list[SampleRecord], path, m_max: int, j_max: int):
    """Write records as column-documented delimited text."""
    path = Path(path)
    cols = series_columns(m_max, j_max)
    lines = ["# " + " ".join(cols)]
    for r in records:
        vals = [r.t, r.dm_u[0] + r.dm_B[0], r.dm_u[0], r.dm_B[0]]
        for m in range(1, m_max + 1):
            vals += [r.dm_u[m], r.dm_B[m]]
        vals += [r.linf_u, r.linf_B]
        for j in range(1, j_max + 1):
            vals += [r.dlinf_u[j - 1], r.dlinf_B[j - 1]]
        vals += [r.l1_u, r.l1_B, r.dt]
        lines.append(" ".join(f"{v:.17g}" for v in vals))
    path.write_text("\n".join(lines) + "\n")


def read_series(path) -> list[SampleRecord]:
    """Re-read an emitted series file into SampleRecords."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("#"):
        raise IOError(f"{path}: missing series header")
    cols = lines[0][1:].split()
    m_max = max((int(c[3:-3]) for c in cols if c.startswith("u_d") and c.endswith("_sq")), default=0)
    j_max = max((int(c[3:-5]) for c in cols if c.startswith("u_d") and c.endswith("_linf")), default=0)
    records = []
    for line in lines[1:]:
        if not line.strip():
            continue
        v = dict(zip(cols, (float(x) for x in line.split())))
        dm_u = tuple([v["u_l2_sq"]] + [v[f"u_d{m}_sq"] for m in range(1, m_max + 1)])
        dm_B = tuple([v["B_l2_sq"]] + [v[f"B_d{m}_sq"] for m in range(1, m_max + 1)])
        records.append(
            SampleRecord(
                t=v["t"],
                dt=v["dt"],
                dm_u=dm_u,
                dm_B=dm_B,
                linf_u=v["u_linf"],
                linf_B=v["B_linf"],
                dlinf_u=tuple(v[f"u_d{j}_linf"] for j in range(1, j_max + 1)),
                dlinf_B=tuple(v[f"B_d{j}_linf"] for j in range(1, j_max + 1)),
                l1_u=v["l1_u"],
                l1_B=v["l1_B"],
            )
        )
    return records


# -- audit records ---------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    return obj


def write_audit_record(obj, path):
    """Serialize one audit outcome object as a structured JSON record."""
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, default=str) + "\n")


# -- checkpoints ------------------------------------------------------------------


def write_checkpoint(state: SolverState, g: Grid, params: PhysicsParams, path):
    path = Path(path)
    header = _HEADER.pack(
        MAGIC,
        CHECKPOINT_VERSION,
        g.n,
        g.box_length,
        g.dealias_fraction,
        0.0,
        state.t,
        state.step_index,
        params.nu,
        params.mu_resistivity,
        params.hall_coefficient,
    )
    with open(path, "wb") as f:
        f.write(header)
        f.write(np.ascontiguousarray(state.u_hat, dtype="<c16").tobytes())
        f.write(np.ascontiguousarray(state.B_hat, dtype="<c16").tobytes())


def read_checkpoint(path, expected_grid: Grid | None = None):
    """Read a checkpoint; returns (state, grid, params).

    If `expected_grid` is given its resolution and box must match the file.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated header")
    magic, version, n, box_length, frac, _res, t, step_index, nu, mu, hall = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")
    if expected_grid is not None:
        if expected_grid.n != n or abs(expected_grid.box_length - box_length) > 1e-12 * box_length:
            raise CheckpointError(
                f"{path}: grid mismatch (file n={n}, L={box_length}; "
                f"session n={expected_grid.n}, L={expected_grid.box_length})"
            )
        g = expected_grid
    else:
        g = make_grid(n, box_length, frac)
    count = 3 * n**3
    need = _HEADER.size + 2 * count * 16
    if len(raw) != need:
        raise CheckpointError(f"{path}: payload size {len(raw)} != expected {need}")
    u_flat = np.frombuffer(raw, dtype="<c16", count=count, offset=_HEADER.size)
    b_flat = np.frombuffer(raw, dtype="<c16", count=count, offset=_HEADER.size + count * 16)
    shape = (3, n, n, n)
    state = SolverState(
        u_hat=u_flat.reshape(shape).copy(),
        B_hat=b_flat.reshape(shape).copy(),
        t=t,
        step_index=step_index,
    )
    params = PhysicsParams(nu=nu, mu_resistivity=mu, hall_coefficient=hall)
    return state, g, params


# -- config files -----------------------------------------------------------------


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def save_config(cfg: RunConfig, path):
    Path(path).write_text(render_config(cfg))

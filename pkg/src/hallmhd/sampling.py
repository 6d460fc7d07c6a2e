"""Per-sample norm records and the sinks that collect them during runs.

A SampleRecord holds every scalar the downstream audits and decay fits
need, so audits can run on stored histories without access to full states:
squared homogeneous seminorms ||D^m .||^2 for m = 0..m_max, pointwise sup
norms of the fields and of their |k|^j derivative fields for j = 1..j_max,
and the discrete L1 norms (used by the Fourier-amplitude bounds at t = 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, inverse_transform, radial_multiplier, spectral_l2_sq


@dataclass(frozen=True)
class SampleRecord:
    t: float
    dt: float
    dm_u: tuple[float, ...]  # squared seminorms, orders 0..m_max
    dm_B: tuple[float, ...]
    linf_u: float
    linf_B: float
    dlinf_u: tuple[float, ...]  # sup |D^j .| for j = 1..j_max
    dlinf_B: tuple[float, ...]
    l1_u: float
    l1_B: float

    @property
    def energy(self) -> float:
        return self.dm_u[0] + self.dm_B[0]

    @property
    def dissipation(self) -> float:
        return self.dm_u[1] + self.dm_B[1]

    def sobolev_sq(self, m: int) -> float:
        """||u||_Hm^2 + ||B||_Hm^2 from stored seminorms."""
        return sum(self.dm_u[j] + self.dm_B[j] for j in range(m + 1))

    def sobolev_grad_sq(self, m: int) -> float:
        """||grad u||_Hm^2 + ||grad B||_Hm^2 from stored seminorms."""
        return sum(self.dm_u[j + 1] + self.dm_B[j + 1] for j in range(m + 1))


def _pointwise_max(p: np.ndarray) -> float:
    return float(np.sqrt(np.sum(p * p, axis=0)).max())


def record_from_state(state, g: Grid, m_max: int = 4, j_max: int = 2, dt: float = 0.0) -> SampleRecord:
    """Compute one SampleRecord from a solver state."""
    dm_u = tuple(spectral_l2_sq(state.u_hat, g, None if m == 0 else g.kmag ** (2 * m))
                 for m in range(m_max + 1))
    dm_B = tuple(spectral_l2_sq(state.B_hat, g, None if m == 0 else g.kmag ** (2 * m))
                 for m in range(m_max + 1))
    out = {}
    for name, s in (("u", state.u_hat), ("B", state.B_hat)):
        p = inverse_transform(s, g, check=False)
        mag = np.sqrt(np.sum(p * p, axis=0))
        out[f"linf_{name}"] = float(mag.max())
        out[f"l1_{name}"] = float(mag.sum()) * g.dx**3
        out[f"dlinf_{name}"] = tuple(
            _pointwise_max(inverse_transform(radial_multiplier(s, g, j), g, check=False))
            for j in range(1, j_max + 1)
        )
    return SampleRecord(
        t=state.t,
        dt=dt,
        dm_u=dm_u,
        dm_B=dm_B,
        linf_u=out["linf_u"],
        linf_B=out["linf_B"],
        dlinf_u=out["dlinf_u"],
        dlinf_B=out["dlinf_B"],
        l1_u=out["l1_u"],
        l1_B=out["l1_B"],
    )


class NormSink:
    """Sample-time sink accumulating SampleRecords."""

    def __init__(self, g: Grid, m_max: int = 4, j_max: int = 2):
        self.grid = g
        self.m_max = m_max
        self.j_max = j_max
        self.records: list[SampleRecord] = []
        self._last_t = None

    def __call__(self, state):
        dt = 0.0 if self._last_t is None else state.t - self._last_t
        self._last_t = state.t
        self.records.append(record_from_state(state, self.grid, self.m_max, self.j_max, dt=dt))


class StateAuditSink:
    """Sample-time sink applying a per-state audit function.

    ``fn(state) -> result`` is evaluated at every sample; results are kept
    in order.  Used for the Fourier-amplitude bound and splitting-ball
    audits, which need the full spectral state rather than norm records.
    """

    def __init__(self, fn):
        self.fn = fn
        self.results = []
        self.times = []

    def __call__(self, state):
        self.times.append(state.t)
        self.results.append(self.fn(state))

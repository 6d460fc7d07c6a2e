"""Regenerate the golden MHD (hall = 0) regression series.

Run from the repository root after an intentional behavior change:

    python3 tests/make_golden.py

The acceptance suite replays the same configuration and requires agreement
with this file to 1e-8 relative, which pins the Hall-free code path.
"""

from pathlib import Path

from hallmhd.config import parse_config
from hallmhd.driver import run_simulation
from hallmhd.seriesio import emit_series

GOLDEN_CONFIG = """
grid.n = 32
grid.box_length = 16.0
physics.hall_coefficient = 0.0
time.t_end = 1.0
time.sample_interval = 0.05
time.dt_max = 0.025
init.kind = gaussian_blob
init.amplitude = 0.2
init.seed = 2024
analysis.m_max = 4
analysis.j_max = 2
analysis.audit_energy = false
analysis.audit_fourier_bound = false
analysis.audit_splitting = false
"""


def main():
    cfg = parse_config(GOLDEN_CONFIG)
    result = run_simulation(cfg)
    out = Path(__file__).parent / "data" / "golden_mhd_series.txt"
    out.parent.mkdir(exist_ok=True)
    emit_series(result.records, out, cfg.analysis.m_max, cfg.analysis.j_max)
    print(f"wrote {out} ({len(result.records)} samples)")


if __name__ == "__main__":
    main()

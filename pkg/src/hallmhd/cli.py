"""Command-line surface.

Subcommands:
  run <config>                       simulate; emit series, audits, checkpoints
  verify <config|checkpoint>         invariant and audit suites
  analyze <series> [--window a b]    power-law fits and rate verdicts
  oracle [--m M] [--t T]             heat-semigroup oracle values and slopes
  sweep <config> --param k=v1,v2,..  parameter sweeps, one subdirectory per run

Exit codes: 0 all requested audits passed, 1 audit failure, 2 usage or
config error, 3 runtime blowup.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import decay
from .config import ConfigError, parse_config
from .driver import fit_run_decay, run_simulation
from .integrator import BlowupError
from .seriesio import load_config, read_series, write_audit_record

EXIT_OK = 0
EXIT_AUDIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_BLOWUP = 3


def _load(path: str):
    try:
        return load_config(path)
    except FileNotFoundError:
        print(f"error: config file not found: {path}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from None
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE) from None


def cmd_run(args) -> int:
    cfg = _load(args.config)
    out_dir = Path(args.output or cfg.output.directory)
    try:
        result = run_simulation(cfg, out_dir=out_dir)
    except BlowupError as exc:
        print(f"blowup: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    print(f"run finished at t={result.final_state.t:.6g} "
          f"({result.final_state.step_index} steps), output in {out_dir}")
    failed = [n for n, r in result.reports.items() if not getattr(r, "passed", True)]
    for name, rep in sorted(result.reports.items()):
        status = "PASS" if getattr(rep, "passed", True) else "FAIL"
        print(f"  audit {name}: {status}")
    return EXIT_AUDIT_FAILURE if failed else EXIT_OK


def cmd_verify(args) -> int:
    from .verify import verify_checkpoint, verify_config

    target = Path(args.target)
    if target.suffix == ".hmhd":
        checks = verify_checkpoint(target)
    else:
        checks = verify_config(_load(args.target))
    worst = EXIT_OK
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        extra = f" ({c.detail})" if c.detail else ""
        print(f"  {c.name}: {status}  value={c.value:.3e} threshold={c.threshold:.1e}{extra}")
        if not c.passed:
            worst = EXIT_AUDIT_FAILURE
    return worst


def cmd_analyze(args) -> int:
    records = read_series(args.series)
    series = decay.series_from_records(records, m=args.m)
    window = tuple(args.window) if args.window else (series.times[0], series.times[-1])
    try:
        fit = decay.fit_power_law(series, window, min_samples=args.min_samples,
                                  min_span=args.min_span)
    except ValueError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    verdict = decay.decay_rate_check(fit, args.m, args.mu, args.tolerance, style=args.style)
    print(f"fit m={args.m}: exponent {fit.exponent:+.4f}, prefactor {fit.prefactor:.6g}, "
          f"rms residual {fit.rms_residual:.3e}, window {fit.window}")
    print(f"claimed {verdict.claimed_exponent:+.4f} (style={verdict.style}), "
          f"tolerance {args.tolerance}: {'PASS' if verdict.passed else 'FAIL'}")
    if args.report:
        write_audit_record({"fit": fit, "verdict": verdict}, args.report)
    return EXIT_OK if verdict.passed else EXIT_AUDIT_FAILURE


def cmd_oracle(args) -> int:
    profile = decay.gaussian_profile
    value = decay.heat_oracle(profile, args.m, args.t)
    slope = decay.heat_oracle_slope(profile, args.m, args.t)
    print(f"profile=gaussian m={args.m} t={args.t}: value {value:.12e}, "
          f"log-log slope {slope:+.6f} (asymptote {-(args.m + 1.5):+.1f})")
    if args.table:
        print("  t        value           slope")
        for t in (1.0, 10.0, 100.0, 1000.0):
            v = decay.heat_oracle(profile, args.m, t)
            s = decay.heat_oracle_slope(profile, args.m, t)
            print(f"  {t:<8g} {v:.6e}    {s:+.4f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg_text = Path(args.config).read_text()
    key, _, values = args.param.partition("=")
    if not values:
        print("error: --param must look like section.key=v1,v2,...", file=sys.stderr)
        return EXIT_USAGE
    worst = EXIT_OK
    base_out = Path(args.output) if args.output else None
    for i, v in enumerate(values.split(",")):
        text = cfg_text + f"\n{key.strip()} = {v.strip()}\n"
        try:
            cfg = parse_config(text)
        except ConfigError as exc:
            print(f"config error for {key}={v}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        out = (base_out or Path(cfg.output.directory)) / f"sweep_{i:03d}_{v.strip()}"
        try:
            result = run_simulation(cfg, out_dir=out)
        except BlowupError as exc:
            print(f"blowup for {key}={v}: {exc}", file=sys.stderr)
            return EXIT_BLOWUP
        ok = result.passed
        if not ok:
            worst = EXIT_AUDIT_FAILURE
        print(f"  {key}={v}: {'PASS' if ok else 'FAIL'} -> {out}")
    return worst


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hallmhd", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate a config")
    p.add_argument("config")
    p.add_argument("--output", help="output directory (defaults to output.directory)")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="execute the invariant/audit suites")
    p.add_argument("target", help="config file or .hmhd checkpoint")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("analyze", help="fit decay exponents from a series file")
    p.add_argument("series")
    p.add_argument("--window", nargs=2, type=float, metavar=("A", "B"))
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--mu", type=float, default=0.75)
    p.add_argument("--tolerance", type=float, default=0.3)
    p.add_argument("--style", choices=("higher_order", "uniform"), default="uniform")
    p.add_argument("--min-samples", type=int, default=10)
    p.add_argument("--min-span", type=float, default=4.0)
    p.add_argument("--report", help="write fit + verdict JSON here")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("oracle", help="heat-semigroup oracle evaluations")
    p.add_argument("--profile", choices=("gaussian",), default="gaussian")
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--t", type=float, default=1000.0)
    p.add_argument("--table", action="store_true")
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("sweep", help="run a config over parameter values")
    p.add_argument("config")
    p.add_argument("--param", required=True, help="section.key=v1,v2,...")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

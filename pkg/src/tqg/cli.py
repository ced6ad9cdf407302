"""Command line interface: ``tqg run | diagnose | verify-bound | kernel-table | residual``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from tqg.config import ConfigError, SimConfig, load_config
from tqg.diagnostics import envelope_verdict, record, strong_solution_residual
from tqg.greens import kernel_table
from tqg.runner import CONFIG_NAME, SNAPSHOT_DIR, build_params, run
from tqg.storage import (
    SnapshotError,
    csv_header,
    end_marker,
    format_row,
    read_diagnostics_csv,
    read_state,
)

EXIT_OK = 0
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _load(path) -> SimConfig:
    try:
        return load_config(path)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None


def cmd_run(args) -> int:
    cfg = _load(args.config)
    if args.output_dir:
        cfg = cfg.with_(output_dir=args.output_dir)
    result = run(cfg, resume=args.resume)
    v = result.verdict
    print(f"verdict={v.kind.name} t={v.t_final!r} K={v.final_K!r} steps={result.steps} "
          f"integrand_growing={str(v.integrand_growing).lower()} ({v.reason})")
    return v.kind.exit_code


def _write_lines(lines: list[str], dest) -> None:
    text = "\n".join(lines) + "\n"
    if dest:
        Path(dest).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_diagnose(args) -> int:
    cfg = _load(args.config)
    params = build_params(cfg)
    states = sorted((read_state(p, expected_n=cfg.n) for p in args.snapshots), key=lambda s: s.t)
    rows, prev = [], None
    for s in states:
        prev = record(s, params, prev)
        rows.append(format_row(prev))
    _write_lines([csv_header(), *rows, end_marker("DIAGNOSED", len(rows))], args.output)
    return EXIT_OK


def cmd_verify_bound(args) -> int:
    try:
        records, _ = read_diagnostics_csv(args.csv)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    v = envelope_verdict(records, c=args.c, calib_window=args.calib)
    mode = "calibrated" if v.calibrated else "given"
    status = "violated" if v.violated else "not violated"
    print(f"c={v.c_calibrated!r} ({mode}) K={v.K_used!r} checked={v.n_checked} "
          f"margin_lnln={v.margin!r}")
    print(f"envelope {status}")
    return 1 if v.violated else EXIT_OK


def cmd_kernel_table(args) -> int:
    try:
        table = kernel_table(args.min, args.max, args.points)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lines = ["r,k0", *(f"{float(r)!r},{float(v)!r}" for r, v in zip(table.radii, table.values))]
    lines.append(f"# END tolerance={table.tolerance!r} rows={len(table.radii)}")
    _write_lines(lines, args.output)
    return EXIT_OK


def cmd_residual(args) -> int:
    root = Path(args.snapshot_dir)
    cfg_path = args.config or root / CONFIG_NAME
    cfg = _load(cfg_path)
    snap_dir = root / SNAPSHOT_DIR if (root / SNAPSHOT_DIR).is_dir() else root
    paths = sorted(snap_dir.glob("step_*.tqg"))
    cadence = args.every or cfg.snapshot_cadence
    # keep the uniformly spaced snapshots only (the final one may be off-cadence)
    paths = [p for p in paths if int(p.stem.split("_")[1]) % cadence == 0]
    states = [read_state(p, expected_n=cfg.n) for p in paths]
    res_b, res_q = strong_solution_residual(states, build_params(cfg))
    print(f"res_b={res_b!r} res_q={res_q!r} snapshots={len(states)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tqg", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a simulation")
    p.add_argument("config")
    p.add_argument("--resume", action="store_true", help="continue from the output dir checkpoint")
    p.add_argument("--output-dir", help="override output.output_dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("diagnose", help="recompute diagnostics rows from snapshots")
    p.add_argument("snapshots", nargs="+")
    p.add_argument("--config", required=True, help="config supplying f, h and dealiasing")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("verify-bound", help="growth-envelope check of a diagnostics CSV")
    p.add_argument("csv")
    p.add_argument("--c", type=float, default=None, help="envelope constant (default: calibrate)")
    p.add_argument("--calib", type=float, default=0.5, help="calibration window fraction")
    p.set_defaults(func=cmd_verify_bound)

    p = sub.add_parser("kernel-table", help="tabulate K0 as CSV")
    p.add_argument("--min", type=float, default=1e-3)
    p.add_argument("--max", type=float, default=30.0)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_kernel_table)

    p = sub.add_parser("residual", help="integral-form residuals of a run's snapshots")
    p.add_argument("snapshot_dir")
    p.add_argument("--config", help="defaults to config.ini inside the directory")
    p.add_argument("--every", type=int, help="snapshot step spacing (default: snapshot_cadence)")
    p.set_defaults(func=cmd_residual)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, SnapshotError, FileNotFoundError) as exc:
        print(f"tqg {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""The simulation driver: initial data, the stepping loop, checkpoints and outputs."""

from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from tqg.config import FieldSpec, SimConfig, emit_config
from tqg.diagnostics import (
    TAIL_THRESHOLD,
    BlowupVerdict,
    DiagnosticsRecord,
    blowup_verdict,
    record,
)
from tqg.dynamics import (
    BlowupDetected,
    TqgParams,
    TqgState,
    cfl_suggest,
    check_cfl,
    rk4_step,
)
from tqg.initial import random_state, shear_state, single_mode
from tqg.spectral import Grid, ScalarField
from tqg.storage import (
    csv_header,
    end_marker,
    format_row,
    read_diagnostics_csv,
    read_field,
    read_state,
    write_snapshot,
)

log = logging.getLogger(__name__)

CSV_NAME = "diagnostics.csv"
CHECKPOINT_NAME = "checkpoint.json"
CONFIG_NAME = "config.ini"
SNAPSHOT_DIR = "snapshots"


def snapshot_name(step: int) -> str:
    return f"step_{step:08d}.tqg"


def make_field(spec: FieldSpec, grid: Grid) -> ScalarField:
    if spec.kind == "zero":
        return ScalarField.zeros(grid)
    if spec.kind == "single_mode":
        return single_mode(grid, spec.kx, spec.ky, spec.amplitude, spec.phase)
    field = read_field(spec.path, expected_n=grid.n)
    if field.grid != grid:
        raise ValueError(f"{spec.path}: grid {field.grid} does not match {grid}")
    return field


def build_params(cfg: SimConfig) -> TqgParams:
    grid = Grid(cfg.n, cfg.length)
    dt = cfg.max_dt if cfg.dt == "auto" else cfg.dt
    return TqgParams(make_field(cfg.f_spec, grid), make_field(cfg.h_spec, grid),
                     dealias_on=cfg.dealias_on, dt=dt, cfl_target=cfg.cfl_target)


def initial_state(cfg: SimConfig) -> TqgState:
    grid = Grid(cfg.n, cfg.length)
    if cfg.ic_kind == "shear":
        return shear_state(grid, cfg.ic_amplitude)
    if cfg.ic_kind == "random_bandlimited":
        return random_state(grid, cfg.ic_seed, cfg.ic_spectrum_slope,
                            cfg.ic_kmax or None, cfg.ic_amplitude)
    state = read_state(cfg.ic_file, expected_n=cfg.n)
    if state.grid != grid:
        raise ValueError(f"{cfg.ic_file}: grid {state.grid} does not match {grid}")
    return TqgState(state.b, state.q, 0.0)


@dataclass
class RunResult:
    verdict: BlowupVerdict
    records: list[DiagnosticsRecord]
    output_dir: Path
    steps: int


def _fixed_steps(cfg: SimConfig) -> int:
    # number of steps of the fixed dt needed to reach t_end; the last may be shortened
    return max(0, math.ceil(cfg.t_end / cfg.dt - 1e-9))


class _Writer:
    """Appends CSV rows as they are produced and keeps the checkpoint in sync."""

    def __init__(self, out: Path, records: list[DiagnosticsRecord]):
        self.out = out
        self.fh = open(out / CSV_NAME, "w", encoding="utf-8", newline="\n")
        self.fh.write(csv_header() + "\n")
        for r in records:
            self.fh.write(format_row(r) + "\n")
        self.rows = len(records)
        self.fh.flush()

    def row(self, rec: DiagnosticsRecord) -> None:
        self.fh.write(format_row(rec) + "\n")
        self.fh.flush()
        self.rows += 1

    def checkpoint(self, state: TqgState, step: int, rows: int,
                   prev: DiagnosticsRecord) -> None:
        name = snapshot_name(step)
        write_snapshot(self.out / SNAPSHOT_DIR / name, state)
        meta = {"step": step, "t": state.t, "snapshot": name, "rows": rows,
                "prev": list(prev.as_tuple())}
        tmp = self.out / (CHECKPOINT_NAME + ".tmp")
        tmp.write_text(json.dumps(meta), encoding="utf-8")
        tmp.replace(self.out / CHECKPOINT_NAME)

    def close(self, status: str) -> None:
        self.fh.write(end_marker(status, self.rows) + "\n")
        self.fh.close()


def run(cfg: SimConfig, resume: bool = False) -> RunResult:
    """Advance from the initial data (or the latest checkpoint) to ``t_end``.

    Diagnostics are recorded every ``diag_cadence`` steps and at the final
    step; snapshots double as checkpoints every ``snapshot_cadence`` steps.
    The loop stops early when the state stops being finite, when the spectral
    tail of ``q`` exceeds 1% or when the pair norm crosses the ceiling.
    """
    out = Path(cfg.output_dir)
    (out / SNAPSHOT_DIR).mkdir(parents=True, exist_ok=True)
    (out / CONFIG_NAME).write_text(emit_config(cfg), encoding="utf-8")
    params = build_params(cfg)

    if resume:
        meta = json.loads((out / CHECKPOINT_NAME).read_text(encoding="utf-8"))
        state = read_state(out / SNAPSHOT_DIR / meta["snapshot"], expected_n=cfg.n)
        step = meta["step"]
        records, _ = read_diagnostics_csv(out / CSV_NAME, allow_incomplete=True)
        records = records[:meta["rows"]]
        prev = DiagnosticsRecord(*meta["prev"])
        log.info("resuming from step %d (t=%r)", step, state.t)
    else:
        state = initial_state(cfg)
        step = 0
        prev = record(state, params)
        records = [prev]

    writer = _Writer(out, records)
    aligned_rows = len(records)
    if not resume:
        writer.checkpoint(state, step, aligned_rows, prev)

    ceiling = cfg.norm_ceiling_factor * max(records[0].pair_norm, 1.0)
    fixed = cfg.dt != "auto"
    n_steps = _fixed_steps(cfg) if fixed else None
    aborted = False
    stop = bool(records) and (records[-1].spectral_tail_frac > TAIL_THRESHOLD
                              or records[-1].pair_norm > ceiling)

    def finished(s: TqgState, k: int) -> bool:
        if fixed:
            return k >= n_steps
        return s.t >= cfg.t_end * (1 - 1e-14)

    while not stop and not finished(state, step):
        if fixed:
            dt = cfg.dt if step < n_steps - 1 else min(cfg.dt, cfg.t_end - state.t)
        else:
            dt = min(cfl_suggest(state, params), cfg.max_dt, cfg.t_end - state.t)
        try:
            state = rk4_step(state, params, dt)
        except BlowupDetected as exc:
            exc.last_record = prev
            write_snapshot(out / SNAPSHOT_DIR / "last_finite.tqg", exc.last_state)
            log.warning("%s", exc)
            aborted = True
            break
        step += 1
        last = finished(state, step)
        on_cadence = step % cfg.diag_cadence == 0
        if on_cadence or last:
            if fixed:
                with warnings.catch_warnings():
                    warnings.simplefilter("default")
                    check_cfl(state, params, dt)
            rec = record(state, params, prev)
            writer.row(rec)
            records.append(rec)
            if on_cadence:
                prev = rec
                aligned_rows = writer.rows
            stop = rec.spectral_tail_frac > TAIL_THRESHOLD or rec.pair_norm > ceiling
        if step % cfg.snapshot_cadence == 0 or last or stop:
            writer.checkpoint(state, step, aligned_rows, prev)

    verdict = blowup_verdict(records, aborted=aborted, ceiling_factor=cfg.norm_ceiling_factor)
    writer.close(verdict.kind.name)
    return RunResult(verdict, records, out, step)

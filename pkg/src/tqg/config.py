"""
Simulation configuration: a sectioned ``key = value`` text format.

Example::

    [grid]
    n = 128
    length = 6.283185307179586

    [time]
    t_end = 1.0
    dt = auto
    cfl_target = 0.5

    [physics]
    dealias = true
    f = zero
    h = single_mode(1, 0, 0.5, 0.0)

    [initial]
    kind = random_bandlimited
    seed = 7

    [output]
    diag_cadence = 10
    output_dir = out

Every key is optional except ``grid.n`` and ``time.t_end``. Unknown sections or
keys are errors. Parsing reports all problems at once.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, fields, replace

IC_KINDS = ("shear", "random_bandlimited", "from_file")


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass(frozen=True)
class FieldSpec:
    kind: str = "zero"
    kx: int = 0
    ky: int = 0
    amplitude: float = 0.0
    phase: float = 0.0
    path: str = ""

    def emit(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "single_mode":
            return f"single_mode({self.kx}, {self.ky}, {self.amplitude!r}, {self.phase!r})"
        return f"from_file({self.path})"


_SINGLE_MODE = re.compile(r"^single_mode\(\s*([^,]+),\s*([^,]+),\s*([^,]+),\s*([^,]+)\)$")
_FROM_FILE = re.compile(r"^from_file\((.+)\)$")


def parse_field_spec(text: str) -> FieldSpec:
    text = text.strip()
    if text == "zero":
        return FieldSpec()
    m = _SINGLE_MODE.match(text)
    if m:
        kx, ky, amp, phase = (g.strip() for g in m.groups())
        try:
            return FieldSpec("single_mode", int(kx), int(ky), float(amp), float(phase))
        except ValueError:
            raise ValueError(f"single_mode needs (int, int, float, float), got {text!r}") from None
    m = _FROM_FILE.match(text)
    if m:
        return FieldSpec("from_file", path=m.group(1).strip())
    raise ValueError(f"field spec must be zero, single_mode(kx, ky, amplitude, phase) "
                     f"or from_file(path), got {text!r}")


@dataclass(frozen=True)
class SimConfig:
    n: int
    t_end: float
    length: float = 2 * math.pi
    dt: float | str = "auto"
    cfl_target: float = 0.5
    max_dt: float = 0.01
    scheme: str = "rk4"
    dealias_on: bool = True
    f_spec: FieldSpec = FieldSpec()
    h_spec: FieldSpec = FieldSpec()
    ic_kind: str = "shear"
    ic_seed: int = 0
    ic_spectrum_slope: float = -3.0
    ic_amplitude: float = 1.0
    ic_kmax: int = 0
    ic_file: str = ""
    diag_cadence: int = 1
    snapshot_cadence: int = 100
    norm_ceiling_factor: float = 1e6
    output_dir: str = "tqg_out"

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


# (section, key) -> (attribute, parser, emitter)
def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_dt(text: str) -> float | str:
    return "auto" if text.strip() == "auto" else float(text)


def _emit_float(v: float) -> str:
    return repr(float(v))


_SCHEMA = {
    ("grid", "n"): ("n", int, str),
    ("grid", "length"): ("length", float, _emit_float),
    ("time", "t_end"): ("t_end", float, _emit_float),
    ("time", "dt"): ("dt", _parse_dt, lambda v: v if v == "auto" else _emit_float(v)),
    ("time", "cfl_target"): ("cfl_target", float, _emit_float),
    ("time", "max_dt"): ("max_dt", float, _emit_float),
    ("time", "scheme"): ("scheme", str.strip, str),
    ("physics", "dealias"): ("dealias_on", _parse_bool, lambda v: "true" if v else "false"),
    ("physics", "f"): ("f_spec", parse_field_spec, FieldSpec.emit),
    ("physics", "h"): ("h_spec", parse_field_spec, FieldSpec.emit),
    ("initial", "kind"): ("ic_kind", str.strip, str),
    ("initial", "seed"): ("ic_seed", int, str),
    ("initial", "spectrum_slope"): ("ic_spectrum_slope", float, _emit_float),
    ("initial", "amplitude"): ("ic_amplitude", float, _emit_float),
    ("initial", "kmax"): ("ic_kmax", int, str),
    ("initial", "file"): ("ic_file", str.strip, str),
    ("output", "diag_cadence"): ("diag_cadence", int, str),
    ("output", "snapshot_cadence"): ("snapshot_cadence", int, str),
    ("output", "norm_ceiling_factor"): ("norm_ceiling_factor", float, _emit_float),
    ("output", "output_dir"): ("output_dir", str.strip, str),
}
_REQUIRED = {("grid", "n"), ("time", "t_end")}


def validate(cfg: SimConfig) -> list[str]:
    errors = []
    if cfg.n < 16 or cfg.n % 2:
        errors.append(f"grid.n must be even and >= 16 (got {cfg.n})")
    if not (math.isfinite(cfg.length) and cfg.length > 0):
        errors.append(f"grid.length must be > 0 (got {cfg.length})")
    if not (math.isfinite(cfg.t_end) and cfg.t_end >= 0):
        errors.append(f"time.t_end must be >= 0 (got {cfg.t_end})")
    if cfg.dt != "auto" and not (math.isfinite(cfg.dt) and cfg.dt > 0):
        errors.append(f"time.dt must be > 0 or 'auto' (got {cfg.dt})")
    if not 0 < cfg.cfl_target < 1:
        errors.append(f"time.cfl_target must lie in (0, 1) (got {cfg.cfl_target})")
    if not (math.isfinite(cfg.max_dt) and cfg.max_dt > 0):
        errors.append(f"time.max_dt must be > 0 (got {cfg.max_dt})")
    if cfg.scheme != "rk4":
        errors.append(f"time.scheme must be 'rk4' (got {cfg.scheme!r})")
    if cfg.ic_kind not in IC_KINDS:
        errors.append(f"initial.kind must be one of {', '.join(IC_KINDS)} (got {cfg.ic_kind!r})")
    if cfg.ic_kind == "from_file" and not cfg.ic_file:
        errors.append("initial.file is required when initial.kind = from_file")
    if not (0 <= cfg.ic_kmax < cfg.n // 2):
        errors.append(f"initial.kmax must lie in [0, {cfg.n // 2 - 1}] (got {cfg.ic_kmax})")
    if not (0 <= cfg.ic_seed < 2**64):
        errors.append(f"initial.seed must lie in [0, 2^64) (got {cfg.ic_seed})")
    if not (math.isfinite(cfg.ic_amplitude) and cfg.ic_amplitude > 0):
        errors.append(f"initial.amplitude must be > 0 (got {cfg.ic_amplitude})")
    if cfg.diag_cadence < 1:
        errors.append(f"output.diag_cadence must be >= 1 (got {cfg.diag_cadence})")
    if cfg.snapshot_cadence < 1:
        errors.append(f"output.snapshot_cadence must be >= 1 (got {cfg.snapshot_cadence})")
    if not cfg.norm_ceiling_factor > 1:
        errors.append(f"output.norm_ceiling_factor must be > 1 (got {cfg.norm_ceiling_factor})")
    return errors


def parse_config(text: str) -> SimConfig:
    """Parse and validate; raises ``ConfigError`` listing every problem found."""
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"),
        inline_comment_prefixes=None, default_section="__none__",
    )
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax error: {exc}"]) from None

    errors: list[str] = []
    values: dict = {}
    known_sections = {s for s, _ in _SCHEMA}
    for section in parser.sections():
        if section not in known_sections:
            errors.append(f"unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            spec = _SCHEMA.get((section, key))
            if spec is None:
                errors.append(f"unknown key {section}.{key}")
                continue
            attr, parse, _ = spec
            try:
                values[attr] = parse(raw)
            except ValueError as exc:
                errors.append(f"{section}.{key}: {exc}")
    for section, key in sorted(_REQUIRED):
        attr = _SCHEMA[(section, key)][0]
        if attr not in values and not any(f"{section}.{key}:" in e for e in errors):
            errors.append(f"missing required key {section}.{key}")
    if errors:
        raise ConfigError(errors)
    cfg = SimConfig(**values)
    errors = validate(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def emit_config(cfg: SimConfig) -> str:
    attr_to_key = {attr: (sec, key, emit) for (sec, key), (attr, _, emit) in _SCHEMA.items()}
    sections: dict[str, list[str]] = {}
    for f in fields(cfg):
        sec, key, emit = attr_to_key[f.name]
        sections.setdefault(sec, []).append(f"{key} = {emit(getattr(cfg, f.name))}")
    return "\n".join(f"[{sec}]\n" + "\n".join(lines) + "\n" for sec, lines in sections.items())


def load_config(path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())

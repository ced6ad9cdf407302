import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tqg.config import (
    ConfigError,
    FieldSpec,
    SimConfig,
    emit_config,
    load_config,
    parse_config,
    parse_field_spec,
)

MINIMAL = "[grid]\nn = 32\n[time]\nt_end = 0.5\n"


class TestFieldSpec:
    def test_forms(self):
        assert parse_field_spec("zero") == FieldSpec()
        assert parse_field_spec(" single_mode(1, -2, 0.5, 0.1) ") == FieldSpec(
            "single_mode", 1, -2, 0.5, 0.1)
        assert parse_field_spec("from_file(data/h.tqg)") == FieldSpec("from_file", path="data/h.tqg")

    @pytest.mark.parametrize("text", ["", "ones", "single_mode(1, 2, 3)", "single_mode(a, 0, 1, 0)"])
    def test_rejects(self, text):
        with pytest.raises(ValueError):
            parse_field_spec(text)

    @pytest.mark.parametrize("spec", [FieldSpec(), FieldSpec("single_mode", 3, 0, 0.25, -1.5),
                                      FieldSpec("from_file", path="x.tqg")])
    def test_emit_round_trip(self, spec):
        assert parse_field_spec(spec.emit()) == spec


class TestParse:
    def test_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg == SimConfig(n=32, t_end=0.5)
        assert cfg.dt == "auto"
        assert cfg.length == 2 * math.pi

    def test_full(self):
        text = MINIMAL + (
            "[physics]\ndealias = false\nh = single_mode(1, 0, 0.5, 0.0)\n"
            "[initial]\nkind = random_bandlimited\nseed = 7\nkmax = 4\n"
            "[output]\ndiag_cadence = 10\noutput_dir = out\n")
        cfg = parse_config(text)
        assert not cfg.dealias_on
        assert cfg.h_spec.kind == "single_mode"
        assert (cfg.ic_kind, cfg.ic_seed, cfg.ic_kmax) == ("random_bandlimited", 7, 4)
        assert cfg.output_dir == "out"

    def test_all_errors_reported(self):
        text = "[grid]\nn = 15\ncolour = red\n[time]\nt_end = -1\n[bogus]\nx = 1\n"
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        errors = info.value.errors
        assert any("unknown key grid.colour" in e for e in errors)
        assert any("unknown section [bogus]" in e for e in errors)

    def test_validation_messages(self):
        text = "[grid]\nn = 15\n[time]\nt_end = -1\ncfl_target = 2\n"
        with pytest.raises(ConfigError) as info:
            parse_config(text)
        joined = "\n".join(info.value.errors)
        assert "grid.n must be even and >= 16" in joined
        assert "time.t_end" in joined
        assert "time.cfl_target" in joined

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="missing required key time.t_end"):
            parse_config("[grid]\nn = 32\n")

    def test_bad_values(self):
        with pytest.raises(ConfigError, match="grid.n"):
            parse_config("[grid]\nn = many\n[time]\nt_end = 1\n")
        with pytest.raises(ConfigError, match="physics.dealias"):
            parse_config(MINIMAL + "[physics]\ndealias = maybe\n")
        with pytest.raises(ConfigError, match="initial.file"):
            parse_config(MINIMAL + "[initial]\nkind = from_file\n")

    def test_syntax_error(self):
        with pytest.raises(ConfigError, match="syntax"):
            parse_config("n = 32\n")

    def test_load(self, tmp_path):
        path = tmp_path / "c.ini"
        path.write_text(MINIMAL)
        assert load_config(path).n == 32


finite = st.floats(allow_nan=False, allow_infinity=False)


@st.composite
def configs(draw):
    return SimConfig(
        n=2 * draw(st.integers(8, 256)),
        t_end=draw(st.floats(0.0, 1e3)),
        length=draw(st.floats(1e-3, 1e3)),
        dt=draw(st.one_of(st.just("auto"), st.floats(1e-8, 1.0))),
        cfl_target=draw(st.floats(0.01, 0.99)),
        max_dt=draw(st.floats(1e-6, 1.0)),
        dealias_on=draw(st.booleans()),
        f_spec=draw(st.sampled_from([FieldSpec(), FieldSpec("single_mode", 1, 2, 0.3, 0.1)])),
        h_spec=FieldSpec("single_mode", draw(st.integers(-5, 5)), 0, draw(st.floats(-2, 2)), 0.0),
        ic_kind=draw(st.sampled_from(["shear", "random_bandlimited"])),
        ic_seed=draw(st.integers(0, 2**64 - 1)),
        ic_spectrum_slope=draw(st.floats(-6, 0)),
        ic_amplitude=draw(st.floats(1e-3, 1e3)),
        ic_kmax=draw(st.integers(0, 7)),
        diag_cadence=draw(st.integers(1, 1000)),
        snapshot_cadence=draw(st.integers(1, 1000)),
        norm_ceiling_factor=draw(st.floats(1.5, 1e12)),
        output_dir=draw(st.from_regex(r"[a-z][a-z0-9_/]{0,20}", fullmatch=True)),
    )


@settings(max_examples=100, deadline=None)
@given(configs())
def test_emit_parse_round_trip(cfg):
    assert parse_config(emit_config(cfg)) == cfg


def test_minimal_config_with_zero_duration():
    cfg = parse_config("[grid]\nn = 64\n[time]\nt_end = 0\n")
    assert (cfg.n, cfg.t_end, cfg.diag_cadence) == (64, 0.0, 1)

import math

import pytest

from lambdacool.config import RunConfig, dump_text, load_config, loads, split_key
from lambdacool.core import TWO_PI
from lambdacool.errors import ConfigValidationError, ParseError
from lambdacool.sweep import load_preset

MINIMAL = """
[run]
schema = 1
scheme = bare

[mech]
omega_m_hz = 300e3
quality_factor = 5e7
g0_hz = 200
bath_temperature_k = 300

[cavity_m]
kappa_hz = 240e3
input_power_w = 200e-9
"""


def test_minimal_config():
    cfg = loads(MINIMAL)
    assert isinstance(cfg, RunConfig)
    assert cfg.scheme == "bare" and cfg.observable == "cooling"
    assert cfg.values["mech"]["omega_m"] == pytest.approx(TWO_PI * 300e3)
    assert cfg.sweep is None


def test_fig8_preset_matches_caption():
    cfg = load_preset("fig8")
    mech = cfg.mechanical()
    cav = cfg.cavity_m()
    assert mech.quality_factor == 5e7
    assert mech.bath_temperature == 300.0
    assert mech.g0 == pytest.approx(TWO_PI * 200)
    assert mech.omega_m == pytest.approx(TWO_PI * 300e3)
    assert cav.input_power == 200e-9
    assert cav.kappa == pytest.approx(TWO_PI * 240e3)
    assert cfg.sweep.axis2.values()[-1] == pytest.approx(3.6e6)


def test_unit_suffixes():
    text = MINIMAL.replace("scheme = bare", "scheme = eit_feedback") + """
[cavity_a]
kappa_rad_s = 4.4e8

[eit]
n_atoms = 1e8
gamma_e_hz = 6.07e6
rabi_control_gamma_e = 6
rabi_single_atom_hz = 1e5
delta_a_gamma_e = 500

[operating]
delta_cm_tilde_omega_m = -0.5
"""
    cfg = loads(text)
    ge = TWO_PI * 6.07e6
    assert cfg.values["cavity_a"]["kappa"] == 4.4e8
    assert cfg.values["eit"]["rabi_control"] == pytest.approx(6 * ge)
    assert cfg.values["eit"]["delta_a"] == pytest.approx(500 * ge)
    assert cfg.operating()["delta_cm_tilde"] == pytest.approx(-0.5 * TWO_PI * 300e3)


def test_unknown_key_is_error():
    with pytest.raises(ConfigValidationError) as exc:
        loads(MINIMAL + "bogus = 1\n")
    assert exc.value.path == "cavity_m.bogus"


def test_unknown_section_is_error():
    with pytest.raises(ConfigValidationError):
        loads(MINIMAL + "[extra]\nx = 1\n")


def test_same_quantity_in_two_units_is_error():
    with pytest.raises(ConfigValidationError) as exc:
        loads(MINIMAL + "kappa_rad_s = 1e6\n")
    assert "kappa" in exc.value.path


def test_parse_error_reports_line():
    text = MINIMAL.replace("quality_factor = 5e7", "quality_factor = lots")
    with pytest.raises(ParseError) as exc:
        loads(text)
    lines = text.splitlines()
    assert lines[exc.value.line - 1].startswith("quality_factor")
    assert exc.value.column == len("quality_factor = ") + 1


def test_malformed_line_reports_line():
    text = MINIMAL + "this line has no equals sign\n"
    with pytest.raises(ParseError) as exc:
        loads(text)
    assert exc.value.line == len(text.splitlines())


def test_input_coupling_above_total():
    with pytest.raises(ConfigValidationError) as exc:
        loads(MINIMAL + "kappa_in_hz = 480e3\n")
    assert exc.value.path == "cavity_m.kappa_in"


def test_missing_required_key():
    with pytest.raises(ConfigValidationError) as exc:
        loads(MINIMAL.replace("g0_hz = 200\n", ""))
    assert exc.value.path == "mech.g0"


def test_schema_required():
    with pytest.raises(ConfigValidationError) as exc:
        loads(MINIMAL.replace("schema = 1", "schema = 2"))
    assert exc.value.path == "run.schema"


def test_overrides_replace_other_units():
    cfg = loads(MINIMAL, overrides={"cavity_m.kappa_rad_s": "1e6"})
    assert cfg.values["cavity_m"]["kappa"] == 1e6
    assert cfg.with_overrides({"cavity_m.kappa_hz": 1e5}).values["cavity_m"]["kappa"] == \
        pytest.approx(TWO_PI * 1e5)


def test_medium_length_and_rate_are_one_quantity():
    cfg = load_preset("fig11", {"rir.kappa_a_hz": "600e9"})
    assert cfg.rir_medium().kappa_a == pytest.approx(TWO_PI * 600e9)


def test_param_hash_tracks_values():
    a = loads(MINIMAL)
    b = loads(MINIMAL)
    c = loads(MINIMAL, overrides={"mech.quality_factor": "1e7"})
    assert a.param_hash() == b.param_hash() != c.param_hash()
    # the same value written in another unit is the same parameter set
    d = loads(MINIMAL.replace("kappa_hz = 240e3", f"kappa_rad_s = {TWO_PI * 240e3!r}"))
    assert d.param_hash() == a.param_hash()


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(MINIMAL)
    assert load_config(path).source == str(path)
    with pytest.raises(ConfigValidationError):
        load_config(tmp_path / "missing.cfg")


def test_dump_round_trip():
    cfg = loads(MINIMAL)
    again = loads(dump_text(cfg.raw))
    assert again.param_hash() == cfg.param_hash()


def test_split_key():
    assert split_key("mech", "omega_m_hz") == ("omega_m", "hz")
    assert split_key("mech", "quality_factor") == ("quality_factor", None)
    with pytest.raises(ConfigValidationError):
        split_key("mech", "omega_m")


def test_sweep_axis_validation():
    bad = MINIMAL + "[sweep]\naxis1 = mech.nonsense_hz\naxis1_start = 0\naxis1_stop = 1\naxis1_n = 3\n"
    with pytest.raises(ConfigValidationError) as exc:
        loads(bad)
    assert exc.value.path == "sweep.axis1"
    log = MINIMAL + ("[sweep]\naxis1 = cavity_m.kappa_hz\naxis1_start = 1e3\naxis1_stop = 1e5\n"
                     "axis1_n = 3\naxis1_scale = log\n")
    values = loads(log).sweep.axis1.values()
    assert values[1] == pytest.approx(1e4)
    assert math.isclose(values[0], 1e3)

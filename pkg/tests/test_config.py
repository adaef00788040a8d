import math

import pytest

from combsense.config import (
    REFERENCE_CONFIG,
    ConfigError,
    dump_config,
    load_config,
    parse_config,
    parse_number,
)


def test_empty_text_gives_reference_defaults(default_cfg):
    c = default_cfg
    assert c.grid.resolution == 1.25e6
    assert c.pm.beta0 == pytest.approx(7.25 * math.pi)
    assert c.mzm.beta1 == pytest.approx(0.3 * math.pi)
    assert c.receiver.adc_bits == 12
    assert c.k_use == 21 and c.threshold == -88.0
    assert c.compression_ratio == 10.0


def test_reference_file(ref_cfg):
    c = ref_cfg
    assert [b.carrier for b in c.stimulus.bands] == [7.52e9, 10.25e9, 19.7e9]
    assert [b.bandwidth for b in c.stimulus.bands] == [100e6, 50e6, 30e6]
    assert c.stimulus.noise_psd == -146.0 and c.stimulus.target_snr == 61.0
    assert c.mzm.drive_phase == 0.1
    assert c.receiver.lpf_cutoff == 2e9 and c.receiver.adc_rate == 4e9


def test_unknown_key_is_named():
    with pytest.raises(ConfigError) as exc:
        parse_config("mzm.beta2 = 1")
    assert exc.value.key == "mzm.beta2"
    assert "mzm.beta2" in str(exc.value)


def test_unknown_band_field():
    with pytest.raises(ConfigError, match="band.a.colour"):
        parse_config("band.a.carrier = 5 GHz\nband.a.colour = red")


def test_off_grid_carrier():
    with pytest.raises(ConfigError, match="carrier not on analysis grid"):
        parse_config("band.1.carrier = 7.5201 GHz\nband.1.bandwidth = 100 MHz")


def test_angle_forms_agree():
    a = parse_config("mzm.beta1_pi_units = 0.5")
    b = parse_config(f"mzm.beta1 = {0.5 * math.pi!r}")
    assert a.mzm.beta1 == b.mzm.beta1


def test_angle_given_twice():
    with pytest.raises(ConfigError, match="mzm.bias"):
        parse_config("mzm.bias = 0.5\nmzm.bias_pi_units = 0.2")


def test_duplicate_key():
    with pytest.raises(ConfigError, match="duplicate key"):
        parse_config("oracle.seed = 1\noracle.seed = 2")


def test_malformed_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("oracle.seed = 1\njust words")


def test_bad_value_is_named():
    with pytest.raises(ConfigError, match="receiver.adc_bits"):
        parse_config("receiver.adc_bits = 3.5")
    with pytest.raises(ConfigError, match="reconstruction.solver"):
        parse_config("reconstruction.solver = lasso")


def test_exhaustive_bound():
    with pytest.raises(ConfigError, match="exhaustive search bound exceeded"):
        parse_config("reconstruction.solver = exhaustive\nreconstruction.max_support = 4")


def test_k_use_coverage():
    with pytest.raises(ConfigError, match="matrix.k_use"):
        parse_config("matrix.k_use = 10")


@pytest.mark.parametrize(
    "text, value",
    [("2 GHz", 2e9), ("100 MHz", 1e8), ("-146 dBm/Hz", -146.0), ("1e-9 s", 1e-9),
     ("4 GSa/s", 4e9), ("12", 12.0), ("inf", math.inf), ("0.8 us", 0.8e-6)],
)
def test_suffixes(text, value):
    assert parse_number(text) == pytest.approx(value)


def test_unknown_unit():
    with pytest.raises(ValueError, match="unknown unit"):
        parse_number("3 furlongs")


def test_dump_round_trip(ref_cfg):
    text = dump_config(ref_cfg)
    again = parse_config(text)
    assert again == ref_cfg
    assert dump_config(again) == text


def test_noise_off_and_ideal_adc():
    c = parse_config("stimulus.noise_psd_dbm_hz = off\nstimulus.signal_power_dbm = 0\nreceiver.adc_bits = ideal")
    assert not c.stimulus.noise_enabled and c.receiver.adc_bits is None


def test_seed_override(ref_cfg):
    c = ref_cfg.with_seed(5)
    assert c.stimulus.noise_seed == 5 and c.oracle.seed == 5 and c.sweep.seed == 5
    assert [b.bit_seed for b in c.stimulus.bands] == [6, 7, 8]


def test_quantization_toggle(ref_cfg):
    assert ref_cfg.with_quantization(False).receiver.adc_bits is None
    assert ref_cfg.with_quantization(False).with_quantization(True).receiver.adc_bits == 12


def test_load_path(tmp_path):
    p = tmp_path / "x.cfg"
    p.write_text("# comment only\n\noracle.trials = 3  # trailing\n")
    assert load_config(p).oracle.trials == 3
    assert load_config(REFERENCE_CONFIG).solver == "exhaustive"

import math

import numpy as np
import pytest
import yaml

from clockspin.config import ConfigError, RunConfig, parse_grid, parse_quantity, parse_vector


@pytest.mark.parametrize("text,kind,value", [
    ("528 MHz", "frequency", 528e6),
    ("2.49655 GHz", "frequency", 2.49655e9),
    ("-155 uT", "field", -155e-6),
    ("-155 µT", "field", -155e-6),
    ("0.2 mT", "field", 2e-4),
    ("1e-3 T", "field", 1e-3),
    ("10.3 ms", "time", 10.3e-3),
    ("0.387 nm", "length", 0.387e-9),
    ("2.095 MHz/T", "gyromagnetic", 2.095e6),
    ("2.095 kHz/mT", "gyromagnetic", 2.095e6),
])
def test_units_convert_to_si(text, kind, value):
    assert parse_quantity(text, kind) == pytest.approx(value, rel=1e-15)


def test_missing_or_wrong_units_are_rejected():
    with pytest.raises(ConfigError, match="explicit unit"):
        parse_quantity(528.0, "frequency", "spin_system.ground.A")
    with pytest.raises(ConfigError, match="not a frequency unit"):
        parse_quantity("155 uT", "frequency")
    with pytest.raises(ConfigError, match="cannot parse"):
        parse_quantity("MHz 528", "frequency")
    with pytest.raises(ConfigError, match="cannot parse"):
        parse_quantity("528", "frequency")
    with pytest.raises(ConfigError, match="where.x"):
        parse_quantity(True, "field", "where.x")


def test_vector_and_grid_parsing():
    assert np.allclose(parse_vector(["1 uT", "2 uT", "-3 mT"], "field", "b"), [1e-6, 2e-6, -3e-3])
    with pytest.raises(ConfigError, match="3 entries"):
        parse_vector(["1 uT"], "field", "b")
    g = parse_grid({"start": "-300 uT", "stop": "300 uT", "steps": 7}, "field", "s")
    assert np.allclose(g.values(), np.linspace(-3e-4, 3e-4, 7))
    with pytest.raises(ConfigError, match="empty sweep"):
        parse_grid({"start": "0 uT", "stop": "300 uT", "steps": 0}, "field", "s")
    with pytest.raises(ConfigError, match="empty sweep range"):
        parse_grid({"start": "5 uT", "stop": "5 uT", "steps": 10}, "field", "s")
    with pytest.raises(ConfigError, match="steps"):
        parse_grid({"start": "0 uT", "stop": "1 uT", "steps": 2.5}, "field", "s")


def test_default_config_builds_every_block(default_config):
    s = default_config.spin_system()
    assert s.A_ground.principal_values[2] == pytest.approx(3679.55e6)
    assert default_config.transition() == ("ground", (2, 4))
    assert np.allclose(default_config.bias(), [0, 155e-6, 0])
    assert len(default_config.nuclei()) == 6
    m = default_config.model()
    assert m["t2_zero"] == pytest.approx(10.3e-3) and m["kappa"] == pytest.approx(1.48e6)
    assert default_config.output()["format"] == "both"


def test_digest_is_stable_and_content_sensitive(default_config):
    text = yaml.safe_dump(default_config.data, sort_keys=False)
    again = RunConfig.from_text(text)
    assert again.digest == default_config.digest
    # key order does not matter
    reordered = RunConfig(dict(reversed(list(default_config.data.items()))))
    assert reordered.digest == default_config.digest
    changed = RunConfig.from_text(text.replace("155 uT", "156 uT"))
    assert changed.digest != default_config.digest


def test_structural_errors_are_reported():
    with pytest.raises(ConfigError, match="top level"):
        RunConfig.from_text("- a\n- b\n")
    with pytest.raises(ConfigError, match="invalid YAML"):
        RunConfig.from_text("a: [1, 2\n")
    with pytest.raises(ConfigError, match="spin_system"):
        RunConfig.from_text("bias: [0 T, 0 T, 0 T]\n").spin_system()
    with pytest.raises(ConfigError, match="transition.pair"):
        RunConfig({"transition": {"pair": [4, 2]}}).transition()
    with pytest.raises(ConfigError, match="sweeps.rabi"):
        RunConfig({"sweeps": {}}).sweep("rabi")
    with pytest.raises(ConfigError, match="cannot read"):
        RunConfig.load("/nonexistent/config.yaml")


def test_nuclei_forms():
    cfg = RunConfig({"nuclei": {"gamma": "2.095 MHz/T", "shells": [
        {"distance": "0.4 nm", "theta_deg": 90, "phi_deg": 0},
        {"position": ["0 nm", "0.5 nm", "0 nm"]},
        {"a": "1 kHz", "b": "2 kHz"},
    ]}})
    n = cfg.nuclei()
    assert np.allclose(n[0].position, [0.4e-9, 0, 0], atol=1e-20)
    assert np.allclose(n[1].position, [0, 0.5e-9, 0])
    assert n[2].couplings == (1e3, 2e3)
    with pytest.raises(ConfigError, match="shells\\[0\\]"):
        RunConfig({"nuclei": {"shells": [{"foo": 1}]}}).nuclei()
    with pytest.raises(ConfigError, match="shells\\[0\\]"):
        RunConfig({"nuclei": {"shells": [{"distance": "0.01 nm"}]}}).nuclei()


def test_nonfinite_rejected():
    with pytest.raises(ConfigError):
        parse_quantity("1e400 MHz", "frequency")
    assert math.isfinite(parse_quantity("1e300 Hz", "frequency"))

import csv
import io
import json

import numpy as np
import pytest
import yaml

from clockspin.cli import EXIT_CONFIG, EXIT_INPUT, EXIT_NONCONVERGED, csv_text, main, write_atomic
from clockspin.fitting import stretched_exponential, t2_law


def write_config(path, default_config, edit=None):
    data = yaml.safe_load(yaml.safe_dump(default_config.data))
    if edit:
        edit(data)
    path.write_text(yaml.safe_dump(data, sort_keys=False), encoding="utf-8")
    return path


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


def test_levels_output_is_byte_stable(tmp_path, capsys):
    assert main(["levels", "--out", str(tmp_path / "a")]) == 0
    assert main(["levels", "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "levels.csv").read_bytes()
    assert a == (tmp_path / "b" / "levels.csv").read_bytes()
    assert b"\r\n" not in a
    rows = read_csv(tmp_path / "a" / "levels.csv")
    assert rows[0][:3] == ["k", "l", "frequency_Hz"]
    f24 = [float(r[2]) for r in rows[1:] if r[:2] == ["2", "4"]][0]
    assert abs(f24 - 2496.55e6) <= 1e6
    assert "2496.5500" in capsys.readouterr().out
    meta = read_json(tmp_path / "a" / "levels.json")
    assert meta["command"] == "levels" and len(meta["config_digest"]) == 64
    assert meta["summary"]["degenerate_levels"] == []


def test_isotropic_config_reports_degeneracy(tmp_path, default_config, capsys):
    def iso(d):
        d["spin_system"]["ground"]["A"] = {"principal_values": ["1 GHz", "1 GHz", "1 GHz"]}
    cfg = write_config(tmp_path / "iso.yaml", default_config, iso)
    assert main(["levels", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    summary = read_json(tmp_path / "levels.json")["summary"]
    assert summary["degenerate_levels"] == [[2, 3, 4]]
    assert len(summary["distinct_frequencies_Hz"]) == 1
    assert "degenerate levels" in capsys.readouterr().out


def test_missing_tensor_is_a_config_error(tmp_path, default_config, capsys):
    cfg = write_config(tmp_path / "c.yaml", default_config, lambda d: d["spin_system"]["ground"].pop("A"))
    assert main(["levels", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "spin_system.ground.A" in capsys.readouterr().err


def test_malformed_and_unitless_configs(tmp_path, default_config, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("spin_system: [1, 2\n", encoding="utf-8")
    assert main(["levels", "--config", str(bad)]) == EXIT_CONFIG

    def unitless(d):
        d["spin_system"]["ground"]["A"]["principal_values"] = [-1313.55, 2369.55, 3679.55]
    cfg = write_config(tmp_path / "u.yaml", default_config, unitless)
    assert main(["levels", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "explicit unit" in capsys.readouterr().err


def test_empty_sweep_is_a_usage_error(tmp_path, default_config, capsys):
    def empty(d):
        d["sweeps"]["map_echo"]["field"]["steps"] = 0
    cfg = write_config(tmp_path / "e.yaml", default_config, empty)
    assert main(["map-echo", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "empty sweep" in capsys.readouterr().err
    assert not (tmp_path / "echo_map.csv").exists()


def test_map_s1_reports_minimum_angle(tmp_path, default_config):
    def small(d):
        for k in ("axis1", "axis2"):
            d["sweeps"]["s1_map"][k]["steps"] = 9
    cfg = write_config(tmp_path / "s.yaml", default_config, small)
    assert main(["map-s1", "--config", str(cfg), "--out", str(tmp_path), "--threads", "2"]) == 0
    meta = read_json(tmp_path / "s1_map.json")
    assert abs(meta["summary"]["min_angle_deg"] - 55.9) <= 0.5
    rows = read_csv(tmp_path / "s1_map.csv")
    assert rows[0] == ["B_D1_T", "B_D2_T", "S1_Hz_per_T"] and len(rows) == 82
    # row-major, first axis fastest
    assert float(rows[1][1]) == float(rows[2][1]) and float(rows[1][0]) < float(rows[2][0])


def test_zefoz_recovers_synthetic_bias(tmp_path, default_config):
    bias = [30.0, -40.0, 12.0]

    def synth(d):
        d["bias"] = [f"{v} uT" for v in bias]
        d["sweeps"]["zefoz"]["restarts"] = 3
    cfg = write_config(tmp_path / "z.yaml", default_config, synth)
    assert main(["zefoz", "--config", str(cfg), "--out", str(tmp_path), "--seed", "3"]) == 0
    s = read_json(tmp_path / "zefoz.json")["summary"]
    assert np.allclose(np.array(s["recovered_bias_T"]) * 1e6, bias, atol=0.1)
    assert np.linalg.norm(s["total_field_T"]) < 0.1e-6
    assert s["converged"]


def test_zefoz_reports_nonconvergence(tmp_path, default_config):
    # the zero-gradient point (-155 uT applied) lies outside a 50 uT search box
    def tight(d):
        d["sweeps"]["zefoz"]["restarts"] = 2
        d["sweeps"]["zefoz"]["bounds"] = "50 uT"
        d["sweeps"]["zefoz"]["initial"] = ["0 uT", "0 uT", "0 uT"]
    cfg = write_config(tmp_path / "z.yaml", default_config, tight)
    assert main(["zefoz", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_NONCONVERGED


def test_rabi_and_eseem_commands(tmp_path):
    assert main(["rabi", "--out", str(tmp_path)]) == 0
    s = read_json(tmp_path / "rabi.json")["summary"]
    assert s["contrast_per_period"][0] > s["contrast_per_period"][-1]
    assert main(["eseem", "--out", str(tmp_path), "--format", "json"]) == 0
    s = read_json(tmp_path / "eseem.json")["summary"]
    assert s["larmor_period_s"] == pytest.approx(1 / (np.hypot(248e-6, 65e-6) * 2.095e6), rel=1e-9)
    assert not (tmp_path / "eseem.csv").exists()


def test_format_flag_selects_outputs(tmp_path):
    assert main(["levels", "--out", str(tmp_path / "c"), "--format", "csv"]) == 0
    assert sorted(p.name for p in (tmp_path / "c").iterdir()) == ["levels.csv"]
    assert main(["levels", "--out", str(tmp_path / "j"), "--format", "json"]) == 0
    assert sorted(p.name for p in (tmp_path / "j").iterdir()) == ["levels.json"]


def synthetic_decay(path, seed=1, n=60, header=("tau_s", "amplitude")):
    rng = np.random.default_rng(seed)
    tau = np.linspace(0, 20e-3, n)
    y = stretched_exponential(tau, 1.0, 8e-3, 1.3) + 0.01 * rng.standard_normal(n)
    path.write_text(csv_text(header, zip(tau, y)), encoding="utf-8")
    return tau, y


def test_fit_stretched_recovers_parameters(tmp_path):
    src = tmp_path / "decay.csv"
    synthetic_decay(src)
    assert main(["fit", "stretched", "--input", str(src), "--out", str(tmp_path)]) == 0
    rep = read_json(tmp_path / "fit_stretched.json")
    p = rep["summary"]["parameters"]
    assert p["T2_s"] == pytest.approx(8e-3, rel=0.05)
    assert p["m"] == pytest.approx(1.3, rel=0.1)
    assert rep["summary"]["input"]["digest"]
    res = read_csv(tmp_path / "fit_stretched_residuals.csv")
    assert res[0] == ["tau_s", "amplitude", "model", "residual"] and len(res) == 61


def test_fit_digest_is_stable(tmp_path):
    src = tmp_path / "decay.csv"
    synthetic_decay(src)
    main(["fit", "stretched", "--input", str(src), "--out", str(tmp_path / "a")])
    main(["fit", "stretched", "--input", str(src), "--out", str(tmp_path / "b")])
    a = (tmp_path / "a" / "fit_stretched.json").read_bytes()
    assert a == (tmp_path / "b" / "fit_stretched.json").read_bytes()


def test_fit_t2_law_recovers_generating_constants(tmp_path):
    b = np.unique(np.r_[np.linspace(-300e-6, -30e-6, 10), np.arange(-20e-6, 50.1e-6, 2e-6),
                        np.linspace(60e-6, 400e-6, 12)])
    rng = np.random.default_rng(8)
    t2 = t2_law(b, 10.3e-3, 1.48e6, 14.1e-6) * (1 + 0.05 * rng.standard_normal(b.size))
    src = tmp_path / "t2.csv"
    # fields in uT and times in ms, mapped back to SI with scale flags
    src.write_text(csv_text(["field_uT", "t2_ms"], zip(b * 1e6, t2 * 1e3)), encoding="utf-8")
    args = ["fit", "t2field", "--input", str(src), "--out", str(tmp_path), "--x-col", "field_uT",
            "--y-col", "t2_ms", "--x-scale", "1e-6", "--y-scale", "1e-3"]
    assert main(args) == 0
    p = read_json(tmp_path / "fit_t2field.json")["summary"]["parameters"]
    assert p["kappa_Hz_per_T"] == pytest.approx(1.48e6, rel=0.1)
    assert p["t2_zero_s"] == pytest.approx(10.3e-3, rel=0.1)
    assert p["b0_T"] == pytest.approx(14.1e-6, rel=0.1)


def test_short_decay_file_is_rejected(tmp_path, capsys):
    src = tmp_path / "short.csv"
    src.write_text("tau_s,amplitude\n0,1\n0.001,0.8\n0.002,0.6\n", encoding="utf-8")
    assert main(["fit", "stretched", "--input", str(src), "--out", str(tmp_path)]) == EXIT_INPUT
    assert "at least 5" in capsys.readouterr().err


def test_bad_line_is_named(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    src.write_text("tau_s,amplitude\n0,1\n0.001,0.8\n0.002,abc\n", encoding="utf-8")
    assert main(["fit", "stretched", "--input", str(src), "--out", str(tmp_path)]) == EXIT_INPUT
    assert f"{src}:4" in capsys.readouterr().err
    assert main(["fit", "stretched", "--input", str(src), "--y-col", "nope"]) == EXIT_INPUT
    assert "missing column" in capsys.readouterr().err


def test_exported_curve_round_trips_through_fit(tmp_path):
    src = tmp_path / "decay.csv"
    synthetic_decay(src)
    assert main(["fit", "stretched", "--input", str(src), "--out", str(tmp_path / "one")]) == 0
    # re-import the exported residual table, which carries the same data columns
    exported = tmp_path / "one" / "fit_stretched_residuals.csv"
    assert main(["fit", "stretched", "--input", str(exported), "--out", str(tmp_path / "two")]) == 0
    a = read_json(tmp_path / "one" / "fit_stretched.json")["summary"]
    b = read_json(tmp_path / "two" / "fit_stretched.json")["summary"]
    assert a["parameters"] == b["parameters"] and a["covariance"] == b["covariance"]


def test_writes_are_atomic(tmp_path, monkeypatch):
    target = tmp_path / "x.csv"
    write_atomic(target, "old\n")

    def boom(*a, **k):
        raise OSError("disk full")
    monkeypatch.setattr("os.replace", boom)
    with pytest.raises(OSError):
        write_atomic(target, "new\n")
    assert target.read_text() == "old\n"
    assert [p.name for p in tmp_path.iterdir()] == ["x.csv"]


def test_csv_uses_round_trip_floats():
    text = csv_text(["a"], [(0.1 + 0.2,)])
    assert float(list(csv.reader(io.StringIO(text)))[1][0]) == 0.1 + 0.2


def test_invalid_threads(tmp_path):
    assert main(["levels", "--threads", "0", "--out", str(tmp_path)]) == EXIT_CONFIG

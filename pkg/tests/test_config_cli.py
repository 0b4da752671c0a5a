"""Strict config parsing and the command line front end, run in process."""

import json
import math
import os

import numpy as np
import pytest

from diracband import config as cfg
from diracband.cli import main

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")
GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


def config_path(name):
    return os.path.join(CONFIG_DIR, name)


def write_config(tmp_path, payload):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# raw JSON layer
# ---------------------------------------------------------------------------

def test_loads_rejects_duplicates_and_nonfinite():
    with pytest.raises(cfg.ConfigError, match="duplicate key"):
        cfg.loads('{"a": 1, "a": 2}')
    with pytest.raises(cfg.ConfigError, match="non-finite"):
        cfg.loads('{"a": NaN}')
    with pytest.raises(cfg.ConfigError, match="non-finite"):
        cfg.loads('{"a": Infinity}')
    with pytest.raises(cfg.ConfigError, match="top level"):
        cfg.loads('[1, 2]')
    with pytest.raises(cfg.ConfigError, match="invalid JSON"):
        cfg.loads('{"a": ')


def test_canonical_dumps_is_idempotent():
    text = '{"b": [1, 2.5], "a": {"y": true, "x": "1/3"}}'
    once = cfg.canonical_dumps(cfg.loads(text))
    again = cfg.canonical_dumps(cfg.loads(once))
    assert once == again
    assert once.endswith("\n")
    assert once.index('"a"') < once.index('"b"')


# ---------------------------------------------------------------------------
# domain parsing
# ---------------------------------------------------------------------------

def test_lattice_block_accepts_rationals():
    lat = cfg.build_lattice(
        {"basis": [["1", "0", "0"], [0, 1, 0], [0, 0, "1/2"]]}, "/lattice")
    assert lat.basis[2, 2] == 0.5
    with pytest.raises(cfg.ConfigError) as err:
        cfg.build_lattice({"basis": [["1", "0"], ["0", "1/0"]]}, "/lattice")
    assert err.value.path == "/lattice/basis/1/1"
    with pytest.raises(cfg.ConfigError, match="exactly one"):
        cfg.build_lattice({"cubic": 3, "basis": [[1]]}, "/lattice")


def test_unknown_keys_carry_json_pointers():
    raw = cfg.load_file(config_path("free_bands.json"))
    raw["bands"]["stray"] = 1
    with pytest.raises(cfg.ConfigError) as err:
        cfg.parse_bands(raw)
    assert err.value.path == "/bands/stray"
    assert str(err.value) == "/bands/stray: unknown key"

    raw = cfg.load_file(config_path("free_bands.json"))
    raw["extra"] = {}
    with pytest.raises(cfg.ConfigError) as err:
        cfg.parse_bands(raw)
    assert err.value.path == "/extra"


def test_measure_block_validation():
    with pytest.raises(cfg.ConfigError) as err:
        cfg.build_measure({"kind": "dirac", "h1": 1.0}, "/measure")
    assert err.value.path == "/measure/h1"
    with pytest.raises(cfg.ConfigError, match="needs 'h1'"):
        cfg.build_measure({"kind": "plateau", "h": 0.5}, "/measure")
    with pytest.raises(cfg.ConfigError) as err:
        cfg.build_measure({"kind": "plateau", "h": 0.5, "h1": 0.5}, "/measure")
    assert err.value.path == "/measure/h1"
    spec = cfg.build_measure({"kind": "plateau", "h": 0.5, "h1": 1.5},
                             "/measure")
    assert (spec.h, spec.h1) == (0.5, 1.5)


def test_potential_block_errors(tmp_path):
    raw = cfg.load_file(config_path("thomas_documented.json"))
    raw["potential"]["V0"]["modes"][0]["value"] = [[0] * 4] * 4
    with pytest.raises(cfg.ConfigError, match="exactly one of 'value' or"):
        cfg.parse_verify_thomas(raw)

    raw = cfg.load_file(config_path("condition.json"))
    raw["potential"]["A"]["modes"].append(
        {"coeffs": [0, 1, 0], "value": [0.0, 0.0, 0.0]})
    with pytest.raises(cfg.ConfigError) as err:
        cfg.parse_check_condition(raw)
    assert err.value.path.endswith("/coeffs")
    assert "duplicate mode" in err.value.message

    raw = cfg.load_file(config_path("condition.json"))
    raw["condition"]["gamma"] = [0, 0, 0]
    with pytest.raises(cfg.ConfigError, match="gamma must be nonzero"):
        cfg.parse_check_condition(raw)


def test_complex_entries_parse_as_pairs():
    raw = cfg.load_file(config_path("gauge_bound.json"))
    parsed = cfg.parse_gauge_bound(raw)
    val = parsed["A"].coeffs[(0, 1, 0)]
    assert val[1] == 0.02 + 0.01j and val[2] == -0.03j


def test_find_gamma_mode_exclusivity():
    base = {"lattice": {"cubic": 3}}
    with pytest.raises(cfg.ConfigError, match="exactly one of 'search'"):
        cfg.parse_find_gamma(dict(base))
    both = dict(base)
    both["search"] = {"atoms": [], "h": 0.1, "R0": 2.0}
    both["pipeline"] = {"q": 1.0, "h": 0.1, "h1": 1.0, "R0_list": [2.0]}
    with pytest.raises(cfg.ConfigError, match="exactly one of 'search'"):
        cfg.parse_find_gamma(both)
    unused = dict(base)
    unused["search"] = {"atoms": [], "h": 0.1, "R0": 2.0}
    unused["potential"] = {}
    with pytest.raises(cfg.ConfigError) as err:
        cfg.parse_find_gamma(unused)
    assert err.value.path == "/potential"


def test_weighted_mode_cross_constraints():
    raw = cfg.load_file(config_path("weighted_floor.json"))
    raw["weighted"]["delta"] = 0.5
    with pytest.raises(cfg.ConfigError, match="only used in split mode"):
        cfg.parse_verify_weighted(raw)

    raw = cfg.load_file(config_path("weighted_split.json"))
    del raw["measure"]
    with pytest.raises(cfg.ConfigError, match="needs a 'measure' block"):
        cfg.parse_verify_weighted(raw)

    raw = cfg.load_file(config_path("weighted_split.json"))
    raw["weighted"]["beta"] = 99.0
    with pytest.raises(cfg.ConfigError, match="must exceed beta"):
        cfg.parse_verify_weighted(raw)


def test_kernel_defaults():
    parsed = cfg.parse_kernel_constant({})
    assert parsed["tau_lo"] == math.pi
    assert parsed["tau_hi"] == 2.0 * math.pi
    assert parsed["cross_check"] is True


# ---------------------------------------------------------------------------
# command line, in process
# ---------------------------------------------------------------------------

def test_cli_bands_artifacts(tmp_path):
    out = tmp_path / "out"
    code = main(["bands", "--config", config_path("free_bands.json"),
                 "--out", str(out)])
    assert code == 0
    report = json.loads((out / "bands.json").read_text())
    assert report["command"] == "bands"
    assert report["suspect_flat_bands"] == []
    csv_lines = (out / "bands.csv").read_text().splitlines()
    assert csv_lines[0].startswith("xi,E_1,")
    assert len(csv_lines) == 21  # header + one row per sample


def test_cli_find_gamma_matches_golden(tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["find-gamma", "--config", config_path("find_gamma_atoms.json"),
                 "--out", str(out)])
    assert code == 0
    golden = open(os.path.join(GOLDEN_DIR, "find_gamma_atoms.json"),
                  encoding="utf-8").read()
    assert (out / "find-gamma.json").read_text() == golden
    # without --out the same JSON goes to stdout
    capsys.readouterr()
    assert main(["find-gamma", "--config",
                 config_path("find_gamma_atoms.json")]) == 0
    assert capsys.readouterr().out == golden


def test_cli_thomas_runs_are_byte_identical(tmp_path):
    path = write_config(tmp_path, {
        "lattice": {"cubic": 3},
        "potential": {"A": {"real": True, "modes": [
            {"coeffs": [0, 1, 0], "value": [0.0, 0.0, 0.05]},
            {"coeffs": [0, -1, 0], "value": [0.0, 0.0, 0.05]},
        ]}},
        "measure": {"kind": "dirac"},
        "thomas": {"gamma": [1, 0, 0], "theta": 0.5, "kappas": [4.0],
                   "k_points_per_axis": 2, "cutoff": 9.4,
                   "sphere_samples": 256, "probe_count": 200},
    })
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert main(["verify-thomas", "--config", path,
                     "--out", str(out)]) == 0
        outs.append({name: (out / name).read_bytes()
                     for name in ("verify-thomas.json", "margins.csv")})
    assert outs[0] == outs[1]
    report = json.loads(outs[0]["verify-thomas.json"])
    assert report["holds"] and report["probe"]["consistent"]


def test_cli_kernel_constant(tmp_path, capsys):
    path = write_config(tmp_path, {"kernel": {"cross_check": False}})
    assert main(["kernel-constant", "--config", path]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["command"] == "kernel-constant"
    assert report["constant"] == pytest.approx(1.7058460118707472, abs=1e-6)


def test_cli_failing_check_exits_two(tmp_path):
    path = write_config(tmp_path, {
        "lattice": {"cubic": 3},
        "potential": {"A": {"real": True, "modes": [
            {"coeffs": [0, 1, 0], "value": [0.0, 0.0, 5.0]},
            {"coeffs": [0, -1, 0], "value": [0.0, 0.0, 5.0]},
        ]}},
        "measure": {"kind": "dirac"},
        "condition": {"gamma": [1, 0, 0], "sphere_samples": 128,
                      "scan_grid": 8, "refine_grid": 16},
    })
    out = tmp_path / "out"
    code = main(["check-condition", "--config", path, "--out", str(out)])
    assert code == 2
    report = json.loads((out / "check-condition.json").read_text())
    assert report["passes"] is False  # report still written on failure


def test_cli_config_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"lattice": {"cubic": 3}}', encoding="utf-8")
    assert main(["bands", "--config", str(bad)]) == 1
    assert "config error at /" in capsys.readouterr().err

    assert main(["bands", "--config", str(tmp_path / "missing.json")]) == 1
    assert "cannot read config" in capsys.readouterr().err


def test_cli_runtime_errors_exit_one(tmp_path, capsys):
    # theta passes static range checks but collides with the measured bracket
    path = write_config(tmp_path, {
        "lattice": {"cubic": 3},
        "potential": {"A": {"real": True, "modes": [
            {"coeffs": [0, 1, 0], "value": [0.0, 0.0, 0.9]},
            {"coeffs": [0, -1, 0], "value": [0.0, 0.0, 0.9]},
        ]}},
        "measure": {"kind": "dirac"},
        "thomas": {"gamma": [1, 0, 0], "theta": 0.5, "kappas": [4.0],
                   "k_points_per_axis": 1, "cutoff": 9.4,
                   "sphere_samples": 128},
    })
    assert main(["verify-thomas", "--config", path]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_usage_errors_exit_one(capsys):
    for argv in ([], ["no-such-command"],
                 ["bands", "--config", "x.json", "--threads", "0"]):
        with pytest.raises(SystemExit) as err:
            main(argv)
        assert err.value.code == 1
        capsys.readouterr()

import json

import numpy as np
import polars as pl
import pytest

from plasmon.errors import ConfigError, InadmissibleConfig
from plasmon.tasks.config import (
    RunConfig,
    apply_environment,
    apply_flags,
    load_run_config,
    parse_run_config,
    resolve_run_config,
)
from plasmon.tasks.export import export_spectrum, to_jsonable, write_json
from plasmon.tasks.spectrum import spectrum_table
from plasmon.utils import ORDER_LIMIT, atomic_output

FULL = {
    "medium": {"radius": 1, "omega": 5, "eps_m": 1, "mu_m": 1, "eps_c": {"re": -1.04018, "im": 4e-5}, "mu_c": 1},
    "incident": {"kind": "plane_wave", "amplitude": [[4, 0], [-4, 0], [0, 0]], "direction": [1, 1, 0]},
    "numerics": {"n_max": 60, "delta_min": 0.02},
    "scan": {"mode": "resonance", "channel": 1, "n_range": [40, 40], "sweep": {"re_eps_c": [-1.045, -1.037, 1e-4]}},
    "output": {"format": "csv", "path": "out/spectrum.csv"},
}


def test_parse_full_config():
    run = parse_run_config(json.dumps(FULL, indent=2), source="mem")
    assert run.medium.eps_c == -1.04018 + 4e-5j
    assert run.medium.k_m == pytest.approx(5.0)
    assert run.incident.kind == "plane_wave"
    np.testing.assert_allclose(run.incident.direction, np.array([1, 1, 0]) / np.sqrt(2))
    assert run.scan.n_range == (40, 40)
    assert run.scan.axes()["re_eps_c"].size == 81
    assert run.output.path == "out/spectrum.csv"
    assert run.numerics.delta_min == 0.02
    assert run.source == "mem"


def test_complex_value_forms():
    text = json.dumps({"medium": {"eps_m": 2, "eps_c": [-2, 0.1], "mu_c": {"re": 1.5}}})
    medium = parse_run_config(text).medium
    assert medium.eps_m == 2 + 0j
    assert medium.eps_c == -2 + 0.1j
    assert medium.mu_c == 1.5 + 0j


def test_drude_material():
    text = json.dumps({"medium": {"omega": 5, "eps_c": {"drude": {"omega_p_sq": 51.0045, "tau_damp": 1e-4, "omega0": 2.0}}}})
    eps_c = parse_run_config(text).medium.eps_c
    assert eps_c.real == pytest.approx(-1.04018, rel=1e-6)
    assert eps_c.imag > 0


def test_unknown_key_reports_line():
    text = '{\n  "medium": {\n    "omega": 5,\n    "colour": 3\n  }\n}'
    with pytest.raises(ConfigError) as info:
        parse_run_config(text)
    assert info.value.line == 4
    assert "colour" in str(info.value)


def test_malformed_json_reports_line():
    text = '{\n  "medium": {\n    "omega": 5,\n  }\n}'
    with pytest.raises(ConfigError) as info:
        parse_run_config(text)
    assert info.value.line == 4


@pytest.mark.parametrize(
    "payload",
    [
        {"scan": {"sweep": {"re_eps_c": [-1.1, -1.0, 0]}}},
        {"scan": {"mode": "sideways"}},
        {"output": {"format": "parquet"}},
        {"incident": {"kind": "laser"}},
        {"incident": {"kind": "plane_wave", "amplitude": [1, 0, 0], "direction": [1, 0, 0]}},
        {"numerics": {"n_max": 2.5}},
    ],
)
def test_invalid_sections(payload):
    with pytest.raises(ConfigError):
        parse_run_config(json.dumps(payload))


def test_negative_absorption_is_inadmissible():
    with pytest.raises(InadmissibleConfig):
        parse_run_config(json.dumps({"medium": {"eps_c": {"re": -1.0, "im": -0.1}}}))


def test_precedence_environment_then_flags():
    run = parse_run_config(json.dumps({"numerics": {"n_max": 30}}))
    env = apply_environment(run, {"n_max": "12", "seed": "7", "threads": "3"})
    assert (env.numerics.n_max, env.seed, env.threads) == (12, 7, 3)
    flagged = apply_flags(env, n_max=5, out="out/table.json")
    assert flagged.numerics.n_max == 5
    assert flagged.seed == 7
    assert flagged.output.format == "json"
    with pytest.raises(ConfigError):
        apply_flags(env, n_max=0)
    with pytest.raises(ConfigError, match="PLASMON_ORDER_LIMIT"):
        apply_flags(env, n_max=ORDER_LIMIT - 1)
    assert apply_flags(env, n_max=ORDER_LIMIT - 2).numerics.n_max == ORDER_LIMIT - 2
    with pytest.raises(ConfigError):
        apply_flags(apply_environment(run, {"delta_min": "0.001"}))
    with pytest.raises(ConfigError):
        apply_environment(run, {"n_max": "many"})


def test_resolve_reads_file_and_environment(write_config, monkeypatch):
    monkeypatch.setenv("PLASMON_SEED", "9")
    path = write_config({"medium": {"omega": 2}})
    run = resolve_run_config(path, n_max=3)
    assert run.medium.omega == 2.0
    assert run.numerics.n_max == 3
    assert run.seed == 9
    assert isinstance(load_run_config(None), RunConfig)
    with pytest.raises(ConfigError):
        load_run_config(path.with_name("missing.json"))


def test_to_jsonable():
    out = to_jsonable({"a": 1 + 2j, "b": float("nan"), "c": np.array([1.0, np.inf]), "d": np.int64(3), "e": (np.bool_(True),)})
    assert out == {"a": {"re": 1.0, "im": 2.0}, "b": None, "c": [1.0, None], "d": 3, "e": [True]}


def test_csv_roundtrip_is_exact(tmp_path, resonance_cfg):
    table = spectrum_table(resonance_cfg, 6)
    path = export_spectrum(table, tmp_path / "spectrum.csv")
    back = pl.read_csv(path)
    df = table.to_frame()
    assert back.columns == df.columns
    for col in df.columns:
        assert back[col].to_list() == df[col].to_list()
    assert [p.name for p in tmp_path.iterdir()] == ["spectrum.csv"]


def test_spectrum_json(tmp_path, resonance_cfg):
    table = spectrum_table(resonance_cfg, 3)
    path = export_spectrum(table, tmp_path / "spectrum.json", fmt="json")
    payload = json.loads(path.read_text())
    assert payload["n_max"] == 3
    assert payload["config_hash"] == resonance_cfg.fingerprint()
    first = payload["records"][0]
    assert first["n"] == 1
    assert set(first["tau"][0]) == {"re", "im"}
    assert "consistent" in first["closed_form_discrepancy"]


def test_atomic_output_discards_partial_files(tmp_path):
    target = tmp_path / "report.json"
    with pytest.raises(RuntimeError):
        with atomic_output(target) as tmp:
            tmp.write_text("mezzo file")
            raise RuntimeError("interrotto")
    assert list(tmp_path.iterdir()) == []
    write_json({"ok": 1 + 0j}, target)
    assert json.loads(target.read_text()) == {"ok": {"re": 1.0, "im": 0.0}}


def test_numerics_thresholds_from_file(write_config):
    path = write_config({"numerics": {"delta_min": 0.1, "theta_big": 50, "theta_small": 0.001}})
    numerics = resolve_run_config(path).numerics
    assert (numerics.delta_min, numerics.theta_big, numerics.theta_small) == (0.1, 50.0, 0.001)

import json

import polars as pl
import pytest

from plasmon.flows.run_verify import reference_solutions
from plasmon.main import EXIT_CONFIG, EXIT_OK, EXIT_PHYSICS, EXIT_VERIFY, main

pytestmark = pytest.mark.usefixtures("prefect_harness")

RESONANCE = {
    "medium": {"radius": 1, "omega": 5, "eps_m": 1, "mu_m": 1, "eps_c": {"re": -1.04018, "im": 4e-5}, "mu_c": 1},
}


def test_spectrum_single_degree(write_config, tmp_path):
    path = write_config(RESONANCE)
    out = tmp_path / "spectrum.csv"
    assert main(["spectrum", "--config", str(path), "--n-max", "1", "--out", str(out)]) == EXIT_OK
    df = pl.read_csv(out)
    assert df.height == 1
    assert df["n"].to_list() == [1]


def test_spectrum_rerun_is_byte_identical(write_config, tmp_path):
    path = write_config(RESONANCE)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (first, second):
        assert main(["spectrum", "--config", str(path), "--n-max", "8", "--out", str(out)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_spectrum_json_output(write_config, tmp_path):
    path = write_config(RESONANCE)
    out = tmp_path / "spectrum.json"
    assert main(["spectrum", "--config", str(path), "--n-max", "2", "--out", str(out)]) == EXIT_OK
    assert len(json.loads(out.read_text())["records"]) == 2


def test_malformed_config_exits_with_config_code(write_config, tmp_path):
    path = write_config('{\n  "medium": {\n    "omega": 5,\n  }\n}')
    out = tmp_path / "spectrum.csv"
    assert main(["spectrum", "--config", str(path), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_unknown_key_exits_with_config_code(write_config, tmp_path):
    path = write_config({"medium": {"omega": 5, "shape": "cube"}})
    assert main(["spectrum", "--config", str(path), "--out", str(tmp_path / "s.csv")]) == EXIT_CONFIG


def test_inadmissible_medium_exits_with_physics_code(write_config, tmp_path):
    path = write_config({"medium": {"eps_c": {"re": -1.0, "im": -0.5}}})
    out = tmp_path / "spectrum.csv"
    assert main(["spectrum", "--config", str(path), "--out", str(out)]) == EXIT_PHYSICS
    assert not out.exists()


def test_drude_commands(tmp_path):
    assert main(["drude", "--forward", "--preset", "resonance_1"]) == EXIT_OK
    out = tmp_path / "drude.json"
    assert main(["drude", "--inverse", "--eps-c=-1.04018,0.00004", "--out", str(out)]) == EXIT_OK
    params = json.loads(out.read_text())["params"]
    assert params["omega_p_sq"] == pytest.approx(51.0045, rel=1e-5)
    assert main(["drude", "--inverse"]) == EXIT_CONFIG
    assert main(["drude", "--inverse", "--eps-c=3,0"]) == EXIT_PHYSICS


def test_scatter_needs_incident(write_config, tmp_path):
    path = write_config(RESONANCE)
    assert main(["scatter", "--config", str(path), "--out", str(tmp_path / "g.csv")]) == EXIT_CONFIG


def test_resonance_scan(write_config, tmp_path):
    path = write_config({**RESONANCE, "scan": {"n_range": [40, 40], "sweep": {"re_eps_c": [-1.042, -1.039, 1e-3]}}})
    out = tmp_path / "scan.json"
    assert main(["scan", "--config", str(path), "--mode", "resonance", "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["kind"] == "resonance"
    assert len(report["points"]) == 4
    assert report["points"][0]["n_star"] == 40
    assert abs(report["points"][0]["params"]["re_eps_c"] + 1.04018) < 2e-3


def test_verify_detects_injected_fault(tmp_path):
    out = tmp_path / "verify.json"
    assert main(["verify", "--level", "quick", "--inject-fault", "--out", str(out)]) == EXIT_VERIFY
    report = json.loads(out.read_text())
    assert report["passed"] is False
    assert any(c["identity"] == "wronskian" and not c["passed"] for c in report["checks"])


@pytest.mark.slow
def test_verify_quick_passes(tmp_path):
    out = tmp_path / "verify.json"
    assert main(["verify", "--level", "quick", "--out", str(out)]) == EXIT_OK


@pytest.mark.slow
def test_reference_solutions_pass_on_both_configs():
    checks = reference_solutions(threads=2)
    by_config: dict[str, set[str]] = {}
    for c in checks:
        by_config.setdefault(c["case"]["config"], set()).add(c["identity"])
    expected = {"transmission_E", "transmission_H", "radiation_decay"}
    assert by_config == {"resonance": expected, "cloaking": expected}
    failed = [(c["case"]["config"], c["identity"], c.get("oracle", c.get("error"))) for c in checks if not c["passed"]]
    assert failed == []

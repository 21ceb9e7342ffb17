import json

import pytest
from prefect.testing.utilities import prefect_test_harness

from plasmon.tasks.spectrum import MediumConfig, cloaking_reference, resonance_reference


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: quadrature pesante (oracoli, soluzioni complete)")


@pytest.fixture(scope="session")
def prefect_harness():
    with prefect_test_harness():
        yield


@pytest.fixture
def resonance_cfg() -> MediumConfig:
    return resonance_reference()


@pytest.fixture
def cloaking_cfg() -> MediumConfig:
    return cloaking_reference()


@pytest.fixture
def identical_cfg() -> MediumConfig:
    return MediumConfig(R=1.0, eps_m=1.0, mu_m=1.0, eps_c=1.0, mu_c=1.0, omega=5.0)


@pytest.fixture
def write_config(tmp_path):
    """Scrive un RunConfig (dict o testo) e restituisce il path."""

    def _write(payload, name: str = "run.json"):
        path = tmp_path / name
        text = payload if isinstance(payload, str) else json.dumps(payload, indent=2)
        path.write_text(text, encoding="utf-8")
        return path

    return _write

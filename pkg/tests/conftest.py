"""Shared pytest fixtures and configuration."""

from pathlib import Path
from typing import Any

import numpy as np
import pytest
import yaml

from wlan_mab.config import ExperimentConfig, ScenarioConfig, parse_config
from wlan_mab.engine import build_link_model
from wlan_mab.links import LinkTable, build_link_table
from wlan_mab.presets import toy_scenario_path
from wlan_mab.rng import RandomStreams
from wlan_mab.scenario import Deployment


@pytest.fixture
def fixtures_dir() -> Path:
    """Return path to test fixture files."""
    return Path(__file__).parent / "fixtures"


@pytest.fixture
def load_fixture(fixtures_dir):
    """Load a YAML fixture file."""

    def _load(filename: str) -> dict[str, Any]:
        with (fixtures_dir / filename).open() as f:
            return yaml.safe_load(f)

    return _load


@pytest.fixture
def rng() -> np.random.Generator:
    """Fixed-seed generator."""
    return np.random.default_rng(0)


@pytest.fixture
def toy_path() -> Path:
    """Packaged two-AP, two-STA scenario file."""
    return toy_scenario_path()


@pytest.fixture
def toy_deployment(toy_path) -> Deployment:
    """Toy deployment."""
    return Deployment.from_yaml(toy_path)


@pytest.fixture
def toy_links(toy_deployment) -> LinkTable:
    """Link table of the toy scenario."""
    model = build_link_model(toy_deployment, ScenarioConfig(), RandomStreams(0))
    return build_link_table(model, np.asarray(toy_deployment.sta_positions))


@pytest.fixture
def toy_loads(toy_deployment) -> np.ndarray:
    """Toy per-STA loads in Mb/s."""
    return np.asarray(toy_deployment.sta_loads, dtype=float)


@pytest.fixture
def toy_channels(toy_deployment) -> np.ndarray:
    """Toy channel plan."""
    return np.asarray(toy_deployment.ap_channels)


@pytest.fixture
def small_config() -> ExperimentConfig:
    """Small generated scenario that runs in well under a second."""
    return parse_config(
        {
            "name": "small",
            "scenario": {
                "deployment": {"n_aps": 4, "n_stas": 12, "cluster_size": 4, "area": [40, 40]},
                "load": {"mode": "variable", "mean_load": 4},
            },
            "rounds": 20,
            "seeds": [0, 1, 2],
        }
    )


@pytest.fixture(autouse=True)
def setup_test_environment(tmp_path, monkeypatch):
    """Run every test from a scratch directory with no output root set."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("WLAN_MAB_OUTPUT_ROOT", raising=False)

    yield

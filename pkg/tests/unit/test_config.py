"""Tests for configuration parsing and overrides."""

from pathlib import Path

import pytest

from wlan_mab.agents import AgentConfig
from wlan_mab.base import PolicyType
from wlan_mab.config import (
    ExperimentConfig,
    PolicySpec,
    StaOverride,
    known_keys,
    parse_config,
    parse_override,
    set_dotted,
    suggest_key,
)
from wlan_mab.errors import ConfigError
from wlan_mab.yaml_io import load_yaml


class TestParseConfig:
    """Test building an experiment configuration."""

    def test_defaults(self):
        """Test an empty source gives the reference experiment."""
        config = parse_config()
        assert config.rounds == 240
        assert config.seed_list() == list(range(100))
        assert [p.name for p in config.policies] == ["ss", "eps_greedy", "eps_sticky"]
        assert config.scenario.deployment.n_aps == 16
        assert config.scenario.deployment.n_stas == 64
        assert config.scenario.phy.sensitivity_dbm == -82.0

    def test_from_file(self, fixtures_dir):
        """Test reading a YAML file."""
        config = parse_config(fixtures_dir / "experiments" / "small.yaml")
        assert config.name == "small"
        assert config.seed_list() == [0, 1, 2]
        assert config.scenario.deployment.n_stas == 12
        assert config.scenario.load.mode == "variable"

    def test_relative_deployment_file(self, fixtures_dir):
        """Test scenario files are resolved against the config's directory."""
        config = parse_config(fixtures_dir / "experiments" / "toy.yaml")
        path = Path(config.scenario.deployment_file)
        assert path.is_absolute()
        assert path.is_file()
        assert config.policy("eps_sticky").agent.epsilon == 0.3

    def test_from_mapping(self):
        """Test an already parsed mapping is accepted and deep-merged with defaults."""
        config = parse_config({"scenario": {"deployment": {"n_stas": 32}}})
        assert config.scenario.deployment.n_stas == 32
        assert config.scenario.deployment.n_aps == 16

    def test_overrides(self):
        """Test dotted overrides, including list indices."""
        config = parse_config(overrides=["rounds=10", "policies.2.agent.epsilon=0.2", "scenario.load.mode=variable"])
        assert config.rounds == 10
        assert config.policies[2].agent.epsilon == 0.2
        assert config.scenario.load.mode == "variable"

    def test_mapping_overrides(self):
        """Test overrides given as a mapping."""
        config = parse_config(overrides={"seeds": [4, 2], "scenario.mobility.enabled": True})
        assert config.seed_list() == [2, 4]
        assert config.scenario.mobility.enabled is True

    def test_unknown_key_suggestion(self, fixtures_dir):
        """Test a misspelt key names the key and a correction."""
        with pytest.raises(ConfigError, match=r"scenario\.deployment\.n_ap: unknown key \(did you mean 'n_aps'\?\)"):
            parse_config(fixtures_dir / "experiments" / "typo.yaml")

    def test_invalid_value(self):
        """Test a value outside its range is reported with its key."""
        with pytest.raises(ConfigError, match="policies.0.agent.epsilon"):
            parse_config(overrides=["policies.0.agent.epsilon=1.5"])

    def test_missing_file(self, tmp_path):
        """Test an unreadable file is a configuration error."""
        with pytest.raises(ConfigError, match="Cannot read config"):
            parse_config(tmp_path / "absent.yaml")

    def test_malformed_yaml(self, tmp_path):
        """Test a syntax error is a configuration error."""
        path = tmp_path / "bad.yaml"
        path.write_text("rounds: [1, 2\n")
        with pytest.raises(ConfigError, match="Cannot parse config"):
            parse_config(path)

    def test_not_a_mapping(self, tmp_path):
        """Test the top level must be a mapping."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping"):
            parse_config(path)

    def test_missing_rate_table(self):
        """Test a configured rate table is checked up front."""
        with pytest.raises(ConfigError, match="rate table"):
            parse_config(overrides=["scenario.phy.rate_table_path=/nonexistent/rates.csv"])

    def test_mobility_needs_clusters(self):
        """Test mobility with uniform STAs is rejected."""
        with pytest.raises(ConfigError, match="clustered"):
            parse_config(
                overrides={
                    "scenario.deployment.sta_placement": "uniform",
                    "scenario.mobility": {"enabled": True, "theta": 0.1},
                }
            )

    def test_resolved_yaml_round_trip(self):
        """Test the resolved config parses back to the same config."""
        config = parse_config(overrides=["rounds=12", "name=echo"])
        assert parse_config(load_yaml(config.model_dump_yaml())) == config


class TestExperimentConfig:
    """Test experiment-level validation."""

    def test_seed_range(self):
        """Test seeds default to a contiguous range."""
        assert ExperimentConfig(base_seed=5, seed_count=3).seed_list() == [5, 6, 7]

    @pytest.mark.parametrize("seeds", [[], [-1], [1, 1]])
    def test_invalid_seeds(self, seeds):
        """Test seeds are non-empty, non-negative and unique."""
        with pytest.raises(ValueError):
            ExperimentConfig(seeds=seeds)

    def test_duplicate_policy_names(self):
        """Test policy names must be unique."""
        with pytest.raises(ValueError, match="duplicate"):
            ExperimentConfig(policies=[PolicySpec(name="a"), PolicySpec(name="a")])

    def test_unknown_policy(self):
        """Test asking for an unknown policy."""
        with pytest.raises(ConfigError):
            ExperimentConfig().policy("nope")

    def test_simulation_view(self):
        """Test the single-policy view carries the shared settings."""
        config = ExperimentConfig(rounds=7, master_seed=3)
        simulation = config.simulation(config.policies[0])
        assert (simulation.rounds, simulation.master_seed) == (7, 3)
        assert simulation.scenario == config.scenario


class TestPolicySpec:
    """Test per-STA policy resolution."""

    def test_everyone_runs_the_agent(self, rng):
        """Test the default fraction gives every STA the agent."""
        configs, mask = PolicySpec(name="p", agent=AgentConfig(epsilon=0.2)).resolve(5, rng)
        assert mask.all()
        assert all(cfg.epsilon == 0.2 for cfg in configs)

    def test_fraction(self, rng):
        """Test a partial fraction with the others on strongest signal."""
        configs, mask = PolicySpec(name="p", agent_fraction=0.25).resolve(8, rng)
        assert mask.sum() == 2
        assert sum(cfg.policy == PolicyType.SS for cfg in configs) == 6

    def test_override(self, rng):
        """Test a per-STA override wins."""
        spec = PolicySpec(
            name="p",
            agent_fraction=0.0,
            overrides=[StaOverride(sta=1, agent=AgentConfig(policy=PolicyType.EPS_STICKY))],
        )
        configs, mask = spec.resolve(3, rng)
        assert mask.tolist() == [False, True, False]
        assert configs[1].policy == PolicyType.EPS_STICKY

    def test_override_out_of_range(self, rng):
        """Test overriding a STA that does not exist."""
        spec = PolicySpec(name="p", overrides=[StaOverride(sta=9, agent=AgentConfig())])
        with pytest.raises(ConfigError):
            spec.resolve(3, rng)


class TestOverrideHelpers:
    """Test dotted keys and suggestions."""

    def test_parse_override(self):
        """Test values are read as YAML."""
        assert parse_override("rounds=10") == ("rounds", 10)
        assert parse_override("seeds=[1, 2]") == ("seeds", [1, 2])
        assert parse_override("name=") == ("name", None)

    @pytest.mark.parametrize("text", ["rounds", "=3"])
    def test_bad_override(self, text):
        """Test overrides must be key=value."""
        with pytest.raises(ConfigError):
            parse_override(text)

    def test_set_dotted(self):
        """Test nested mappings are created on the way."""
        data = {"a": [{"b": 1}]}
        set_dotted(data, "a.0.b", 2)
        set_dotted(data, "c.d", 3)
        assert data == {"a": [{"b": 2}], "c": {"d": 3}}

    @pytest.mark.parametrize("key", ["a.5.b", "a..b", "a.0.b.c"])
    def test_set_dotted_errors(self, key):
        """Test bad indices, empty parts and scalars in the path."""
        with pytest.raises(ConfigError):
            set_dotted({"a": [{"b": 1}]}, key, 0)

    def test_suggest_key(self):
        """Test close misspellings are matched."""
        assert suggest_key("epsilom") == "epsilon"
        assert suggest_key("zzzzzz") is None
        assert {"sticky_max", "theta", "rate_table_path"} <= known_keys()

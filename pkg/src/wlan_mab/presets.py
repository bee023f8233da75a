"""Named experiments comparing the selection policies."""

from collections.abc import Callable, Iterable
from importlib import resources
from pathlib import Path
from typing import Any, NamedTuple, Optional, Union

from .config import ExperimentConfig, parse_config
from .errors import ConfigError
from .metrics import ExperimentReport
from .runner import run_experiment

SS = {"name": "ss", "agent": {"policy": "ss"}}
EPS_GREEDY = {"name": "eps_greedy", "agent": {"policy": "eps_greedy", "epsilon": 0.05}}
EPS_STICKY = {"name": "eps_sticky", "agent": {"policy": "eps_sticky", "epsilon": 0.1, "sticky_max": 2}}
BASELINE = [SS, EPS_GREEDY, EPS_STICKY]
# stationary layouts explore at the same rate with both bandit policies
STATIONARY = [SS, {"name": "eps_greedy", "agent": {"policy": "eps_greedy", "epsilon": 0.1}}, EPS_STICKY]

VARIABLE_LOAD = {"mode": "variable", "mean_load": 4}


def toy_scenario_path() -> Path:
    """Packaged two-AP, two-STA scenario."""
    return Path(str(resources.files("wlan_mab") / "data" / "toy.yaml"))


class Preset(NamedTuple):
    description: str
    build: Callable[[], dict[str, Any]]


def _scenario(**kwargs: Any) -> dict[str, Any]:
    return {key: value for key, value in kwargs.items() if value is not None}


def _toy() -> dict[str, Any]:
    return {
        "name": "toy",
        "scenario": {"deployment_file": str(toy_scenario_path())},
        "policies": [
            SS,
            {"name": "eps_greedy", "agent": {"policy": "eps_greedy", "epsilon": 0.3}},
            {"name": "eps_sticky", "agent": {"policy": "eps_sticky", "epsilon": 0.3, "sticky_max": 2}},
        ],
        "rounds": 12,
        "seed_count": 10,
        "enumerate_associations": True,
    }


def _layout(name: str, ap_placement: str, sta_placement: str) -> Callable[[], dict[str, Any]]:
    def build() -> dict[str, Any]:
        deployment = {"ap_placement": ap_placement, "sta_placement": sta_placement}
        return {"name": name, "scenario": {"deployment": deployment}, "policies": STATIONARY}

    return build


def _sta_count(n_stas: int) -> Callable[[], dict[str, Any]]:
    # same aggregate demand of 256 Mb/s spread over more or fewer STAs
    def build() -> dict[str, Any]:
        scenario = {"deployment": {"n_stas": n_stas}, "load": {"mean_load": 256 / n_stas}}
        return {"name": f"sta-count-{n_stas}", "scenario": scenario, "policies": BASELINE}

    return build


def _bonding(bandwidth: int) -> Callable[[], dict[str, Any]]:
    def build() -> dict[str, Any]:
        name = f"bonding-{bandwidth}"
        return {"name": name, "scenario": {"bandwidth": bandwidth}, "policies": BASELINE}

    return build


def _variable_load() -> dict[str, Any]:
    return {"name": "variable-load", "scenario": {"load": VARIABLE_LOAD}, "policies": BASELINE}


def _epsilon_sweep(policy: str) -> Callable[[], dict[str, Any]]:
    def build() -> dict[str, Any]:
        policies: list[dict[str, Any]] = [SS]
        for epsilon in (0.05, 0.1, 0.25, 0.5, 0.75):
            policies.append({"name": f"{policy}_{epsilon}", "agent": {"policy": policy, "epsilon": epsilon}})
        policies.append(
            {
                "name": f"{policy}_decreasing",
                "agent": {"policy": policy, "epsilon": 1.0, "epsilon_schedule": "decreasing"},
            }
        )
        suffix = "" if policy == "eps_greedy" else "-sticky"
        return {"name": f"epsilon-sweep{suffix}", "scenario": {"load": VARIABLE_LOAD}, "policies": policies}

    return build


def _reward_strategies() -> dict[str, Any]:
    policies: list[dict[str, Any]] = [SS]
    for base in (EPS_GREEDY, EPS_STICKY):
        variants: list[tuple[str, dict[str, Any]]] = [
            ("average", {"reward_strategy": "average"}),
            ("weighted", {"reward_strategy": "weighted"}),
        ]
        variants += [(f"window{n}", {"reward_strategy": "window", "window": n}) for n in (10, 20, 30, 50)]
        for label, agent in variants:
            policies.append({"name": f"{base['name']}_{label}", "agent": {**base["agent"], **agent}})
    return {"name": "reward-strategies", "scenario": {"load": VARIABLE_LOAD}, "policies": policies}


def _sticky_counter() -> dict[str, Any]:
    policies: list[dict[str, Any]] = [SS]
    for sc in (1, 2, 4, 6, 10):
        policies.append({"name": f"eps_sticky_sc{sc}", "agent": {**EPS_STICKY["agent"], "sticky_max": sc}})
    return {"name": "sticky-counter", "scenario": {"load": VARIABLE_LOAD}, "policies": policies}


def _agent_fraction() -> dict[str, Any]:
    policies: list[dict[str, Any]] = [SS]
    for base in (EPS_GREEDY, EPS_STICKY):
        for percent in (20, 50, 80, 100):
            fraction = percent / 100
            policies.append({"name": f"{base['name']}_{percent}", "agent": base["agent"], "agent_fraction": fraction})
    return {"name": "agent-fraction", "scenario": {"load": VARIABLE_LOAD}, "policies": policies}


def _arrivals() -> dict[str, Any]:
    scenario = {"load": VARIABLE_LOAD, "arrival_window": 60}
    return {"name": "arrivals", "scenario": scenario, "policies": BASELINE}


def _mobility(moves_per_round: int, name: str) -> Callable[[], dict[str, Any]]:
    def build() -> dict[str, Any]:
        mobility = {"enabled": moves_per_round > 0, "theta": moves_per_round / 64}
        return {"name": name, "scenario": {"load": VARIABLE_LOAD, "mobility": mobility}, "policies": BASELINE}

    return build


def _load_aware(name: str, variable: bool, theta: Optional[float]) -> Callable[[], dict[str, Any]]:
    def build() -> dict[str, Any]:
        policies = list(BASELINE)
        for rho in (0.015, 0.03, 0.06):
            policies.append({"name": f"load_aware_{rho}", "agent": {"policy": "load_aware", "rho": rho}})
        scenario = _scenario(
            load=VARIABLE_LOAD if variable else None,
            mobility={"enabled": True, "theta": theta} if theta else None,
        )
        return {"name": name, "scenario": scenario, "policies": policies}

    return build


PRESETS: dict[str, Preset] = {
    "toy": Preset("Two APs, two STAs: association table and short policy runs", _toy),
    "grid-clusters": Preset(
        "16 grid APs, 64 clustered STAs, 4 Mb/s", _layout("grid-clusters", "grid", "clustered")
    ),
    "grid-uniform": Preset(
        "16 grid APs, 64 uniform STAs, 4 Mb/s", _layout("grid-uniform", "grid", "uniform")
    ),
    "random-clusters": Preset(
        "16 random APs, 64 clustered STAs, 4 Mb/s", _layout("random-clusters", "random", "clustered")
    ),
    "random-uniform": Preset(
        "16 random APs, 64 uniform STAs, 4 Mb/s", _layout("random-uniform", "random", "uniform")
    ),
    **{
        f"sta-count-{n}": Preset(f"{n} STAs sharing 256 Mb/s of demand", _sta_count(n))
        for n in (32, 64, 128)
    },
    "bonding-20": Preset("20 MHz channels", _bonding(20)),
    "bonding-40": Preset("40 MHz channels", _bonding(40)),
    "bonding-80": Preset("80 MHz channels", _bonding(80)),
    "variable-load": Preset("Loads uniform on 1..7 Mb/s every round", _variable_load),
    "epsilon-sweep": Preset("ε-greedy exploration rates, variable load", _epsilon_sweep("eps_greedy")),
    "epsilon-sweep-sticky": Preset("ε-sticky exploration rates, variable load", _epsilon_sweep("eps_sticky")),
    "reward-strategies": Preset("Average, weighted and window rewards", _reward_strategies),
    "sticky-counter": Preset("ε-sticky with SC in 1..10", _sticky_counter),
    "agent-fraction": Preset("20 to 100 percent of STAs run the agent", _agent_fraction),
    "arrivals": Preset("STAs arrive over the first 60 rounds", _arrivals),
    "mobility": Preset("Two moves per round on average", _mobility(2, "mobility")),
    **{
        f"mobility-sweep-{k}": Preset(
            f"{k} moves per round on average", _mobility(k, f"mobility-sweep-{k}")
        )
        for k in (0, 1, 2, 4, 8)
    },
    "load-aware": Preset("Load-aware baseline, static load", _load_aware("load-aware", False, None)),
    "load-aware-variable": Preset(
        "Load-aware baseline, variable load", _load_aware("load-aware-variable", True, None)
    ),
    "load-aware-mobility": Preset(
        "Load-aware baseline, variable load and 12.5 percent mobility",
        _load_aware("load-aware-mobility", True, 0.125),
    ),
}

# figure-numbered names kept as aliases; multi-panel figures point at their first panel
ALIASES: dict[str, str] = {
    "fig4-grid-clusters": "grid-clusters",
    "fig6-bonding": "bonding-20",
    "fig9-epsilon-sweep": "epsilon-sweep",
    "fig12-agent-fraction": "agent-fraction",
    "fig13-arrivals": "arrivals",
    "fig14-mobility": "mobility",
    "fig17-load-aware": "load-aware",
}


def list_presets() -> list[str]:
    return sorted(PRESETS)


def resolve_preset(name: str) -> str:
    """Canonical preset name of ``name`` or one of its aliases."""
    canonical = ALIASES.get(name, name)
    if canonical not in PRESETS:
        available = ", ".join([*list_presets(), *sorted(ALIASES)])
        raise ConfigError(f"Unknown preset {name!r}; available presets: {available}")
    return canonical


def get_preset(name: str, overrides: Iterable[str] = ()) -> ExperimentConfig:
    """Resolved configuration of a preset, with optional ``key=value`` overrides."""
    return parse_config(PRESETS[resolve_preset(name)].build(), overrides)


def run_preset(
    name: str,
    overrides: Iterable[str] = (),
    output: Optional[Union[str, Path]] = None,
    parallelism: Optional[int] = None,
) -> ExperimentReport:
    """Run a preset and write its report when an output root is given."""
    report, _ = run_experiment(get_preset(name, overrides), output, parallelism)
    return report

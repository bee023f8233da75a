"""Association rounds: decisions, channel occupancy, throughput and rewards."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .agents import SATISFIED_TOLERANCE, AgentConfig, AgentState, decide, maybe_reset, observe
from .base import APId, Fraction, Mbps, PolicyType, STAId
from .config import ScenarioConfig, SimulationConfig
from .errors import ConfigError, ContractViolation
from .links import LinkModel, LinkTable, build_link_table, rebuild_rows
from .phy import sample_shadowing
from .rng import Purpose, RandomStreams
from .scenario import Deployment, apply_mobility, generate_deployment, sample_arrivals, sample_round_loads

logger = logging.getLogger(__name__)

INACTIVE = -1


@dataclass
class RoundOutcome:
    """Occupancy and throughput of one association vector."""

    airtime: np.ndarray
    occupancy: np.ndarray
    throughput: np.ndarray
    normalized: np.ndarray

    @property
    def served_airtime(self) -> np.ndarray:
        """Airtime each STA actually gets once its AP shares the channel."""
        return self.airtime * np.where(self.normalized > 0, self.normalized, 0.0)


@dataclass
class RoundRecord:
    """Everything observed in one association round.

    Per-STA arrays are indexed by STA id; ``association`` is -1 for STAs
    that are not active yet. Per-AP arrays are indexed by AP id.
    """

    round: int
    association: np.ndarray
    load: np.ndarray
    throughput: np.ndarray
    normalized: np.ndarray
    satisfied: np.ndarray
    reassociated: np.ndarray
    active: np.ndarray
    fallback: np.ndarray
    raw_occupancy: np.ndarray
    offered_load: np.ndarray

    @property
    def n_stas(self) -> int:
        return len(self.association)


@dataclass
class SimulationResult:
    """Trace and final state of one seeded simulation."""

    seed: int
    trace: list[RoundRecord]
    agent_states: list[AgentState]
    agent_mask: np.ndarray
    deployment: Deployment
    links: LinkTable = field(repr=False)


def _check_associations(associations: np.ndarray, links: LinkTable) -> np.ndarray:
    assoc = np.asarray(associations, dtype=int)
    if assoc.shape != (links.n_stas,):
        raise ContractViolation(f"Expected {links.n_stas} associations, got shape {assoc.shape}")
    if np.any(assoc >= links.n_aps) or np.any(assoc < INACTIVE):
        raise ContractViolation("Association refers to an unknown AP")
    return assoc


def required_airtimes(associations: np.ndarray, loads: np.ndarray, links: LinkTable) -> np.ndarray:
    """Required airtime of each STA on its serving AP; zero when inactive."""
    assoc = _check_associations(associations, links)
    active = assoc >= 0
    airtime = np.zeros(links.n_stas)
    stas = np.flatnonzero(active)
    airtime[stas] = np.asarray(loads, dtype=float)[stas] * 1e6 / links.l_frame * links.cost[stas, assoc[stas]]
    return airtime


def occupancy_members(associations: np.ndarray, links: LinkTable, channels: np.ndarray) -> np.ndarray:
    """``members[i, j]``: STA i counts toward AP j's channel occupancy."""
    assoc = _check_associations(associations, links)
    channel_plan = np.asarray(channels)
    active = assoc >= 0
    serving_channel = np.where(active, channel_plan[np.where(active, assoc, 0)], -1)
    own = (assoc[:, None] == np.arange(links.n_aps)[None, :]) & active[:, None]
    co_channel = (serving_channel[:, None] == channel_plan[None, :]) & links.in_range & active[:, None]
    return own | co_channel


def raw_occupancies(
    associations: np.ndarray, loads: np.ndarray, links: LinkTable, channels: np.ndarray
) -> np.ndarray:
    """Uncapped channel occupancy observed by every AP."""
    airtime = required_airtimes(associations, loads, links)
    members = occupancy_members(associations, links, channels)
    return np.asarray(members.T.astype(float) @ airtime)


def raw_occupancy(
    ap: APId, associations: np.ndarray, loads: np.ndarray, link_table: LinkTable, channel_plan: np.ndarray
) -> Fraction:
    """Uncapped channel occupancy observed by ``ap``."""
    if not 0 <= ap < link_table.n_aps:
        raise ContractViolation(f"Unknown AP {ap}")
    return float(raw_occupancies(associations, loads, link_table, channel_plan)[ap])


def evaluate(associations: np.ndarray, loads: np.ndarray, links: LinkTable, channels: np.ndarray) -> RoundOutcome:
    """Throughput of every active STA for an association vector."""
    assoc = _check_associations(associations, links)
    airtime = required_airtimes(assoc, loads, links)
    occupancy = np.asarray(occupancy_members(assoc, links, channels).T.astype(float) @ airtime)
    active = assoc >= 0
    normalized = np.zeros(links.n_stas)
    normalized[active] = 1.0 / np.maximum(1.0, occupancy[assoc[active]])
    throughput = np.where(active, np.asarray(loads, dtype=float) * normalized, 0.0)
    return RoundOutcome(airtime=airtime, occupancy=occupancy, throughput=throughput, normalized=normalized)


def sta_throughput(
    sta: STAId, associations: np.ndarray, loads: np.ndarray, link_table: LinkTable, channel_plan: np.ndarray
) -> tuple[Mbps, Fraction]:
    """Received throughput in Mb/s and its share of the request."""
    assoc = _check_associations(associations, link_table)
    if not 0 <= sta < link_table.n_stas or assoc[sta] < 0:
        raise ContractViolation(f"STA {sta} is not active")
    outcome = evaluate(assoc, loads, link_table, channel_plan)
    return float(outcome.throughput[sta]), float(outcome.normalized[sta])


def load_deployment(scenario: ScenarioConfig, streams: RandomStreams) -> Deployment:
    """Fixed scenario file, or a fresh deployment from the placement stream."""
    if scenario.deployment_file is not None:
        return Deployment.from_yaml(scenario.deployment_file)
    return generate_deployment(
        scenario.deployment,
        int(scenario.bandwidth),
        scenario.channel_mode,
        streams.generator(Purpose.PLACEMENT),
        scenario.reuse_factor,
    )


def build_link_model(deployment: Deployment, scenario: ScenarioConfig, streams: RandomStreams) -> LinkModel:
    """Static link inputs of a deployment, shadowing drawn once per seed."""
    phy = scenario.phy
    shadow = sample_shadowing(
        streams.generator(Purpose.SHADOWING), phy.path_loss, size=(deployment.n_stas, deployment.n_aps)
    )
    return LinkModel(
        ap_positions=np.asarray(deployment.ap_positions, dtype=float).reshape(-1, 2),
        shadow=np.asarray(shadow, dtype=float),
        path_loss=phy.path_loss,
        timing=phy.timing,
        rate_table=phy.rate_table(deployment.bandwidth),
        tx_power=phy.tx_power_dbm,
        sensitivity=phy.sensitivity_dbm,
        overrides={(o.sta, o.ap): o for o in deployment.link_overrides},
    )


class Simulation:
    """State of one seeded simulation, advanced one round at a time."""

    def __init__(self, config: SimulationConfig, seed: int, deployment: Optional[Deployment] = None) -> None:
        self.config = config
        self.seed = seed
        self.streams = RandomStreams(seed, config.master_seed)
        scenario = config.scenario

        self.deployment = deployment if deployment is not None else load_deployment(scenario, self.streams)
        n_stas = self.deployment.n_stas
        self.link_model = build_link_model(self.deployment, scenario, self.streams)
        self.positions = np.asarray(self.deployment.sta_positions, dtype=float).reshape(-1, 2)
        self.centers = np.asarray(self.deployment.cluster_centers, dtype=float).reshape(-1, 2)
        self.clusters = np.asarray(self.deployment.sta_clusters or [0] * n_stas, dtype=int)
        self.links = build_link_table(self.link_model, self.positions)
        self.channels = np.asarray(self.deployment.ap_channels, dtype=int)

        if scenario.mobility.active and not self.deployment.clustered:
            raise ConfigError("Mobility needs a clustered deployment")

        arrivals = sample_arrivals(n_stas, scenario.arrival_window, self.streams.generator(Purpose.ARRIVALS))
        self.arrival_round = np.asarray(arrivals.arrival_round, dtype=int)
        self.agent_configs: list[AgentConfig]
        self.agent_configs, self.agent_mask = config.policy.resolve(
            n_stas, self.streams.generator(Purpose.ASSIGNMENT)
        )
        self.agent_states = [AgentState() for _ in range(n_stas)]
        self.agent_rngs: Sequence[np.random.Generator] = self.streams.per_sta(Purpose.AGENTS, n_stas)
        self._load_rng = self.streams.generator(Purpose.LOADS)
        self._mobility_rng = self.streams.generator(Purpose.MOBILITY)
        self._order_rng = self.streams.generator(Purpose.ORDER)
        self._fixed_loads = (
            None if self.deployment.sta_loads is None else np.asarray(self.deployment.sta_loads, dtype=float)
        )

        self.associations = np.full(n_stas, INACTIVE, dtype=int)
        self.active = np.zeros(n_stas, dtype=bool)
        self.round = 0

    @property
    def n_stas(self) -> int:
        return self.deployment.n_stas

    @property
    def n_aps(self) -> int:
        return self.deployment.n_aps

    def _round_loads(self) -> np.ndarray:
        if self._fixed_loads is not None:
            return self._fixed_loads.copy()
        return sample_round_loads(self.config.scenario.load, self.n_stas, self._load_rng)

    def _move_stas(self) -> frozenset[int]:
        mobility = self.config.scenario.mobility
        if not mobility.active:
            return frozenset()
        step = apply_mobility(self.positions, self.centers, mobility.theta, self._mobility_rng, self.clusters)
        self.positions, self.clusters = step.positions, step.clusters
        if step.moved:
            moved = sorted(step.moved)
            rebuild_rows(self.links, self.link_model, self.positions, moved)
            for sta in moved:
                cfg = self.agent_configs[sta]
                if cfg.is_mab:
                    maybe_reset(self.agent_states[sta], self.links.visibility(sta), cfg.reset_threshold_db)
        return step.moved

    def _collect_decisions(self, loads: np.ndarray) -> np.ndarray:
        fallback = np.zeros(self.n_stas, dtype=bool)
        deferred: list[int] = []
        for sta in np.flatnonzero(self.active):
            state, cfg = self.agent_states[sta], self.agent_configs[sta]
            visibility = self.links.visibility(sta)
            if not visibility:
                choice = int(np.argmax(self.links.rssi[sta]))
                logger.debug("Seed %d round %d: STA %d sees no AP, using AP %d", self.seed, self.round, sta, choice)
                state.current_ap = choice
                state.fallback = True
                fallback[sta] = True
                self.associations[sta] = choice
            elif cfg.policy == PolicyType.LOAD_AWARE and state.current_ap in visibility:
                deferred.append(int(sta))
            else:
                self.associations[sta] = decide(state, cfg, visibility, self.agent_rngs[sta])

        if deferred:
            serving = self.associations >= 0
            ap_loads = np.bincount(self.associations[serving], weights=loads[serving], minlength=self.n_aps)
            for sta in self._order_rng.permutation(deferred):
                current = int(self.associations[sta])
                broadcast = {ap: float(ap_loads[ap]) for ap in range(self.n_aps)}
                state, cfg = self.agent_states[sta], self.agent_configs[sta]
                choice = decide(state, cfg, self.links.visibility(sta), self.agent_rngs[sta], broadcast)
                if choice != current:
                    ap_loads[current] -= loads[sta]
                    ap_loads[choice] += loads[sta]
                    self.associations[sta] = choice
        return fallback

    def run_round(self, round_index: int) -> RoundRecord:
        """Advance by one association round."""
        if round_index != self.round + 1:
            raise ContractViolation(f"Expected round {self.round + 1}, got {round_index}")
        self.round = round_index

        was_active = self.active.copy()
        self.active |= self.arrival_round <= round_index
        self._move_stas()
        loads = self._round_loads()

        previous = self.associations.copy()
        fallback = self._collect_decisions(loads)

        outcome = evaluate(self.associations, loads, self.links, self.channels)
        for sta in np.flatnonzero(self.active):
            ap, reward = int(self.associations[sta]), float(outcome.normalized[sta])
            observe(self.agent_states[sta], self.agent_configs[sta], ap, reward)

        active = self.active.copy()
        served_loads = np.where(active, loads, 0.0)
        serving = self.associations >= 0
        satisfied = active & (outcome.normalized >= 1.0 - SATISFIED_TOLERANCE)
        return RoundRecord(
            round=round_index,
            association=self.associations.copy(),
            load=served_loads,
            throughput=outcome.throughput,
            normalized=outcome.normalized,
            satisfied=satisfied,
            reassociated=was_active & active & (previous >= 0) & (self.associations != previous),
            active=active,
            fallback=fallback,
            raw_occupancy=outcome.occupancy,
            offered_load=np.bincount(self.associations[serving], weights=served_loads[serving], minlength=self.n_aps),
        )

    step = run_round

    def run(self, rounds: Optional[int] = None) -> list[RoundRecord]:
        """Run the remaining rounds and return their records."""
        total = self.config.rounds if rounds is None else rounds
        return [self.run_round(index) for index in range(self.round + 1, total + 1)]

    def result(self, trace: list[RoundRecord]) -> SimulationResult:
        return SimulationResult(
            seed=self.seed,
            trace=trace,
            agent_states=self.agent_states,
            agent_mask=self.agent_mask,
            deployment=self.deployment,
            links=self.links,
        )


def run_simulation(config: SimulationConfig, seed: int) -> SimulationResult:
    """Deterministic trace of ``config.rounds`` rounds for one seed."""
    simulation = Simulation(config, seed)
    return simulation.result(simulation.run())

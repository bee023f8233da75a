"""Per-STA AP selection policies and reward estimation.

Every decision function draws only from the generator it is given, in a
fixed order, so that a scripted generator replays a trace exactly:

* exploration coin: ``rng.random() < epsilon``
* exploration arm: ``rng.integers(len(arms))`` over the sorted visible arms
* tie break: ``rng.integers(len(ties))``, drawn only when there is a tie
"""

import math
from collections.abc import Mapping, Sequence
from typing import Optional

import numpy as np
from pydantic import Field, model_validator

from .base import APId, Dbm, EpsilonSchedule, Fraction, PolicyType, RewardStrategyType, WLANBaseModel
from .errors import ContractViolation

SATISFIED_TOLERANCE = 1e-9

MAB_POLICIES = frozenset({PolicyType.EPS_GREEDY.value, PolicyType.EPS_STICKY.value})


def is_satisfied(normalized: Fraction) -> bool:
    """A STA is satisfied when it receives its whole request."""
    return normalized >= 1.0 - SATISFIED_TOLERANCE


class ArmStats(WLANBaseModel):
    """Reward bookkeeping for one arm (one visible AP)."""

    ap_id: APId
    visit_count: int = Field(0, ge=0)
    reward_sum: float = Field(0.0, ge=0)
    reward_history: list[Fraction] = Field(default_factory=list)
    aggregate: Fraction = Field(0.0, ge=0.0, le=1.0)


class AgentConfig(WLANBaseModel):
    """Policy and reward estimation settings of one STA."""

    policy: PolicyType = PolicyType.EPS_GREEDY
    epsilon: float = Field(0.05, ge=0.0, le=1.0)
    epsilon_schedule: EpsilonSchedule = EpsilonSchedule.FIXED
    sticky_max: int = Field(2, ge=1, description="Sticky counter SC")
    reward_strategy: RewardStrategyType = RewardStrategyType.AVERAGE
    window: int = Field(10, ge=1, description="Rewards kept by the window strategy")
    rho: float = Field(0.03, ge=0.0, le=1.0, description="Reassociation probability of load-aware STAs")
    reset_threshold_db: float = Field(3.0, gt=0, description="RSSI change that counts as a new environment")

    @property
    def is_mab(self) -> bool:
        return self.policy in MAB_POLICIES

    @model_validator(mode="after")
    def validate_schedule(self) -> "AgentConfig":
        """A decreasing schedule needs a positive starting epsilon."""
        if self.epsilon_schedule == EpsilonSchedule.DECREASING and self.epsilon == 0:
            raise ValueError("decreasing epsilon schedule needs epsilon > 0 as its starting value")
        return self


class AgentState(WLANBaseModel):
    """Mutable per-STA decision state, owned by the engine."""

    arm_stats: dict[APId, ArmStats] = Field(default_factory=dict)
    current_ap: Optional[APId] = None
    sticky_counter: int = Field(0, ge=0)
    sticking: bool = False
    last_satisfied: bool = False
    steps: int = Field(0, ge=0, description="Decisions since the last reset")
    needs_scan: bool = True
    fallback: bool = False
    visibility_snapshot: dict[APId, Dbm] = Field(default_factory=dict)

    @property
    def arms(self) -> list[APId]:
        return sorted(self.arm_stats)


def _pick(options: Sequence[APId], rng: np.random.Generator) -> APId:
    if len(options) == 1:
        return options[0]
    return options[int(rng.integers(len(options)))]


def ss_decide(visibility: Mapping[APId, Dbm], rng: np.random.Generator) -> APId:
    """Strongest signal: the AP with the highest RSSI, ties uniform."""
    if not visibility:
        raise ContractViolation("ss_decide needs at least one AP")
    best = max(visibility.values())
    return _pick(sorted(ap for ap, rssi in visibility.items() if rssi == best), rng)


def exploit_choice(aggregates: Mapping[APId, float], rng: np.random.Generator) -> APId:
    """Arm with the highest aggregate reward, ties uniform."""
    best = max(aggregates.values())
    return _pick(sorted(ap for ap, value in aggregates.items() if value == best), rng)


def effective_epsilon(config: AgentConfig, steps: int) -> float:
    """Exploration rate for the ``steps``-th decision since the last reset."""
    if config.epsilon_schedule == EpsilonSchedule.DECREASING:
        return config.epsilon / math.sqrt(max(steps, 1))
    return config.epsilon


def eps_greedy_decide(state: AgentState, epsilon: float, rng: np.random.Generator) -> APId:
    """Explore a uniform arm with probability ``epsilon``, else exploit."""
    arms = state.arms
    if not arms:
        raise ContractViolation("eps_greedy_decide called before arms were initialised")
    if rng.random() < epsilon:
        return arms[int(rng.integers(len(arms)))]
    return exploit_choice({ap: state.arm_stats[ap].aggregate for ap in arms}, rng)


def eps_sticky_decide(state: AgentState, config: AgentConfig, rng: np.random.Generator) -> APId:
    """Hold a satisfying AP for up to ``sticky_max`` unsatisfied rounds, otherwise act as ε-greedy."""
    if state.current_ap is not None:
        if state.last_satisfied:
            state.sticking = True
            state.sticky_counter = config.sticky_max
            return state.current_ap
        if state.sticking:
            state.sticky_counter -= 1
            if state.sticky_counter > 0:
                return state.current_ap
            state.sticking = False
    return eps_greedy_decide(state, effective_epsilon(config, state.steps), rng)


def load_aware_decide(
    state: AgentState,
    ap_broadcast_loads: Mapping[APId, float],
    rho: float,
    satisfied_last_round: bool,
    rng: np.random.Generator,
) -> APId:
    """Unsatisfied STAs move to the least loaded visible AP with probability ``rho``."""
    if state.current_ap is None:
        raise ContractViolation("load_aware_decide needs a current association")
    if satisfied_last_round or not ap_broadcast_loads:
        return state.current_ap
    if rng.random() >= rho:
        return state.current_ap
    lowest = min(ap_broadcast_loads.values())
    return _pick(sorted(ap for ap, load in ap_broadcast_loads.items() if load == lowest), rng)


def update_reward(
    stats: ArmStats, reward: Fraction, strategy: RewardStrategyType, window: int = 10
) -> ArmStats:
    """Fold one reward into an arm's aggregate."""
    if not (0.0 <= reward <= 1.0) or math.isnan(reward):
        raise ContractViolation(f"Reward must lie within [0, 1], got {reward}")

    stats.visit_count += 1
    stats.reward_sum += reward
    if strategy == RewardStrategyType.AVERAGE:
        aggregate = stats.reward_sum / stats.visit_count
    elif strategy == RewardStrategyType.WINDOW:
        stats.reward_history.append(reward)
        del stats.reward_history[:-window]
        aggregate = sum(stats.reward_history) / len(stats.reward_history)
    else:
        stats.reward_history.append(reward)
        n = len(stats.reward_history)
        # newest reward has weight 1, the x-th older one 1 - x/n
        weights = [1.0 - x / n for x in range(n)]
        weighted = sum(w * r for w, r in zip(weights, reversed(stats.reward_history)))
        aggregate = weighted / sum(weights)
    stats.aggregate = min(1.0, max(0.0, aggregate))
    return stats


def reset_arms(state: AgentState, visibility: Mapping[APId, Dbm]) -> AgentState:
    """Start from fresh arm statistics for the given visible set."""
    state.arm_stats = {ap: ArmStats(ap_id=ap) for ap in sorted(visibility)}
    state.visibility_snapshot = dict(visibility)
    state.sticking = False
    state.sticky_counter = 0
    state.steps = 0
    state.needs_scan = False
    return state


def environment_changed(old: Mapping[APId, Dbm], new: Mapping[APId, Dbm], threshold_db: float) -> bool:
    """Visible set changed or any RSSI moved by at least ``threshold_db``."""
    if set(old) != set(new):
        return True
    return any(abs(new[ap] - old[ap]) >= threshold_db for ap in new)


def maybe_reset(state: AgentState, new_visibility: Mapping[APId, Dbm], threshold_db: float = 3.0) -> AgentState:
    """Forget everything learnt when the observed environment changed."""
    if state.needs_scan or not environment_changed(state.visibility_snapshot, new_visibility, threshold_db):
        return state
    state.arm_stats = {}
    state.sticking = False
    state.sticky_counter = 0
    state.steps = 0
    state.last_satisfied = False
    state.needs_scan = True
    state.visibility_snapshot = dict(new_visibility)
    return state


def decide(
    state: AgentState,
    config: AgentConfig,
    visibility: Mapping[APId, Dbm],
    rng: np.random.Generator,
    ap_broadcast_loads: Optional[Mapping[APId, float]] = None,
) -> APId:
    """Next AP of a STA with at least one visible AP; updates ``state.current_ap``."""
    if config.is_mab:
        if state.needs_scan or state.current_ap is None or state.current_ap not in state.arm_stats:
            reset_arms(state, visibility)
            state.steps = 1
            choice = ss_decide(visibility, rng)
        else:
            state.steps += 1
            if config.policy == PolicyType.EPS_STICKY:
                choice = eps_sticky_decide(state, config, rng)
            else:
                choice = eps_greedy_decide(state, effective_epsilon(config, state.steps), rng)
    elif state.current_ap is None or state.current_ap not in visibility:
        # first association, or the serving AP was lost: full scan
        choice = ss_decide(visibility, rng)
    elif config.policy == PolicyType.LOAD_AWARE:
        loads = {ap: load for ap, load in (ap_broadcast_loads or {}).items() if ap in visibility}
        choice = load_aware_decide(state, loads, config.rho, state.last_satisfied, rng)
    else:
        choice = state.current_ap
    state.current_ap = choice
    state.fallback = False
    return choice


def observe(state: AgentState, config: AgentConfig, ap: APId, normalized: Fraction) -> AgentState:
    """Deliver one round's normalized throughput to the agent."""
    state.last_satisfied = is_satisfied(normalized)
    if config.is_mab and ap in state.arm_stats:
        update_reward(state.arm_stats[ap], normalized, RewardStrategyType(config.reward_strategy), config.window)
    return state

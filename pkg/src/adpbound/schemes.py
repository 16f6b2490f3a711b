"""Value-to-go approximators and the forward ADP rollout they drive.

An approximator supplies the continuation estimate W used in place of the
exact expected value-to-go: at stage k it scores (state, action) pairs, and
by convention scores 0 at the final stage.  The forward scheme starts at the
initial state and at every realized state picks the action maximizing
immediate reward plus W, with min-index tie-breaking.

Implemented approximators: myopic (always 0), rollout (exact value-to-go of a
fixed base policy), linear-feature Q (fixed weights, no training), and the
exact value-to-go of the optimal tail for oracle comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .common import DEFAULT_BUDGET
from .mdp import (
    MdpModel,
    PolicyString,
    bellman_solve,
    enumerate_noise_paths,
    exact_evtg,
    validate_policy_string,
)

__all__ = [
    "EvtgApproximator",
    "RolloutConfig",
    "LinearQConfig",
    "PathRecord",
    "AdpRun",
    "myopic_w",
    "rollout_w",
    "linear_q_w",
    "exact_evtg_w",
    "make_scheme",
    "adp_forward",
    "adp_simulate_mc",
]


@dataclass(frozen=True)
class EvtgApproximator:
    """Continuation estimate ``evaluate(stage, state, action)`` for stages 1..K.

    By the terminal convention ``evaluate(K, x, a)`` is 0 for every pair.
    Implementations must be deterministic; they may cache internally.
    """

    kind: str
    evaluate: Callable[[int, int, int], float]


@dataclass(frozen=True)
class RolloutConfig:
    """Fixed base policy whose exact value-to-go serves as the approximator."""

    base_policy: PolicyString

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "base_policy", tuple(tuple(int(a) for a in stage) for stage in self.base_policy)
        )


@dataclass(frozen=True)
class LinearQConfig:
    """Per-action weight vectors and per-state features of equal dimension."""

    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if theta.ndim != 2 or phi.ndim != 2:
            raise ValueError("theta and phi must be 2-dimensional tables")
        if theta.shape[1] != phi.shape[1]:
            raise ValueError(
                f"weight dimension {theta.shape[1]} does not match feature dimension {phi.shape[1]}"
            )
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)


@dataclass(frozen=True)
class PathRecord:
    """Realized states, actions, and accumulated reward along one noise path."""

    noise: tuple[int, ...]
    probability: float
    states: tuple[int, ...]
    actions: tuple[int, ...]
    reward: float


@dataclass(frozen=True)
class AdpRun:
    """Forward-scheme outcome: per-path records and the exact expected reward."""

    paths: tuple[PathRecord, ...]
    expected_value: float


def myopic_w() -> EvtgApproximator:
    """Ignore the continuation entirely: W is identically zero."""
    return EvtgApproximator(kind="myopic", evaluate=lambda stage, state, action: 0.0)


def rollout_w(model: MdpModel, config: RolloutConfig, budget: int = DEFAULT_BUDGET) -> EvtgApproximator:
    """Score (state, action) by the exact value-to-go of the base policy.

    ``evaluate(k, x, a)`` is the exact expected reward of taking ``a`` at ``x``
    and following the base policy for stages k+1..K.
    """
    base = config.base_policy
    if len(base) != model.horizon:
        raise ValueError("base policy must cover every stage")
    validate_policy_string(model, base)
    cache: dict[tuple[int, int, int], float] = {}

    def evaluate(stage: int, state: int, action: int) -> float:
        if stage == model.horizon:
            return 0.0
        key = (stage, state, action)
        value = cache.get(key)
        if value is None:
            value = exact_evtg(model, base[stage:], stage, state, action, budget=budget)
            cache[key] = value
        return value

    return EvtgApproximator(kind="rollout", evaluate=evaluate)


def linear_q_w(model: MdpModel, config: LinearQConfig) -> EvtgApproximator:
    """Embed a fixed linear-feature Q table as a continuation estimate.

    The parametric score of (x, a) is theta(a) . phi(x); subtracting the
    immediate reward makes the forward rule r + W reproduce exactly the
    argmax of the parametric score.
    """
    theta, phi = config.theta, config.phi
    if theta.shape[0] != model.num_actions:
        raise ValueError("theta must provide one weight vector per action")
    if phi.shape[0] != model.num_states:
        raise ValueError("phi must provide one feature vector per state")
    table = phi @ theta.T - model.reward

    def evaluate(stage: int, state: int, action: int) -> float:
        if stage == model.horizon:
            return 0.0
        return float(table[state, action])

    return EvtgApproximator(kind="linear_q", evaluate=evaluate)


def exact_evtg_w(model: MdpModel) -> EvtgApproximator:
    """Exact expected value-to-go of the optimal tail, for oracle comparisons."""
    _, tables = bellman_solve(model)
    continuation = tables.Q - model.reward[None, :, :]

    def evaluate(stage: int, state: int, action: int) -> float:
        return float(continuation[stage - 1, state, action])

    return EvtgApproximator(kind="exact_evtg", evaluate=evaluate)


def make_scheme(
    model: MdpModel,
    name: str,
    base_policy: Optional[PolicyString] = None,
    theta: Optional[np.ndarray] = None,
    budget: int = DEFAULT_BUDGET,
) -> EvtgApproximator:
    """Build an approximator from its configuration name.

    ``rollout`` needs ``base_policy``; ``linearq`` needs ``theta`` plus a
    model with features.
    """
    if name == "myopic":
        return myopic_w()
    if name == "rollout":
        if base_policy is None:
            raise ValueError("rollout scheme requires a base policy")
        return rollout_w(model, RolloutConfig(base_policy=base_policy), budget=budget)
    if name == "linearq":
        if theta is None:
            raise ValueError("linearq scheme requires theta weights")
        if model.features is None:
            raise ValueError("linearq scheme requires a model with features")
        return linear_q_w(model, LinearQConfig(theta=np.asarray(theta, dtype=float), phi=model.features))
    if name == "exact_evtg":
        return exact_evtg_w(model)
    raise ValueError(f"unknown scheme '{name}'")


def _stage_choice(model: MdpModel, w: Callable[[int, int, int], float], stage: int, state: int) -> int:
    best_action = 0
    best_value = -math.inf
    for action in range(model.num_actions):
        value = float(model.reward[state, action]) + float(w(stage, state, action))
        if value > best_value:
            best_action = action
            best_value = value
    return best_action


def adp_forward(model: MdpModel, approximator: EvtgApproximator, budget: int = DEFAULT_BUDGET) -> AdpRun:
    """Roll the forward scheme over every noise path and aggregate exactly.

    On each path the realized state advances through the model's transition
    law under the chosen actions; the run records all paths and the exact
    probability-weighted expected cumulative true reward.
    """
    K = model.horizon
    w = approximator.evaluate
    choices: dict[tuple[int, int], int] = {}
    records = []
    for path in enumerate_noise_paths(model, K - 1, budget=budget):
        state = model.initial_state
        states = [state]
        actions = []
        total = 0.0
        for stage in range(1, K + 1):
            key = (stage, state)
            action = choices.get(key)
            if action is None:
                action = _stage_choice(model, w, stage, state)
                choices[key] = action
            actions.append(action)
            total += float(model.reward[state, action])
            if stage < K:
                state = int(model.transition[state, action, path.symbols[stage - 1]])
                states.append(state)
        records.append(
            PathRecord(
                noise=path.symbols,
                probability=path.probability,
                states=tuple(states),
                actions=tuple(actions),
                reward=total,
            )
        )
    expected = 0.0
    for record in records:
        expected += record.probability * record.reward
    return AdpRun(paths=tuple(records), expected_value=float(expected))


def adp_simulate_mc(
    model: MdpModel, approximator: EvtgApproximator, samples: int, seed: int
) -> tuple[float, float]:
    """Seeded Monte Carlo estimate of the forward scheme's expected reward.

    Uses the same action rule as :func:`adp_forward` but samples noise paths
    instead of enumerating them; intended for models whose noise tree exceeds
    the enumeration budget.  Returns (mean, standard error).
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    K = model.horizon
    w = approximator.evaluate
    stage_actions = np.zeros((K, model.num_states), dtype=np.int64)
    for stage in range(1, K + 1):
        for state in range(model.num_states):
            stage_actions[stage - 1, state] = _stage_choice(model, w, stage, state)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    draws = None
    if K > 1:
        draws = rng.choice(model.noise_size, size=(samples, K - 1), p=model.noise_probs)
    states = np.full(samples, model.initial_state, dtype=np.int64)
    totals = np.zeros(samples)
    for stage in range(1, K + 1):
        actions = stage_actions[stage - 1][states]
        totals += model.reward[states, actions]
        if stage < K:
            assert draws is not None
            states = model.transition[states, actions, draws[:, stage - 1]]
    mean = float(totals.mean())
    stderr = float(totals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return mean, stderr

"""Decision rules and their sufficient statistics.

Four rules share one shape: pull arm 1 iff the covariate is at or above a
threshold (ties go to arm 1).  The oracle thresholds at the true location;
the plug-in rules threshold at the running estimate, optionally deflated by
an exploration term; the forced rule overrides the threshold at scheduled
times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .schedule import ForcedSchedule

__all__ = [
    "PolicyState",
    "Oracle",
    "Myopic",
    "NearlyMyopic",
    "ForcedSampling",
    "PolicySpec",
    "NoObservations",
    "RewardMismatch",
    "theta_hat",
    "decision_threshold",
    "decide",
    "update",
    "theory_coefficient",
]


class NoObservations(ValueError):
    """Estimator queried before any arm-1 pull."""


class RewardMismatch(ValueError):
    """Reward presence disagrees with the chosen arm."""


@dataclass(frozen=True)
class PolicyState:
    """Statistics through step t: arm-1 pull count and sum of (X_s - Y_s) over pulls."""

    t: int = 0
    pulls: int = 0
    sum_diff: float = 0.0

    def __post_init__(self):
        if not 0 <= self.pulls <= self.t:
            raise ValueError(f"pulls={self.pulls} outside [0, t={self.t}]")
        if self.pulls == 0 and self.sum_diff != 0.0:
            raise ValueError("sum_diff must be 0 while no pulls have occurred")


def theta_hat(state: PolicyState) -> float:
    """Location estimate sum_diff / pulls; exact running sums, no incremental mean."""
    if state.pulls == 0:
        raise NoObservations("estimator undefined before the first arm-1 pull")
    return state.sum_diff / state.pulls


@dataclass(frozen=True)
class Oracle:
    """Benchmark rule that knows theta."""

    theta: float


@dataclass(frozen=True)
class Myopic:
    """Plug-in rule thresholding at the raw estimate; first pull is forced."""


@dataclass(frozen=True)
class NearlyMyopic:
    """Plug-in rule with threshold deflated by c sqrt(ln t) / sqrt(pulls).

    sigma is carried for bookkeeping (the theory-backed coefficient is
    2 sigma sqrt(3); see theory_coefficient); it does not enter the decision.
    """

    c: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        # c = 0 is allowed and reproduces the myopic rule decision-for-decision
        if not self.c >= 0:
            raise ValueError("nearly_myopic requires c >= 0")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class ForcedSampling:
    """Myopic rule overridden by unconditional pulls at scheduled times."""

    schedule: ForcedSchedule


PolicySpec = Union[Oracle, Myopic, NearlyMyopic, ForcedSampling]


def theory_coefficient(sigma: float) -> float:
    """Exploration coefficient 2 sigma sqrt(3) used by the nonasymptotic bounds."""
    return 2.0 * sigma * math.sqrt(3.0)


def decision_threshold(spec: PolicySpec, state: PolicyState) -> float:
    """Pull-arm-1 covariate threshold for step state.t + 1 (-inf: unconditional pull)."""
    if isinstance(spec, Oracle):
        return spec.theta
    if isinstance(spec, ForcedSampling):
        step = state.t + 1
        if step > spec.schedule.horizon:
            raise ValueError(
                f"step {step} beyond schedule horizon {spec.schedule.horizon}"
            )
        if spec.schedule.contains(step):
            return -math.inf
        return theta_hat(state)
    # plug-in family: unconditional first pull
    if state.t == 0:
        return -math.inf
    thr = theta_hat(state)
    if isinstance(spec, NearlyMyopic):
        thr -= spec.c * math.sqrt(math.log(state.t)) / math.sqrt(state.pulls)
    return thr


def decide(spec: PolicySpec, state: PolicyState, x_next: float) -> int:
    """Arm for step state.t + 1 given statistics through state.t; ties pull arm 1."""
    return int(x_next >= decision_threshold(spec, state))


def update(state: PolicyState, x: float, arm: int, y: float | None = None) -> PolicyState:
    """Advance the statistics by one step; arm-0 steps carry no information."""
    if arm not in (0, 1):
        raise ValueError(f"arm must be 0 or 1, got {arm}")
    if arm == 1:
        if y is None:
            raise RewardMismatch("arm 1 chosen but no reward supplied")
        return PolicyState(state.t + 1, state.pulls + 1, state.sum_diff + (x - y))
    if y is not None:
        raise RewardMismatch("arm 0 chosen but a reward was supplied")
    return PolicyState(state.t + 1, state.pulls, state.sum_diff)

"""Deterministic Monte Carlo harness.

One episode consumes exactly three uniforms per step from its stream: one for
the covariate (inverse CDF) and a pair for the Gaussian noise (Box-Muller,
cosine branch).  The noise is drawn every step whether or not arm 1 is
pulled, so the realized (X_t, eps_t) path is a function of (master_seed,
replication) alone and is shared by every policy - common random numbers.

Replications are independent tasks merged in replication order, so results
are byte-identical for any worker count.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .env import BanditInstance
from .policy import (
    ForcedSampling,
    Myopic,
    NearlyMyopic,
    Oracle,
    PolicySpec,
)

__all__ = [
    "VARIATES_PER_STEP",
    "ExperimentConfig",
    "EpisodeMetrics",
    "AggregateStats",
    "ExperimentResult",
    "episode_stream",
    "draw_path",
    "run_episode",
    "run_experiment",
    "policy_label",
]

VARIATES_PER_STEP = 3


@dataclass(frozen=True)
class ExperimentConfig:
    """A full experiment: one instance, several policies, shared checkpoints."""

    instance: BanditInstance
    policies: tuple[PolicySpec, ...]
    horizons: tuple[int, ...]
    replications: int
    master_seed: int
    record_trajectories: bool = False

    def __post_init__(self):
        if len(self.horizons) == 0:
            raise ValueError("horizons must be nonempty")
        if any(h < 1 for h in self.horizons):
            raise ValueError("horizons must be positive integers")
        if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ValueError("horizons must be strictly increasing")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if len(self.policies) == 0:
            raise ValueError("at least one policy is required")
        labels = [policy_label(p) for p in self.policies]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate policy entries: {labels}")


@dataclass
class EpisodeMetrics:
    """Per-checkpoint realized pseudo-regret, inferior-pull count, pull count."""

    horizons: tuple[int, ...]
    cum_regret: np.ndarray
    t_inf: np.ndarray
    pulls: np.ndarray
    theta_hat: np.ndarray  # NaN where no pull has happened yet
    stream_digest: str
    arms: np.ndarray | None = None


@dataclass(frozen=True)
class AggregateStats:
    """Monte Carlo summaries per (policy, checkpoint); se = sd / sqrt(reps)."""

    policies: tuple[str, ...]
    horizons: tuple[int, ...]
    reps: int
    mean_regret: np.ndarray
    sd_regret: np.ndarray
    se_regret: np.ndarray
    mean_tinf: np.ndarray
    sd_tinf: np.ndarray
    se_tinf: np.ndarray


@dataclass
class ExperimentResult:
    """Per-replication metrics, replication-major, plus the config that made them."""

    config: ExperimentConfig
    policies: tuple[str, ...]
    horizons: tuple[int, ...]
    regret: np.ndarray  # (policy, horizon, replication)
    t_inf: np.ndarray
    pulls: np.ndarray
    theta_hat: np.ndarray
    digests: tuple[str, ...] = field(repr=False, default=())
    arms: list | None = None  # [policy][replication] -> uint8 array, if recorded

    def aggregate(self) -> AggregateStats:
        reps = self.regret.shape[2]

        def stats(a):
            mean = a.mean(axis=2)
            sd = a.std(axis=2, ddof=1) if reps > 1 else np.zeros_like(mean)
            return mean, sd, sd / math.sqrt(reps)

        mr, sr, er = stats(self.regret.astype(float))
        mt, st, et = stats(self.t_inf.astype(float))
        return AggregateStats(
            policies=self.policies,
            horizons=self.horizons,
            reps=reps,
            mean_regret=mr,
            sd_regret=sr,
            se_regret=er,
            mean_tinf=mt,
            sd_tinf=st,
            se_tinf=et,
        )


def policy_label(spec: PolicySpec) -> str:
    if isinstance(spec, Oracle):
        return "oracle"
    if isinstance(spec, Myopic):
        return "myopic"
    if isinstance(spec, NearlyMyopic):
        return f"nearly_myopic(c={spec.c:.12g})"
    if isinstance(spec, ForcedSampling):
        return f"forced(q={spec.schedule.q:.12g})"
    raise TypeError(f"unknown policy spec: {type(spec).__name__}")


def episode_stream(master_seed: int, replication: int) -> np.random.Generator:
    """Counter-based stream derived from (master_seed, replication)."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(replication,))
    return np.random.Generator(np.random.Philox(ss))


def draw_path(instance: BanditInstance, n: int, stream: np.random.Generator):
    """Realize (X_t, eps_t) for t = 1..n plus a digest of the joint path."""
    u = stream.random((n, VARIATES_PER_STEP))
    xs = np.asarray(instance.covariate.inverse_cdf_array(u[:, 0]), dtype=float)
    # Box-Muller on (u2, u3); 1 - u2 keeps the log argument in (0, 1]
    eps = instance.sigma * np.sqrt(-2.0 * np.log1p(-u[:, 1])) * np.cos(2.0 * np.pi * u[:, 2])
    digest = hashlib.blake2b(xs.tobytes() + eps.tobytes(), digest_size=16).hexdigest()
    return xs, eps, digest


def run_episode(
    instance: BanditInstance,
    spec: PolicySpec,
    horizons,
    stream: np.random.Generator,
    record_decisions: bool = False,
) -> EpisodeMetrics:
    """Single pass through max(horizons) steps, snapshotting at each checkpoint.

    Valid for all four rules because none depends on the horizon.  The loop
    mirrors policy.decide / policy.update with plain accumulators; equivalence
    is pinned by a test.
    """
    horizons = tuple(int(h) for h in horizons)
    if any(b <= a for a, b in zip(horizons, horizons[1:])) or not horizons:
        raise ValueError("horizons must be nonempty and strictly increasing")
    n = horizons[-1]
    theta = instance.theta
    xs, eps, digest = draw_path(instance, n, stream)

    if isinstance(spec, ForcedSampling):
        forced = spec.schedule.mask(n)
        kind = 0
    elif isinstance(spec, Oracle):
        kind = 1
        oracle_theta = spec.theta
    elif isinstance(spec, NearlyMyopic):
        kind = 2
        c = spec.c
    elif isinstance(spec, Myopic):
        kind = 2
        c = 0.0
    else:
        raise TypeError(f"unknown policy spec: {type(spec).__name__}")

    n_chk = len(horizons)
    out_regret = np.empty(n_chk)
    out_tinf = np.empty(n_chk, dtype=np.int64)
    out_pulls = np.empty(n_chk, dtype=np.int64)
    out_theta = np.empty(n_chk)
    arms = np.empty(n, dtype=np.uint8) if record_decisions else None

    pulls = 0
    sum_diff = 0.0
    cum_regret = 0.0
    t_inf = 0
    chk = 0
    sqrt = math.sqrt
    log = math.log
    for t in range(1, n + 1):
        x = xs[t - 1]
        if kind == 0:
            arm = 1 if forced[t] else (1 if x >= sum_diff / pulls else 0)
        elif kind == 1:
            arm = 1 if x >= oracle_theta else 0
        else:
            if t == 1:
                arm = 1
            else:
                thr = sum_diff / pulls
                if c != 0.0:
                    thr -= c * sqrt(log(t - 1)) / sqrt(pulls)
                arm = 1 if x >= thr else 0
        if arm != (1 if x >= theta else 0):
            cum_regret += abs(x - theta)
            t_inf += 1
        if arm == 1:
            y = x - theta + eps[t - 1]
            pulls += 1
            sum_diff += x - y
        if arms is not None:
            arms[t - 1] = arm
        if t == horizons[chk]:
            out_regret[chk] = cum_regret
            out_tinf[chk] = t_inf
            out_pulls[chk] = pulls
            out_theta[chk] = sum_diff / pulls if pulls else math.nan
            chk += 1
    return EpisodeMetrics(
        horizons=horizons,
        cum_regret=out_regret,
        t_inf=out_tinf,
        pulls=out_pulls,
        theta_hat=out_theta,
        stream_digest=digest,
        arms=arms,
    )


def _run_block(config: ExperimentConfig, r_lo: int, r_hi: int):
    """Replications [r_lo, r_hi) for every policy; pure function of its arguments."""
    n_pol = len(config.policies)
    n_chk = len(config.horizons)
    n_rep = r_hi - r_lo
    regret = np.empty((n_pol, n_chk, n_rep))
    t_inf = np.empty((n_pol, n_chk, n_rep), dtype=np.int64)
    pulls = np.empty((n_pol, n_chk, n_rep), dtype=np.int64)
    theta = np.empty((n_pol, n_chk, n_rep))
    digests = []
    arms = [[None] * n_rep for _ in range(n_pol)] if config.record_trajectories else None
    for j, r in enumerate(range(r_lo, r_hi)):
        rep_digest = None
        for i, spec in enumerate(config.policies):
            # fresh stream per policy: every policy sees the identical path
            m = run_episode(
                config.instance,
                spec,
                config.horizons,
                episode_stream(config.master_seed, r),
                record_decisions=config.record_trajectories,
            )
            if rep_digest is None:
                rep_digest = m.stream_digest
            elif m.stream_digest != rep_digest:
                raise RuntimeError(
                    f"stream divergence in replication {r}: common random numbers broken"
                )
            regret[i, :, j] = m.cum_regret
            t_inf[i, :, j] = m.t_inf
            pulls[i, :, j] = m.pulls
            theta[i, :, j] = m.theta_hat
            if arms is not None:
                arms[i][j] = m.arms
        digests.append(rep_digest)
    return regret, t_inf, pulls, theta, digests, arms


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """All replications for all policies; deterministic fork-join."""
    reps = config.replications
    labels = tuple(policy_label(p) for p in config.policies)
    if workers <= 1 or reps == 1:
        blocks = [(0, reps, _run_block(config, 0, reps))]
    else:
        chunk = max(1, math.ceil(reps / (workers * 4)))
        spans = [(lo, min(lo + chunk, reps)) for lo in range(0, reps, chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = [(lo, hi, pool.submit(_run_block, config, lo, hi)) for lo, hi in spans]
            blocks = [(lo, hi, f.result()) for lo, hi, f in futs]

    n_pol, n_chk = len(config.policies), len(config.horizons)
    regret = np.empty((n_pol, n_chk, reps))
    t_inf = np.empty((n_pol, n_chk, reps), dtype=np.int64)
    pulls = np.empty((n_pol, n_chk, reps), dtype=np.int64)
    theta = np.empty((n_pol, n_chk, reps))
    digests: list[str] = [""] * reps
    arms = [[None] * reps for _ in range(n_pol)] if config.record_trajectories else None
    for lo, hi, (br, bt, bp, bth, bd, ba) in blocks:
        regret[:, :, lo:hi] = br
        t_inf[:, :, lo:hi] = bt
        pulls[:, :, lo:hi] = bp
        theta[:, :, lo:hi] = bth
        digests[lo:hi] = bd
        if arms is not None:
            for i in range(n_pol):
                arms[i][lo:hi] = ba[i]
    return ExperimentResult(
        config=config,
        policies=labels,
        horizons=config.horizons,
        regret=regret,
        t_inf=t_inf,
        pulls=pulls,
        theta_hat=theta,
        digests=tuple(digests),
        arms=arms,
    )

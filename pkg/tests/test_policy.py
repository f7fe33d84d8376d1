import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from covband.env import BanditInstance, Uniform
from covband.policy import (
    ForcedSampling,
    Myopic,
    NearlyMyopic,
    NoObservations,
    Oracle,
    PolicyState,
    RewardMismatch,
    decide,
    decision_threshold,
    theory_coefficient,
    theta_hat,
    update,
)
from covband.schedule import build_schedule
from covband.sim import episode_stream


def test_theta_hat_single_pull():
    st_ = update(PolicyState(), 0.4, 1, 0.3)
    assert theta_hat(st_) == pytest.approx(0.1)


def test_theta_hat_noise_free_recovers_location():
    theta = 0.37
    s = PolicyState()
    for x in [0.5, -0.2, 0.9, 0.41]:
        s = update(s, x, 1, x - theta)  # zero-noise reward
    assert theta_hat(s) == pytest.approx(theta, abs=1e-15)


def test_theta_hat_is_plain_mean():
    s = update(update(PolicyState(), 0.4, 1, 0.3), 0.5, 1, 0.2)
    assert theta_hat(s) == pytest.approx(0.2)


def test_theta_hat_requires_a_pull():
    with pytest.raises(NoObservations):
        theta_hat(PolicyState())
    with pytest.raises(NoObservations):
        theta_hat(PolicyState(t=5, pulls=0, sum_diff=0.0))


def test_update_examples():
    s = update(PolicyState(), 0.4, 1, 0.3)
    assert (s.t, s.pulls, s.sum_diff) == (1, 1, pytest.approx(0.1))
    s0 = update(PolicyState(t=3, pulls=2, sum_diff=0.4), 0.9, 0)
    assert (s0.t, s0.pulls, s0.sum_diff) == (4, 2, 0.4)


def test_update_reward_mismatch():
    with pytest.raises(RewardMismatch):
        update(PolicyState(), 0.4, 1, None)
    with pytest.raises(RewardMismatch):
        update(PolicyState(), 0.4, 0, 0.3)
    with pytest.raises(ValueError):
        update(PolicyState(), 0.4, 2, 0.3)


def test_state_invariants():
    with pytest.raises(ValueError):
        PolicyState(t=1, pulls=2)
    with pytest.raises(ValueError):
        PolicyState(t=1, pulls=0, sum_diff=0.5)


def test_oracle_tie_pulls():
    assert decide(Oracle(0.0), PolicyState(), 0.0) == 1
    assert decide(Oracle(0.0), PolicyState(), -1e-12) == 0


def test_first_step_is_unconditional_for_plugin_rules():
    for spec in (Myopic(), NearlyMyopic(c=1.0)):
        assert decide(spec, PolicyState(), -1e9) == 1


def test_nearly_myopic_threshold_equals_estimate_after_step_one():
    # ln 1 = 0, so the step-2 threshold is exactly the estimate
    s = PolicyState(t=1, pulls=1, sum_diff=0.37)
    assert decision_threshold(NearlyMyopic(c=1.0), s) == theta_hat(s)
    assert decision_threshold(NearlyMyopic(c=5.0), s) == theta_hat(s)


def test_theory_coefficient_value():
    assert theory_coefficient(1.0) == pytest.approx(3.4641016151377544, abs=1e-15)
    s = PolicyState(t=4, pulls=4, sum_diff=0.0)
    want = 0.0 - theory_coefficient(1.0) * math.sqrt(math.log(4.0)) / 2.0
    assert decision_threshold(NearlyMyopic(c=theory_coefficient(1.0)), s) == pytest.approx(want)


def test_c_zero_matches_myopic_bitwise():
    rng = np.random.default_rng(11)
    for _ in range(300):
        t = int(rng.integers(1, 50))
        pulls = int(rng.integers(1, t + 1))
        s = PolicyState(t=t, pulls=pulls, sum_diff=float(rng.normal()))
        x = float(rng.normal())
        assert decide(NearlyMyopic(c=0.0), s, x) == decide(Myopic(), s, x)
        assert decision_threshold(NearlyMyopic(c=0.0), s) == decision_threshold(Myopic(), s)


def test_forced_policy_decisions():
    sched = build_schedule(1.0, 150)  # times (1, 7, 20, 54, 148)
    spec = ForcedSampling(sched)
    assert decide(spec, PolicyState(), -100.0) == 1  # step 1 forced
    s = PolicyState(t=6, pulls=3, sum_diff=0.9)
    assert decide(spec, s, -100.0) == 1  # step 7 forced
    s = PolicyState(t=7, pulls=4, sum_diff=1.2)
    assert decide(spec, s, 0.29) == 0  # step 8 plain plug-in, threshold 0.3
    assert decide(spec, s, 0.30) == 1
    with pytest.raises(ValueError):
        decide(spec, PolicyState(t=150, pulls=5, sum_diff=0.0), 0.0)


@given(
    st.integers(0, 60),
    st.floats(-3, 3),
    st.floats(-4, 4),
    st.floats(-4, 4),
)
def test_decide_monotone_in_covariate(t, sum_diff, x1, x2):
    pulls = max(1, t // 2) if t else 0
    s = PolicyState(t=t, pulls=pulls, sum_diff=sum_diff if pulls else 0.0)
    specs = [Oracle(0.3), Myopic(), NearlyMyopic(c=1.7), ForcedSampling(build_schedule(0.5, 100))]
    lo, hi = sorted([x1, x2])
    for spec in specs:
        if pulls == 0 and not isinstance(spec, Oracle):
            continue
        assert decide(spec, s, lo) <= decide(spec, s, hi)


def test_estimator_distribution_under_pure_pulls():
    # policy == always pull: theta_hat(t) - theta is N(0, sigma^2 / t)
    theta, sigma, t_end, episodes = 0.3, 1.0, 50, 10_000
    inst = BanditInstance(theta, sigma, Uniform(-1.0, 1.0))
    errs = np.empty(episodes)
    for r in range(episodes):
        g = episode_stream(777, r)
        u = g.random((t_end, 3))
        xs = inst.covariate.inverse_cdf_array(u[:, 0])
        eps = sigma * np.sqrt(-2.0 * np.log1p(-u[:, 1])) * np.cos(2.0 * np.pi * u[:, 2])
        s = PolicyState()
        for t in range(t_end):
            s = update(s, xs[t], 1, xs[t] - theta + eps[t])
        errs[r] = theta_hat(s) - theta
    se = sigma / math.sqrt(t_end) / math.sqrt(episodes)
    assert abs(errs.mean()) < 4.0 * se
    assert 0.9 * sigma**2 / t_end < errs.var(ddof=1) < 1.1 * sigma**2 / t_end


def test_estimate_tail_bound_small_grid():
    # empirical joint tail of (|estimate - theta| > x, pulls > tau) under the
    # inflated-threshold rule stays within the exponential bound
    from covband.sim import ExperimentConfig, run_experiment
    from covband.analysis import concentration_bound

    inst = BanditInstance(0.0, 1.0, Uniform(-1.0, 1.0))
    cfg = ExperimentConfig(
        instance=inst,
        policies=(NearlyMyopic(c=1.0),),
        horizons=(120,),
        replications=20_000,
        master_seed=909,
    )
    res = run_experiment(cfg, workers=2)
    est = res.theta_hat[0, 0, :]
    pulls = res.pulls[0, 0, :]
    n = len(est)
    for x in (0.3, 0.6):
        for tau in (30, 60):
            phat = float(np.mean((np.abs(est) > x) & (pulls > tau)))
            bound = concentration_bound(x, tau, 1.0)
            assert phat <= bound + 3.0 * math.sqrt(phat * (1.0 - phat) / n), (x, tau, phat)

"""Forced-sampling time grids and deterministic threshold quantities."""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import mpmath as mp
import numpy as np

__all__ = ["ForcedSchedule", "build_schedule", "thresholds", "theorem1_times"]

# Steps the defining inequality must keep holding for a scan to accept an
# onset; guards against the non-monotone behavior of sqrt(t)-vs-sqrt(ln t)
# inequalities near small t.
PERMANENCE_WINDOW = 10


def _floor_exp(q: float, t: int) -> int:
    """floor(exp(q t)), bit-stable at representation boundaries.

    When the float value lands within a few ulps of an integer the true value
    is recomputed at 50 digits, so the floor reflects exp at the exact double
    q rather than libm rounding.
    """
    v = math.exp(q * t)
    nearest = round(v)
    if nearest > 0 and abs(v - nearest) <= 8.0 * math.ulp(v):
        with mp.workdps(50):
            return int(mp.floor(mp.exp(mp.mpf(q) * t)))
    return int(v)


@dataclass(frozen=True)
class ForcedSchedule:
    """Deduplicated exploration times {1} | {floor(exp(q t)): t >= 2} within horizon."""

    q: float
    horizon: int
    times: tuple[int, ...]

    def count(self, t: int) -> int:
        """N(t): number of scheduled times <= t."""
        return bisect_right(self.times, t)

    def contains(self, t: int) -> bool:
        i = bisect_right(self.times, t)
        return i > 0 and self.times[i - 1] == t

    def mask(self, n: int) -> np.ndarray:
        """Boolean lookup of length n + 1; mask[t] is True iff t is forced."""
        if n > self.horizon:
            raise ValueError(f"schedule covers horizon {self.horizon} < requested {n}")
        m = np.zeros(n + 1, dtype=bool)
        m[[t for t in self.times if t <= n]] = True
        return m


def build_schedule(q: float, horizon: int) -> ForcedSchedule:
    """Build the exploration time set for design parameter q."""
    if not q > 0:
        raise ValueError("q must be positive")
    if horizon < 1:
        raise ValueError("horizon must be a positive integer")
    times = [1]
    log_cut = math.log(horizon) + 1.0  # q t beyond this forces exp(q t) > horizon
    t = 2
    while q * t <= log_cut:
        tau = _floor_exp(q, t)
        if tau > horizon:
            break
        if tau != times[-1]:
            times.append(tau)
        # skip indices that cannot produce a new value (one-index slack for
        # float slop in the jump target; dedup absorbs the repeat it allows)
        t = max(t + 1, math.ceil(math.log(tau + 1) / q) - 1)
    return ForcedSchedule(q=q, horizon=int(horizon), times=tuple(times))


def thresholds(q: float) -> tuple[float, float]:
    """(nu, nu0): spacing threshold and the later of it and the half-density time.

    nu = 1 + (1/q) ln_+(2 / (e^q - 1)); past nu consecutive grid values are
    distinct.  nu0 additionally dominates the first integer t with
    t >= (2/q) ln(t+1); past nu0 at most half of [1, t] is forced.
    """
    if not q > 0:
        raise ValueError("q must be positive")
    ratio = 2.0 / math.expm1(q)
    nu = 1.0 + (math.log(ratio) / q if ratio > 1.0 else 0.0)
    t = 1
    while t < (2.0 / q) * math.log(t + 1.0):
        t += 1
    return nu, max(nu, float(t))


def _first_permanent(holds, window=PERMANENCE_WINDOW):
    """Smallest t >= 1 where holds(t), ..., holds(t + window - 1) are all true.

    holds must be eventually permanent: true on [1, t_lo] and [t_hi, inf) for
    some t_lo < t_hi.  After rejecting t = 1, the window predicate is monotone,
    so doubling plus bisection returns the exact onset.
    """

    def window_ok(t):
        return all(holds(s) for s in range(t, t + window))

    if window_ok(1):
        return 1
    lo, hi = 1, 2
    while not window_ok(hi):
        lo, hi = hi, hi * 2
        if hi > 1 << 200:
            raise RuntimeError("no permanent onset found; inequality may never hold")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if window_ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def theorem1_times(
    p: float, sigma: float, x0: float, alpha: float
) -> tuple[int, int | None]:
    """Burn-in times (t0, t_alpha) for the inflated-threshold policy bounds.

    t0 is the first permanent onset of x0 sqrt(p t) >= 8 sigma sqrt(3 ln t).
    t_alpha (only for alpha > 2; None otherwise) is the first permanent onset
    of t >= (8 sqrt(3) sigma sqrt(ln t / p))^(4 alpha / (alpha - 2)), with the
    exponent taken as its limit 4 at alpha = inf.
    """
    # closed right endpoints: the scans are well defined there even though
    # certificates keep p and x0 strictly interior
    if not 0.0 < p <= 1.0:
        raise ValueError("p must be in (0, 1]")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if not 0.0 < x0 <= 0.5:
        raise ValueError("x0 must be in (0, 1/2]")
    if not alpha > 0:
        raise ValueError("alpha must be positive")

    def t0_holds(t):
        if t == 1:
            return True  # rhs is exactly 0 at t = 1
        if t < 1e15:
            return x0 * math.sqrt(p * t) >= 8.0 * sigma * math.sqrt(3.0 * math.log(t))
        lhs = math.log(x0) + 0.5 * (math.log(p) + math.log(t))
        rhs = math.log(8.0 * sigma) + 0.5 * (math.log(3.0) + math.log(math.log(t)))
        return lhs >= rhs

    t0 = _first_permanent(t0_holds)

    if alpha <= 2.0:
        return t0, None
    expo = 4.0 if math.isinf(alpha) else 4.0 * alpha / (alpha - 2.0)
    base = 8.0 * math.sqrt(3.0) * sigma / math.sqrt(p)

    def ta_holds(t):
        if t == 1:
            return True
        log_rhs = expo * (math.log(base) + 0.5 * math.log(math.log(t)))
        if log_rhs < 700.0 and t < 1e15:
            return t >= base**expo * math.log(t) ** (expo / 2.0)
        return math.log(t) >= log_rhs

    return t0, _first_permanent(ta_holds)

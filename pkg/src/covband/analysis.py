"""Theoretical bound evaluators, tail bounds, growth-regime fits and envelopes.

Lower bounds are the closed forms of the minimax analysis; upper envelopes
are assembled from the proof-level constants and are flagged as such (they
are valid but typically very loose at practical horizons).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import zeta

from .env import MarginParams
from .schedule import theorem1_times, thresholds
from .policy import theory_coefficient

__all__ = [
    "OutOfRange",
    "ConditionViolated",
    "GrowthFit",
    "RateDescriptor",
    "isr_lower_bound",
    "regret_lower_bound",
    "lemma5_floor",
    "concentration_bound",
    "fit_growth",
    "upper_envelope",
]

GROWTH_MODELS = ("constant", "log", "log_squared", "power_times_polylog")


class OutOfRange(ValueError):
    """Parameter outside the regime where the formula is defined."""


class ConditionViolated(ValueError):
    """Applicability condition of the forced-sampling bounds fails."""


def isr_lower_bound(alpha: float, c_star: float, sigma: float, n: float) -> float:
    """Minimax inferior-sampling floor (1/8)(alpha/2e)^(alpha/2) C* sigma^alpha n^(1-alpha/2)."""
    if not 0.0 < alpha <= 2.0:
        raise OutOfRange(f"alpha must be in (0, 2], got {alpha}")
    return 0.125 * (alpha / (2.0 * math.e)) ** (alpha / 2.0) * c_star * sigma**alpha * n ** (
        1.0 - alpha / 2.0
    )


def regret_lower_bound(alpha: float, c_star: float, sigma: float, x0: float, n: float) -> float:
    """Minimax regret floor for alpha in (0, 1]."""
    if not 0.0 < alpha <= 1.0:
        raise OutOfRange(f"alpha must be in (0, 1], got {alpha}")
    return (
        0.125 ** (1.0 + 1.0 / alpha)
        * (alpha / (2.0 * math.e)) ** ((alpha + 1.0) / 2.0)
        * c_star ** (1.0 + 1.0 / alpha)
        * sigma ** (alpha + 1.0)
        * n ** ((1.0 - alpha) / 2.0)
        / (2.0 * max(1.0 / x0, (2.0 * c_star) ** (1.0 / alpha)))
    )


def lemma5_floor(s_n: float, n: float, alpha: float, c_star: float, x0: float) -> float:
    """Regret floor implied by an inferior-sampling level s_n at horizon n.

    Exact limits at alpha = inf: the exponents 1 + 1/alpha, -1/alpha and
    1/alpha degenerate to 1, 0 and 0.
    """
    if s_n < 0:
        raise OutOfRange("s_n must be nonnegative")
    if n < 1:
        raise OutOfRange("n must be >= 1")
    if math.isinf(alpha):
        return s_n / (2.0 * max(1.0 / x0, 1.0))
    return (
        s_n ** (1.0 + 1.0 / alpha)
        * n ** (-1.0 / alpha)
        / (2.0 * max(1.0 / x0, (2.0 * c_star) ** (1.0 / alpha)))
    )


def concentration_bound(x: float, tau: float, sigma: float) -> float:
    """Tail bound 2 exp(-x^2 tau / (4 sigma^2)); values above 1 are returned as-is."""
    if not (x > 0 and tau > 0 and sigma > 0):
        raise OutOfRange("x, tau, sigma must be positive")
    return 2.0 * math.exp(-(x * x) * tau / (4.0 * sigma * sigma))


# ---------------------------------------------------------------------------
# growth-model fitting


@dataclass(frozen=True)
class GrowthFit:
    """Selected growth model with coefficients fitted on its transformed axes."""

    model: str
    parameters: dict
    r_squared: float
    selected_by: str


def _ols(design, y):
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    pred = design @ coef
    rss = float(np.sum((y - pred) ** 2))
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if rss < 1e-30 else (0.0 if tss < 1e-30 else 1.0 - rss / tss)
    return coef, pred, max(0.0, min(1.0, r2))


def fit_growth(points) -> GrowthFit:
    """Pick the growth law best supporting (n, value) pairs.

    Each candidate is fitted by least squares on its own transformed axes
    (value against 1, ln n, (ln n)^2; ln value against ln n for the power
    law).  Selection minimizes an Akaike score on original-scale residuals,
    2k + m ln(RSS/m), which keeps raw-axis and log-axis fits comparable.
    r_squared is reported on the winner's own transformed axes.
    """
    pts = sorted((float(n), float(v)) for n, v in points)
    ns = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if len(ns) < 4 or len(set(ns.tolist())) < 4:
        raise OutOfRange("need at least 4 points with distinct n")
    if np.any(ns <= 0):
        raise OutOfRange("n values must be positive")
    if np.all(vs == vs[0]):
        return GrowthFit("constant", {"level": float(vs[0])}, 1.0, "degenerate: all values equal")

    m = len(ns)
    L = np.log(ns)
    ones = np.ones(m)
    candidates = {}

    coef, pred, r2 = _ols(ones[:, None], vs)
    candidates["constant"] = ({"level": float(coef[0])}, pred, r2, 1)

    coef, pred, r2 = _ols(np.column_stack([ones, L]), vs)
    candidates["log"] = ({"intercept": float(coef[0]), "slope": float(coef[1])}, pred, r2, 2)

    coef, pred, r2 = _ols(np.column_stack([ones, L**2]), vs)
    candidates["log_squared"] = ({"intercept": float(coef[0]), "slope": float(coef[1])}, pred, r2, 2)

    if np.all(vs > 0):
        coef, pred_log, r2 = _ols(np.column_stack([ones, L]), np.log(vs))
        candidates["power_times_polylog"] = (
            {"coefficient": float(math.exp(coef[0])), "exponent": float(coef[1])},
            np.exp(pred_log),
            r2,
            2,
        )

    best_name, best_aic = None, None
    for name in GROWTH_MODELS:
        if name not in candidates:
            continue
        params, pred, r2, k = candidates[name]
        rss = float(np.sum((vs - pred) ** 2))
        aic = m * math.log(max(rss, 1e-300) / m) + 2 * k
        if best_aic is None or aic < best_aic - 1e-12:
            best_name, best_aic = name, aic
    params, _, r2, _ = candidates[best_name]
    return GrowthFit(
        best_name,
        params,
        r2,
        "min AIC = 2k + m ln(RSS/m) on original-scale residuals",
    )


# ---------------------------------------------------------------------------
# upper envelopes assembled from the proof constants


@dataclass(frozen=True)
class RateDescriptor:
    """Growth order of a bound: constant, ln n, (ln n)^2, or n^e (ln n)^l."""

    kind: str  # one of GROWTH_MODELS
    exponent: float | None = None
    log_exponent: float | None = None
    note: str = ""

    def __str__(self):
        if self.kind == "constant":
            return "finite (constant)"
        if self.kind == "log":
            return "ln n"
        if self.kind == "log_squared":
            return "(ln n)^2"
        s = f"n^{self.exponent:g}"
        if self.log_exponent:
            s += f" (ln n)^{self.log_exponent:g}"
        return s


def _kappa(a: float) -> float:
    """(a/2)^(a/2) / (1 - 2^-a) + Gamma(a/2) / (2 ln 2)."""
    return (a / 2.0) ** (a / 2.0) / (1.0 - 2.0 ** (-a)) + gamma_fn(a / 2.0) / (2.0 * math.log(2.0))


def _K_p(p: float) -> float:
    """Residual constant of the inflated-threshold analysis; depends on p only.

    8 sum t^-2 + 2 sum t^-6 + sum exp(-p^2 t / 32), all over t >= 2, evaluated
    in closed form (zeta values and a geometric series).
    """
    r = math.exp(-p * p / 32.0)
    return 8.0 * (zeta(2) - 1.0) + 2.0 * (zeta(6) - 1.0) + r * r / (1.0 - r)


def _power_sum(coef: float, expo: float, n: int) -> float:
    """sum_{t=1}^{n} (coef / t)^expo, chunked to bound memory."""
    total = 0.0
    step = 1_000_000
    for lo in range(1, n + 1, step):
        hi = min(n, lo + step - 1)
        t = np.arange(lo, hi + 1, dtype=float)
        total += float(np.sum((coef / t) ** expo))
    return total


def _forced_envelope(alpha, metric, n, margin, sigma, q):
    """Proof-assembled numeric envelope for the forced-sampling policy."""
    nu, nu0 = thresholds(q)
    if n < nu0:
        return None, f"horizon {n} below nu0 = {nu0:.6g}"
    p1, x0, c_star = margin.p1, margin.x0, margin.c_star
    s2 = sigma * sigma
    # tail of the low-pull-count probability, summed over t (geometric pieces)
    low_pulls = 1.0 / (1.0 - math.exp(-p1 * p1 / 64.0)) + (math.pi**2 / 3.0) * math.exp(
        (x0 * x0 / (4.0 * s2)) * (1.0 + math.log(nu + 1.0) / q)
    )
    r = math.exp(-x0 * x0 * p1 / (8.0 * s2))
    far_estimate = 2.0 * r / (1.0 - r)  # sum over t >= 1 of 2 exp(-x0^2 p1 t / (8 s^2))
    base = 1.0 + math.log(n + 1.0) / q + nu0 + low_pulls

    mu = margin.mu
    if metric == "regret" and mu is None:
        return None, "regret envelope needs a mean-absolute-deviation bound mu"
    trivial_step = 1.0 if metric == "isr" else mu  # per-step cost before the tail bound bites
    a_eff = alpha if metric == "isr" else alpha + 1.0
    if math.isinf(a_eff) or a_eff > 2.0:
        # geometric-tail form of the near-boundary sum; vanishes at alpha = inf
        if math.isinf(a_eff):
            near = 0.0
        else:
            near = 2.0 * c_star * x0**a_eff * (
                2.0 / (1.0 - 2.0 ** (2.0 - a_eff)) * (32.0 * s2 / (x0 * x0 * p1)) ** (a_eff / (a_eff - 2.0))
                + 4.0 / (3.0 * (1.0 - math.exp(-1.0)))
            )
    else:
        near = trivial_step * 16.0 * a_eff * s2 / (x0 * x0 * p1) + 6.0 * c_star * _kappa(
            a_eff
        ) * _power_sum(32.0 * s2 / p1, a_eff / 2.0, int(n))
    if metric == "isr":
        return base + far_estimate + near, "proof-assembled"
    return mu * base + mu * far_estimate + near, "proof-assembled"


def _nearly_myopic_envelope(alpha, metric, n, margin, sigma, c):
    """Numeric envelope for the inflated-threshold policy at the theory coefficient."""
    if c is not None and not math.isclose(c, theory_coefficient(sigma), rel_tol=1e-9):
        return None, "numeric envelope holds only at c = 2 sigma sqrt(3)"
    if metric == "regret" and margin.mu is None:
        return None, "regret envelope needs a mean-absolute-deviation bound mu"
    p, c_star, x0 = margin.p, margin.c_star, margin.x0
    K = _K_p(p)
    limit = 2.0 if metric == "isr" else 1.0

    def sum_term(power):
        # sum over t of (8 sqrt(3) sigma sqrt(ln t / (p t)))^power; t = 1 contributes 0
        coef = (8.0 * math.sqrt(3.0) * sigma) ** 2 / p
        total = 0.0
        step = 1_000_000
        for lo in range(2, int(n) + 1, step):
            hi = min(int(n), lo + step - 1)
            t = np.arange(lo, hi + 1, dtype=float)
            total += float(np.sum((coef * np.log(t) / t) ** (power / 2.0)))
        return total

    if alpha <= limit:
        t0, _ = theorem1_times(p, sigma, x0, alpha)
        head = max(t0, 2)
        if metric == "isr":
            value = head + c_star * sum_term(alpha) + K
        else:
            value = margin.mu * (head + K) + c_star * sum_term(alpha + 1.0)
    else:
        a_scan = alpha if metric == "isr" else alpha + 1.0
        t0, t_a = theorem1_times(p, sigma, x0, a_scan)
        head = max(t0, t_a or 1, 2)
        gap = alpha - limit  # alpha - 2 for isr, alpha - 1 for regret
        tail = 0.0 if math.isinf(alpha) else 4.0 * c_star / gap
        if metric == "isr":
            value = head + tail + K
        else:
            value = margin.mu * (head + K) + tail
    return value, "proof-assembled"


def upper_envelope(
    alpha: float,
    policy_kind: str,
    metric_kind: str,
    n: int,
    margin: MarginParams,
    sigma: float,
    q: float | None = None,
    c: float | None = None,
) -> tuple[RateDescriptor, float | None]:
    """Growth order, and where evaluable a numeric bound, for a policy/metric.

    policy_kind is "nearly_myopic" or "forced"; metric_kind is "isr" or
    "regret".  The forced policy additionally requires x0^2 >= 12 q sigma^2.
    Numeric values assemble the proof-level constants and are tagged
    "proof-assembled" in the descriptor note.
    """
    if metric_kind not in ("isr", "regret"):
        raise OutOfRange(f"metric_kind must be isr or regret, got {metric_kind!r}")
    if not alpha > 0:
        raise OutOfRange("alpha must be positive (may be inf)")

    if policy_kind == "nearly_myopic":
        if metric_kind == "isr":
            if alpha > 2.0:
                desc = RateDescriptor("constant")
            elif alpha == 2.0:
                desc = RateDescriptor("log_squared")
            else:
                desc = RateDescriptor(
                    "power_times_polylog", exponent=1.0 - alpha / 2.0, log_exponent=alpha / 2.0
                )
        else:
            if alpha > 1.0:
                desc = RateDescriptor("constant")
            elif alpha == 1.0:
                desc = RateDescriptor("log_squared")
            else:
                desc = RateDescriptor(
                    "power_times_polylog",
                    exponent=(1.0 - alpha) / 2.0,
                    log_exponent=(1.0 + alpha) / 2.0,
                )
        value, note = _nearly_myopic_envelope(alpha, metric_kind, n, margin, sigma, c)
    elif policy_kind == "forced":
        if q is None:
            raise OutOfRange("forced envelope requires the design parameter q")
        if margin.x0**2 < 12.0 * q * sigma * sigma:
            raise ConditionViolated(
                f"x0^2 = {margin.x0 ** 2:.6g} < 12 q sigma^2 = {12.0 * q * sigma * sigma:.6g}"
            )
        if metric_kind == "isr":
            desc = RateDescriptor("log") if alpha >= 2.0 else RateDescriptor(
                "power_times_polylog", exponent=1.0 - alpha / 2.0
            )
        else:
            desc = RateDescriptor("log") if alpha >= 1.0 else RateDescriptor(
                "power_times_polylog", exponent=(1.0 - alpha) / 2.0
            )
        value, note = _forced_envelope(alpha, metric_kind, n, margin, sigma, q)
    else:
        raise OutOfRange(f"no envelope for policy kind {policy_kind!r}")

    if note:
        desc = RateDescriptor(desc.kind, desc.exponent, desc.log_exponent, note)
    return desc, value

"""Bandit environments: covariate laws, reward model, margin certificates.

The environment never owns randomness.  Covariates are drawn by inverse-CDF
transform of caller-supplied uniforms, and the Gaussian reward noise is
generated by the simulator and passed in, so that identical uniform streams
yield identical sample paths under every policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Uniform",
    "TwoPoint",
    "PowerMargin",
    "AdversarialMargin",
    "CovariateDistribution",
    "BanditInstance",
    "MarginParams",
    "NotCertifiable",
    "InfeasibleConstruction",
    "sample_covariate",
    "reward_arm1",
    "margin_params",
    "adversarial_pair",
]

# Certificates keep the boundary-vicinity radius at or below this value so the
# applicability condition of the forced-sampling theory can be evaluated
# against a definite number.
X0_CAP = 0.25
# x0 must lie strictly inside (0, 1/2).
X0_EDGE_EPS = 1e-9

MASS_TOL = 1e-12


class NotCertifiable(ValueError):
    """No (alpha, C*, x0, p, p1, mu) certificate exists for this (dist, theta)."""


class InfeasibleConstruction(ValueError):
    """Adversarial construction parameters leave negative residual mass."""


@dataclass(frozen=True)
class Uniform:
    """Uniform law on [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"uniform requires lo < hi, got [{self.lo}, {self.hi}]")

    def inverse_cdf(self, u):
        return self.lo + u * (self.hi - self.lo)

    def inverse_cdf_array(self, u):
        return self.lo + u * (self.hi - self.lo)

    def cdf(self, x):
        if x < self.lo:
            return 0.0
        if x >= self.hi:
            return 1.0
        return (x - self.lo) / (self.hi - self.lo)


@dataclass(frozen=True)
class TwoPoint:
    """Two-atom law: x_minus with mass 1 - prob_plus, x_plus with mass prob_plus."""

    x_minus: float
    x_plus: float
    prob_plus: float

    def __post_init__(self):
        if not self.x_minus < self.x_plus:
            raise ValueError("two_point requires x_minus < x_plus")
        if not 0.0 < self.prob_plus < 1.0:
            raise ValueError("two_point requires prob_plus in (0, 1)")

    def inverse_cdf(self, u):
        return self.x_minus if u < 1.0 - self.prob_plus else self.x_plus

    def inverse_cdf_array(self, u):
        return np.where(u < 1.0 - self.prob_plus, self.x_minus, self.x_plus)

    def cdf(self, x):
        if x < self.x_minus:
            return 0.0
        if x < self.x_plus:
            return 1.0 - self.prob_plus
        return 1.0


@dataclass(frozen=True)
class PowerMargin:
    """Density proportional to |x - center|^(alpha-1) on [center - hw, center + hw].

    The normalizer is alpha / (2 hw^alpha), so the mass of a symmetric interval
    of radius x about the center is exactly (x / hw)^alpha.
    """

    alpha: float
    center: float
    half_width: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError("power_margin requires finite alpha > 0")
        if not self.half_width > 0:
            raise ValueError("power_margin requires half_width > 0")

    def inverse_cdf(self, u):
        c, h, a = self.center, self.half_width, self.alpha
        if u < 0.5:
            return c - h * (1.0 - 2.0 * u) ** (1.0 / a)
        return c + h * (2.0 * u - 1.0) ** (1.0 / a)

    def inverse_cdf_array(self, u):
        c, h, a = self.center, self.half_width, self.alpha
        lo = c - h * np.abs(1.0 - 2.0 * u) ** (1.0 / a)
        hi = c + h * np.abs(2.0 * u - 1.0) ** (1.0 / a)
        return np.where(u < 0.5, lo, hi)

    def cdf(self, x):
        c, h, a = self.center, self.half_width, self.alpha
        if x <= c - h:
            return 0.0
        if x >= c + h:
            return 1.0
        if x < c:
            return 0.5 * (1.0 - ((c - x) / h) ** a)
        return 0.5 * (1.0 + ((x - c) / h) ** a)

    def density(self, x):
        c, h, a = self.center, self.half_width, self.alpha
        if x < c - h or x > c + h:
            return 0.0
        return a * abs(x - c) ** (a - 1.0) / (2.0 * h**a)


@dataclass(frozen=True)
class AdversarialMargin:
    """Worst-case covariate law for a decision-boundary pair {0, delta}.

    Two polynomial pieces, 0.5 * c_star * alpha * |x|^(alpha-1) on
    [-x0, delta/2] and 0.5 * c_star * alpha * |x - delta|^(alpha-1) on
    [delta/2, delta + x0], with the residual mass split between two atoms
    placed strictly outside [-x0, delta + x0].  The same law is shared by the
    two instances theta = 0 and theta = delta.
    """

    alpha: float
    c_star: float
    x0: float
    delta: float
    atom_left: float
    atom_right: float

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError("adversarial_margin requires finite alpha > 0")
        if not self.c_star > 0:
            raise ValueError("adversarial_margin requires c_star > 0")
        if not 0.0 < self.x0 < 0.5:
            raise ValueError("adversarial_margin requires x0 in (0, 1/2)")
        if not self.delta > 0:
            raise ValueError("adversarial_margin requires delta > 0")
        if self.interval_mass >= 1.0 + MASS_TOL or self.atom_mass < -MASS_TOL:
            raise InfeasibleConstruction(
                f"piece mass {self.interval_mass:.6g} leaves no residual for the atoms"
            )
        if not (self.atom_left < -self.x0 and self.atom_right > self.delta + self.x0):
            raise ValueError("atoms must lie strictly outside [-x0, delta + x0]")

    @property
    def interval_mass(self):
        a, c = self.alpha, self.c_star
        return c * (self.x0**a + (self.delta / 2.0) ** a)

    @property
    def atom_mass(self):
        """Mass of each of the two atoms."""
        return (1.0 - self.interval_mass) / 2.0

    def cdf(self, x):
        a, c, x0, d = self.alpha, self.c_star, self.x0, self.delta
        m = self.atom_mass
        if x < self.atom_left:
            return 0.0
        if x < -x0:
            return m
        if x <= 0.0:
            return m + 0.5 * c * (x0**a - (-x) ** a)
        if x <= d / 2.0:
            return m + 0.5 * c * (x0**a + x**a)
        if x <= d:
            return m + 0.5 * c * (x0**a + 2.0 * (d / 2.0) ** a - (d - x) ** a)
        if x <= d + x0:
            return m + 0.5 * c * (x0**a + 2.0 * (d / 2.0) ** a + (x - d) ** a)
        if x < self.atom_right:
            return 1.0 - m
        return 1.0

    def inverse_cdf(self, u):
        a, c, x0, d = self.alpha, self.c_star, self.x0, self.delta
        m = self.atom_mass
        if u < m:
            return self.atom_left
        v = u - m
        m_left = 0.5 * c * x0**a
        m_half = 0.5 * c * (d / 2.0) ** a
        if v <= m_left:
            return -((x0**a - 2.0 * v / c) ** (1.0 / a))
        v -= m_left
        if v <= m_half:
            return (2.0 * v / c) ** (1.0 / a)
        v -= m_half
        if v <= m_half:
            return d - (((d / 2.0) ** a - 2.0 * v / c) ** (1.0 / a))
        v -= m_half
        if v <= m_left:
            return d + (2.0 * v / c) ** (1.0 / a)
        return self.atom_right

    def inverse_cdf_array(self, u):
        a, c, x0, d = self.alpha, self.c_star, self.x0, self.delta
        m = self.atom_mass
        m_left = 0.5 * c * x0**a
        m_half = 0.5 * c * (d / 2.0) ** a
        v = u - m
        inv = 1.0 / a
        w1 = -np.clip(x0**a - 2.0 * v / c, 0.0, None) ** inv
        w2 = np.clip(2.0 * (v - m_left) / c, 0.0, None) ** inv
        w3 = d - np.clip((d / 2.0) ** a - 2.0 * (v - m_left - m_half) / c, 0.0, None) ** inv
        w4 = d + np.clip(2.0 * (v - m_left - 2.0 * m_half) / c, 0.0, None) ** inv
        return np.select(
            [v < 0.0, v <= m_left, v <= m_left + m_half, v <= m_left + 2.0 * m_half,
             v <= 2.0 * (m_left + m_half)],
            [self.atom_left, w1, w2, w3, w4],
            default=self.atom_right,
        )


CovariateDistribution = Union[Uniform, TwoPoint, PowerMargin, AdversarialMargin]


@dataclass(frozen=True)
class BanditInstance:
    """Environment with unknown location theta, noise scale sigma, covariate law."""

    theta: float
    sigma: float
    covariate: CovariateDistribution

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


def sample_covariate(dist: CovariateDistribution, u: float) -> float:
    """One covariate draw from a single uniform variate (inverse-CDF transform)."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"uniform variate out of range: {u}")
    return dist.inverse_cdf(u)


def reward_arm1(instance: BanditInstance, x: float, eps: float) -> float:
    """Arm-1 reward x - theta + eps; arm 0 pays identically zero."""
    return x - instance.theta + eps


@dataclass(frozen=True)
class MarginParams:
    """Class-membership certificate (alpha, C*, x0, p, p1, mu).

    Guarantees, for the distribution it was issued for:
      * mass of (theta - x, theta + x) is at most c_star * x**alpha for
        0 < x <= x0,
      * p <= P[theta, inf) < 1 and p1 = p - c_star * x0**alpha > 0,
      * E|X - theta| <= mu (when mu is not None).
    alpha may be math.inf (boundary vicinity carries zero mass).
    """

    alpha: float
    c_star: float
    x0: float
    p: float
    p1: float
    mu: float | None = None

    def __post_init__(self):
        if not self.p1 > 0:
            raise ValueError("certificate requires p1 > 0")
        if self.mu is not None and self.mu < 0:
            raise ValueError("mu must be nonnegative")


def _x0_with_margin(alpha, c_star, p, cap=X0_CAP):
    """Largest x0 <= cap keeping p1 = p - c_star * x0**alpha >= p / 2."""
    return min(cap, (p / (2.0 * c_star)) ** (1.0 / alpha))


def _margin_uniform(dist: Uniform, theta):
    if not dist.lo < theta < dist.hi:
        raise NotCertifiable(f"theta={theta} not strictly inside [{dist.lo}, {dist.hi}]")
    width = dist.hi - dist.lo
    c_star = 2.0 / width
    p = (dist.hi - theta) / width
    x0 = _x0_with_margin(1.0, c_star, p)
    mu = ((theta - dist.lo) ** 2 + (dist.hi - theta) ** 2) / (2.0 * width)
    return MarginParams(1.0, c_star, x0, p, p - c_star * x0, mu)


def _margin_two_point(dist: TwoPoint, theta):
    if not dist.x_minus < theta < dist.x_plus:
        raise NotCertifiable(f"theta={theta} not strictly between the atoms")
    p = dist.prob_plus
    x0 = min(theta - dist.x_minus, dist.x_plus - theta, 0.5 - X0_EDGE_EPS)
    mu = (1.0 - p) * abs(dist.x_minus - theta) + p * abs(dist.x_plus - theta)
    # x0 < 1 makes x0**inf = 0, so p1 = p.
    return MarginParams(math.inf, 1.0, x0, p, p, mu)


def _margin_power(dist: PowerMargin, theta):
    a, c, h = dist.alpha, dist.center, dist.half_width
    if not c - h < theta < c + h:
        raise NotCertifiable(f"theta={theta} not strictly inside the support")
    mu = a * h / (a + 1.0) + abs(theta - c) ** (a + 1.0) / (h**a * (a + 1.0))
    if theta == c:
        c_star = h**-a
        p = 0.5
        x0 = _x0_with_margin(a, c_star, p)
        return MarginParams(a, c_star, x0, p, p - c_star * x0**a, mu)
    # Off-center the local exponent is 1; certify with a sup-density bound on
    # the vicinity.  For a < 1 the vicinity must exclude the singular center.
    dist_c = abs(theta - c)
    p = 1.0 - dist.cdf(theta)
    x0 = X0_CAP if a >= 1.0 else min(X0_CAP, dist_c / 2.0)
    for _ in range(200):
        if x0 < 1e-12:
            raise NotCertifiable("no usable vicinity radius for off-center theta")
        reach = dist_c + x0 if a >= 1.0 else dist_c - x0
        reach = min(reach, h) if a >= 1.0 else reach
        c_star = 2.0 * a * reach ** (a - 1.0) / (2.0 * h**a)
        if p - c_star * x0 >= p / 2.0:
            return MarginParams(1.0, c_star, x0, p, p - c_star * x0, mu)
        x0 *= 0.5
    raise NotCertifiable("vicinity shrink did not reach a valid certificate")


def _adversarial_cert_ratio(alpha, x0, delta):
    """sup over x in (0, x0] of interval mass / (c_star x^alpha), exact.

    Equals 1 for alpha >= 1.  For alpha < 1 the mass of (-x, x) exceeds
    c_star x^alpha once x passes delta/2; the ratio peaks at x = 3 delta / 2.
    """
    if alpha >= 1.0:
        return 1.0
    if x0 <= delta / 2.0:
        return 1.0
    if x0 >= 1.5 * delta:
        return 0.5 * (1.0 + 3.0 ** (1.0 - alpha))
    r = delta / x0
    if x0 <= delta:
        val = 0.5 * (1.0 + 2.0 ** (1.0 - alpha) * r**alpha - (r - 1.0) ** alpha)
    else:
        val = 0.5 * (1.0 + (1.0 - r) ** alpha + 2.0 ** (1.0 - alpha) * r**alpha)
    return max(1.0, val)


def _margin_adversarial(dist: AdversarialMargin, theta):
    if not (abs(theta) <= 1e-12 or abs(theta - dist.delta) <= 1e-12):
        raise NotCertifiable("adversarial law certifies only theta in {0, delta}")
    theta = 0.0 if abs(theta) <= 1e-12 else dist.delta
    a = dist.alpha
    c_star = dist.c_star * _adversarial_cert_ratio(a, dist.x0, dist.delta)
    p = 1.0 - dist.cdf(theta)
    if not 0.0 < p < 1.0:
        raise NotCertifiable(f"P[theta, inf) = {p} violates 0 < p < 1")
    # shared vicinity radius: both boundary locations must keep a usable
    # margin, so the radius is selected from the smaller tail mass; the
    # construction's own radius is kept whenever it already works
    p_min = min(1.0 - dist.cdf(0.0), 1.0 - dist.cdf(dist.delta))
    if p_min - c_star * dist.x0**a > 0.0:
        x0 = dist.x0
    else:
        x0 = min(dist.x0, (p_min / (2.0 * c_star)) ** (1.0 / a))
    p1 = p - c_star * x0**a
    if not p1 > 0:
        raise NotCertifiable(f"p1 = {p1:.6g} <= 0 for the shared vicinity radius")
    # Both pieces are mirror images about delta/2, so the piece part of
    # E|X - theta| is the same for theta = 0 and theta = delta.
    d, r, cs = dist.delta, dist.x0, dist.c_star
    pieces = (
        0.5 * cs * a / (a + 1.0) * (r ** (a + 1.0) + (d / 2.0) ** (a + 1.0))
        + 0.5 * cs * a * (r ** (a + 1.0) - (d / 2.0) ** (a + 1.0)) / (a + 1.0)
        + 0.5 * cs * d * (r**a + (d / 2.0) ** a)
    )
    mu = pieces + dist.atom_mass * (abs(dist.atom_left - theta) + abs(dist.atom_right - theta))
    return MarginParams(a, c_star, x0, p, p1, mu)


def margin_params(dist: CovariateDistribution, theta: float) -> MarginParams:
    """Closed-form certificate placing (dist, theta) in its margin class."""
    if isinstance(dist, Uniform):
        return _margin_uniform(dist, theta)
    if isinstance(dist, TwoPoint):
        return _margin_two_point(dist, theta)
    if isinstance(dist, PowerMargin):
        return _margin_power(dist, theta)
    if isinstance(dist, AdversarialMargin):
        return _margin_adversarial(dist, theta)
    raise TypeError(f"unknown covariate family: {type(dist).__name__}")


def adversarial_pair(
    alpha: float, c_star: float, x0: float, sigma: float, n: int
) -> tuple[BanditInstance, BanditInstance, float]:
    """Hardest-to-separate instance pair at horizon n.

    Returns (theta=0 instance, theta=delta* instance, delta*) sharing one
    adversarial covariate law, with delta* = sigma * sqrt(alpha / n).
    """
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError("alpha must be finite and positive")
    if n < 1:
        raise ValueError("n must be a positive integer")
    delta = sigma * math.sqrt(alpha / n)
    if c_star * (x0**alpha + (delta / 2.0) ** alpha) >= 1.0:
        raise InfeasibleConstruction(
            f"c_star (x0^a + (delta/2)^a) = "
            f"{c_star * (x0 ** alpha + (delta / 2.0) ** alpha):.6g} >= 1; "
            f"n = {n} is too small for alpha = {alpha}, x0 = {x0}"
        )
    dist = AdversarialMargin(
        alpha=alpha,
        c_star=c_star,
        x0=x0,
        delta=delta,
        atom_left=-(x0 + 1.0),
        atom_right=delta + x0 + 1.0,
    )
    return (
        BanditInstance(0.0, sigma, dist),
        BanditInstance(delta, sigma, dist),
        delta,
    )

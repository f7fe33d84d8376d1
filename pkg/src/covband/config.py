"""Strict JSON experiment configuration.

Unknown fields are fatal at every level: a silently ignored typo in a policy
parameter would invalidate a scientific comparison.
"""

from __future__ import annotations

import json
from importlib import resources

from .env import AdversarialMargin, BanditInstance, PowerMargin, TwoPoint, Uniform
from .policy import ForcedSampling, Myopic, NearlyMyopic, Oracle
from .schedule import build_schedule
from .sim import ExperimentConfig

__all__ = ["ConfigError", "ParseError", "ValidationError", "parse_config", "paper_setup"]


class ConfigError(ValueError):
    """Base class for configuration rejection; .path names the offending field."""

    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class ParseError(ConfigError):
    """Document is not well-formed JSON."""


class ValidationError(ConfigError):
    """Well-formed document violating a field type or invariant."""


def _require(obj, path, fields, optional=()):
    if not isinstance(obj, dict):
        raise ValidationError(f"expected an object, got {type(obj).__name__}", path)
    unknown = set(obj) - set(fields) - set(optional)
    if unknown:
        raise ValidationError(f"unknown fields: {sorted(unknown)}", path)
    missing = [f for f in fields if f not in obj]
    if missing:
        raise ValidationError(f"missing required fields: {missing}", path)


def _number(obj, path):
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ValidationError(f"expected a number, got {obj!r}", path)
    return float(obj)


def _integer(obj, path):
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ValidationError(f"expected an integer, got {obj!r}", path)
    return obj


def _covariate(obj, path):
    if not isinstance(obj, dict) or "family" not in obj:
        raise ValidationError("covariate must be an object with a 'family' field", path)
    family = obj["family"]
    try:
        if family == "uniform":
            _require(obj, path, ["family", "lo", "hi"])
            return Uniform(_number(obj["lo"], f"{path}.lo"), _number(obj["hi"], f"{path}.hi"))
        if family == "two_point":
            _require(obj, path, ["family", "x_minus", "x_plus", "prob_plus"])
            return TwoPoint(
                _number(obj["x_minus"], f"{path}.x_minus"),
                _number(obj["x_plus"], f"{path}.x_plus"),
                _number(obj["prob_plus"], f"{path}.prob_plus"),
            )
        if family == "power_margin":
            _require(obj, path, ["family", "alpha", "center", "half_width"])
            return PowerMargin(
                _number(obj["alpha"], f"{path}.alpha"),
                _number(obj["center"], f"{path}.center"),
                _number(obj["half_width"], f"{path}.half_width"),
            )
        if family == "adversarial_margin":
            _require(
                obj,
                path,
                ["family", "alpha", "c_star", "x0", "delta"],
                optional=["atom_left", "atom_right"],
            )
            x0 = _number(obj["x0"], f"{path}.x0")
            delta = _number(obj["delta"], f"{path}.delta")
            return AdversarialMargin(
                alpha=_number(obj["alpha"], f"{path}.alpha"),
                c_star=_number(obj["c_star"], f"{path}.c_star"),
                x0=x0,
                delta=delta,
                atom_left=_number(obj.get("atom_left", -(x0 + 1.0)), f"{path}.atom_left"),
                atom_right=_number(
                    obj.get("atom_right", delta + x0 + 1.0), f"{path}.atom_right"
                ),
            )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ValidationError(str(exc), path) from exc
    raise ValidationError(f"unknown covariate family {family!r}", f"{path}.family")


def _policy(obj, path, instance, max_horizon):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValidationError("policy must be an object with a 'kind' field", path)
    kind = obj["kind"]
    try:
        if kind == "oracle":
            _require(obj, path, ["kind"])
            return Oracle(theta=instance.theta)
        if kind == "myopic":
            _require(obj, path, ["kind"])
            return Myopic()
        if kind == "nearly_myopic":
            _require(obj, path, ["kind"], optional=["c", "sigma"])
            return NearlyMyopic(
                c=_number(obj.get("c", 1.0), f"{path}.c"),
                sigma=_number(obj.get("sigma", instance.sigma), f"{path}.sigma"),
            )
        if kind == "forced":
            _require(obj, path, ["kind", "q"])
            q = _number(obj["q"], f"{path}.q")
            return ForcedSampling(schedule=build_schedule(q, max_horizon))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ValidationError(str(exc), path) from exc
    raise ValidationError(f"unknown policy kind {kind!r}", f"{path}.kind")


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate an experiment document (strict mode)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    _require(
        doc,
        "$",
        ["instance", "policies", "horizons", "replications", "seed"],
        optional=["record_trajectories"],
    )
    inst_obj = doc["instance"]
    _require(inst_obj, "$.instance", ["theta", "sigma", "covariate"])
    try:
        instance = BanditInstance(
            theta=_number(inst_obj["theta"], "$.instance.theta"),
            sigma=_number(inst_obj["sigma"], "$.instance.sigma"),
            covariate=_covariate(inst_obj["covariate"], "$.instance.covariate"),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ValidationError(str(exc), "$.instance") from exc

    horizons = doc["horizons"]
    if not isinstance(horizons, list) or not horizons:
        raise ValidationError("horizons must be a nonempty array", "$.horizons")
    horizons = tuple(_integer(h, f"$.horizons[{i}]") for i, h in enumerate(horizons))
    if any(h < 1 for h in horizons):
        raise ValidationError("horizons must be positive", "$.horizons")
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValidationError("horizons must be strictly increasing", "$.horizons")

    policies_obj = doc["policies"]
    if not isinstance(policies_obj, list) or not policies_obj:
        raise ValidationError("policies must be a nonempty array", "$.policies")
    policies = tuple(
        _policy(p, f"$.policies[{i}]", instance, horizons[-1])
        for i, p in enumerate(policies_obj)
    )

    record = doc.get("record_trajectories", False)
    if not isinstance(record, bool):
        raise ValidationError("record_trajectories must be a boolean", "$.record_trajectories")

    try:
        return ExperimentConfig(
            instance=instance,
            policies=policies,
            horizons=horizons,
            replications=_integer(doc["replications"], "$.replications"),
            master_seed=_integer(doc["seed"], "$.seed"),
            record_trajectories=record,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ValidationError(str(exc)) from exc


def paper_setup(name: str) -> str:
    """Text of a shipped reference setup, 'i' or 'ii'."""
    if name not in ("i", "ii"):
        raise ValueError(f"unknown setup {name!r}; expected 'i' or 'ii'")
    return (resources.files("covband") / "configs" / f"paper_setup_{name}.json").read_text()

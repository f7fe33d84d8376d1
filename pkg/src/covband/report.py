"""Run artifacts: delimited outputs, plot-data tables, figures, manifest.

Data files contain only data and are byte-identical across reruns of the
same config; floats carry 17 significant digits.  Figures are rendered next
to the delimited output for quick inspection but the CSVs remain the
authoritative record.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from . import __version__
from .sim import AggregateStats, ExperimentResult

__all__ = [
    "write_per_replication_csv",
    "write_aggregate_csv",
    "write_plotdata_csv",
    "render_curves",
    "render_boxplot",
    "write_manifest",
]

CI_FACTOR = 1.96


def _fmt(x) -> str:
    return f"{x:.17g}"


def write_per_replication_csv(path, result: ExperimentResult) -> None:
    lines = ["policy,horizon,replication,regret,t_inf,pulls"]
    for i, pol in enumerate(result.policies):
        for j, n in enumerate(result.horizons):
            for r in range(result.regret.shape[2]):
                lines.append(
                    f"{pol},{n},{r},{_fmt(result.regret[i, j, r])},"
                    f"{result.t_inf[i, j, r]},{result.pulls[i, j, r]}"
                )
    Path(path).write_text("\n".join(lines) + "\n")


def write_aggregate_csv(path, agg: AggregateStats) -> None:
    lines = ["policy,horizon,mean_regret,sd_regret,se_regret,mean_tinf,sd_tinf,se_tinf,reps"]
    for i, pol in enumerate(agg.policies):
        for j, n in enumerate(agg.horizons):
            lines.append(
                ",".join(
                    [
                        pol,
                        str(n),
                        _fmt(agg.mean_regret[i, j]),
                        _fmt(agg.sd_regret[i, j]),
                        _fmt(agg.se_regret[i, j]),
                        _fmt(agg.mean_tinf[i, j]),
                        _fmt(agg.sd_tinf[i, j]),
                        _fmt(agg.se_tinf[i, j]),
                        str(agg.reps),
                    ]
                )
            )
    Path(path).write_text("\n".join(lines) + "\n")


def write_plotdata_csv(path, agg: AggregateStats, metric: str) -> None:
    """Per-policy curve with a 95% band: policy,n,mean,ci_lo,ci_hi."""
    mean, se = _metric_arrays(agg, metric)
    lines = ["policy,n,mean,ci_lo,ci_hi"]
    for i, pol in enumerate(agg.policies):
        for j, n in enumerate(agg.horizons):
            m, s = mean[i, j], se[i, j]
            lines.append(
                f"{pol},{n},{_fmt(m)},{_fmt(m - CI_FACTOR * s)},{_fmt(m + CI_FACTOR * s)}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def _metric_arrays(agg, metric):
    if metric == "regret":
        return agg.mean_regret, agg.se_regret
    if metric == "isr":
        return agg.mean_tinf, agg.se_tinf
    raise ValueError(f"metric must be 'regret' or 'isr', got {metric!r}")


_METRIC_LABEL = {"regret": "cumulative regret", "isr": "inferior sampling count"}


def render_curves(path, agg: AggregateStats, metric: str, logy: bool = False, title: str = "") -> None:
    mean, se = _metric_arrays(agg, metric)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, pol in enumerate(agg.policies):
        ax.plot(agg.horizons, mean[i], marker="o", markersize=3, label=pol)
        ax.fill_between(
            agg.horizons,
            mean[i] - CI_FACTOR * se[i],
            mean[i] + CI_FACTOR * se[i],
            alpha=0.2,
        )
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("horizon n")
    ax.set_ylabel(_METRIC_LABEL[metric])
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def render_boxplot(path, result: ExperimentResult, metric: str, horizon: int, title: str = "") -> None:
    """Replication spread of one metric at one checkpoint."""
    j = list(result.horizons).index(horizon)
    data = result.regret if metric == "regret" else result.t_inf
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.boxplot(
        [data[i, j, :] for i in range(len(result.policies))],
        tick_labels=list(result.policies),
    )
    ax.set_ylabel(_METRIC_LABEL[metric])
    ax.set_title(title or f"{_METRIC_LABEL[metric]} at n = {horizon}")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)


def write_manifest(path, config_text: str, master_seed: int, outputs, wall_time: float) -> None:
    manifest = {
        "config_digest": hashlib.sha256(config_text.encode()).hexdigest(),
        "tool_version": __version__,
        "master_seed": master_seed,
        "outputs": sorted(str(o) for o in outputs),
        "wall_time": wall_time,
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")

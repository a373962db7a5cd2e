"""Render publication-style figures from a ces-market result bundle.

Four figure types, each fed purely by the bundle's CSV files:

- ``fit``        capital-cost-vs-request curves with quadratic fits
- ``incentives`` per-building cost-reduction bars across models
- ``rsc``        relative-social-cost bars per model
- ``traces``     per-building charging/discharging and state-of-charge lines

Rendering never writes into the bundle directory; output names are
deterministic (``<figure>_<instance>.<ext>``). Selected figures whose CSVs
are absent are reported explicitly, not skipped silently.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["FIGURES", "ReportSpec", "FigureOutcome", "RenderReport", "render"]

FIGURES = ("fit", "incentives", "rsc", "traces")

_REQUIRED = {
    "fit": ("ies_curves.csv", "table_rus_price.csv"),
    "incentives": ("incentives.csv",),
    "rsc": ("table_social_cost.csv",),
    "traces": ("schedules.csv",),
}

_MODEL_ORDER = ("WO_ES", "IES", "VES", "CES", "CMES")


class MalformedCsvError(ValueError):
    """A required CSV exists but cannot be interpreted."""


@dataclass(frozen=True)
class ReportSpec:
    """What to render: bundle directory, figure selection, output format
    ('vector' -> svg, 'raster' -> png), and destination directory."""

    bundle: Path
    figures: tuple[str, ...] = FIGURES
    out_format: str = "vector"
    out_dir: Path = Path(".")
    dpi: int = 150

    @property
    def extension(self) -> str:
        if self.out_format == "vector":
            return "svg"
        if self.out_format == "raster":
            return "png"
        raise ValueError(f"unknown format {self.out_format!r} (vector|raster)")


@dataclass
class FigureOutcome:
    figure: str
    path: Path | None
    counts: dict[str, int] = field(default_factory=dict)
    missing: list[str] = field(default_factory=list)

    @property
    def rendered(self) -> bool:
        return self.path is not None


@dataclass
class RenderReport:
    outcomes: list[FigureOutcome]

    @property
    def written(self) -> list[Path]:
        return [o.path for o in self.outcomes if o.rendered]

    @property
    def missing(self) -> dict[str, list[str]]:
        return {o.figure: o.missing for o in self.outcomes if o.missing}

    @property
    def complete(self) -> bool:
        return all(o.rendered for o in self.outcomes)

    def summary(self) -> str:
        lines = []
        for o in self.outcomes:
            if o.rendered:
                lines.append(f"rendered {o.figure}: {o.path}")
            else:
                lines.append(
                    f"missing inputs for {o.figure}: {', '.join(o.missing)}"
                )
        return "\n".join(lines)


def _read_csv(path: Path) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise MalformedCsvError(f"cannot read {path}: {exc}") from exc
    if rows and None in rows[0]:
        raise MalformedCsvError(f"{path}: ragged rows")
    return rows


def _float(row: dict, key: str, where: Path) -> float:
    try:
        return float(row[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedCsvError(f"{where}: bad value for {key!r}: {row.get(key)!r}") from exc


def _instance_name(bundle: Path) -> str:
    results = bundle / "results.json"
    if results.exists():
        try:
            return str(json.loads(results.read_text())["instance"]["name"])
        except (json.JSONDecodeError, KeyError):
            pass
    return bundle.name


def render(spec: ReportSpec) -> RenderReport:
    """Render every selected figure whose inputs exist; returns a report
    listing written files and missing-input selections."""
    bundle = Path(spec.bundle)
    if not bundle.is_dir():
        raise FileNotFoundError(f"bundle directory {bundle} does not exist")
    unknown = [f for f in spec.figures if f not in FIGURES]
    if unknown:
        raise ValueError(f"unknown figures: {', '.join(unknown)}")
    out_dir = Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = _instance_name(bundle)

    outcomes = []
    for figure in spec.figures:
        missing = [f for f in _REQUIRED[figure] if not (bundle / f).exists()]
        if missing:
            outcomes.append(FigureOutcome(figure, None, missing=missing))
            continue
        target = out_dir / f"{figure}_{name}.{spec.extension}"
        counts = _RENDERERS[figure](bundle, target, spec)
        outcomes.append(FigureOutcome(figure, target, counts=counts))
    return RenderReport(outcomes)


def _save(fig, target: Path, spec: ReportSpec) -> None:
    fig.tight_layout()
    fig.savefig(target, dpi=spec.dpi)
    plt.close(fig)


def _render_fit(bundle: Path, target: Path, spec: ReportSpec) -> dict[str, int]:
    curves = _read_csv(bundle / "ies_curves.csv")
    prices = _read_csv(bundle / "table_rus_price.csv")
    q_hat = {
        row["building"]: float(row["q_hat_ies"])
        for row in prices
        if row.get("q_hat_ies")
    }
    by_building: dict[str, list[tuple[float, float]]] = defaultdict(list)
    points = 0
    for row in curves:
        if not row.get("capital_cost"):
            continue  # infeasible sample
        by_building[row["building"]].append(
            (_float(row, "r", target), _float(row, "capital_cost", target))
        )
        points += 1

    fig, ax = plt.subplots(figsize=(6, 4))
    fits = 0
    for idx, (building, pts) in enumerate(sorted(by_building.items())):
        pts.sort()
        rs = np.array([p[0] for p in pts])
        qs = np.array([p[1] for p in pts])
        color = f"C{idx}"
        ax.plot(rs, qs, "o", ms=4, ls=":", color=color, label=f"{building} sampled")
        if building in q_hat and len(rs) > 1:
            dense = np.linspace(rs.min(), rs.max(), 120)
            ax.plot(dense, q_hat[building] * dense**2, "-", color=color,
                    label=f"{building} fit")
            fits += 1
    ax.set_xlabel("shifted renewable energy r (kWh)")
    ax.set_ylabel("minimum storage capital cost")
    ax.set_title("Standalone storage cost vs. shifted energy, quadratic fit")
    ax.legend(fontsize=7)
    _save(fig, target, spec)
    return {"points": points, "curves": len(by_building), "fits": fits}


def _render_incentives(bundle: Path, target: Path, spec: ReportSpec) -> dict[str, int]:
    rows = _read_csv(bundle / "incentives.csv")
    models = [m for m in _MODEL_ORDER if any(r["model"] == m for r in rows)]
    buildings = sorted({r["building"] for r in rows})
    values = {
        (r["model"], r["building"]): _float(r, "incentive", target) for r in rows
    }
    fig, ax = plt.subplots(figsize=(max(6, 1.2 * len(buildings)), 4))
    width = 0.8 / max(len(models), 1)
    x = np.arange(len(buildings))
    bars = 0
    for k, model in enumerate(models):
        heights = [values.get((model, b), 0.0) for b in buildings]
        ax.bar(x + (k - (len(models) - 1) / 2) * width, heights, width, label=model)
        bars += len(heights)
    ax.set_xticks(x)
    ax.set_xticklabels(buildings, rotation=30, ha="right", fontsize=7)
    ax.set_ylabel("cost reduction vs. no storage")
    ax.set_title("Consumer incentives by model")
    ax.legend(fontsize=8)
    _save(fig, target, spec)
    return {"bars": bars, "rows": len(rows), "models": len(models)}


def _render_rsc(bundle: Path, target: Path, spec: ReportSpec) -> dict[str, int]:
    rows = _read_csv(bundle / "table_social_cost.csv")
    with_rsc = [r for r in rows if r.get("rsc")]
    ordered = [r for m in _MODEL_ORDER for r in with_rsc if r["model"] == m]
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = [r["model"] for r in ordered]
    values = [_float(r, "rsc", target) for r in ordered]
    ax.bar(labels, values, color=[f"C{i}" for i in range(len(labels))])
    ax.axhline(0.0, color="0.4", lw=0.8)
    ax.axhline(1.0, color="0.4", lw=0.8, ls="--")
    ax.set_ylabel("relative social cost")
    ax.set_title("Relative social cost (0 = community optimum, 1 = no storage)")
    _save(fig, target, spec)
    return {"bars": len(ordered), "rows": len(rows)}


def _render_traces(bundle: Path, target: Path, spec: ReportSpec) -> dict[str, int]:
    rows = _read_csv(bundle / "schedules.csv")
    # deterministic choice: first scenario of each model with dispatch data
    models = [m for m in ("VES", "CES", "CMES") if any(r["model"] == m for r in rows)]
    if not models:
        raise MalformedCsvError(f"{target}: schedules.csv has no dispatch rows")
    fig, axes = plt.subplots(
        len(models), 2, figsize=(9, 2.8 * len(models)), squeeze=False
    )
    lines = 0
    for row_idx, model in enumerate(models):
        sub = [r for r in rows if r["model"] == model and r["scenario"] == "0"]
        buildings = sorted({r["building"] for r in sub})
        ax_rate, ax_soc = axes[row_idx]
        for b_idx, building in enumerate(buildings):
            series = sorted(
                (int(r["t"]), _float(r, "p_ch", target) - _float(r, "p_dis", target),
                 _float(r, "e", target))
                for r in sub
                if r["building"] == building
            )
            t = [s[0] for s in series]
            ax_rate.step(t, [s[1] for s in series], where="mid",
                         color=f"C{b_idx}", label=building)
            ax_soc.step(t, [s[2] for s in series], where="mid", color=f"C{b_idx}")
            lines += 2
        ax_rate.set_title(f"{model}: net charging rate (kW)", fontsize=9)
        ax_soc.set_title(f"{model}: stored energy (kWh)", fontsize=9)
        ax_rate.axhline(0.0, color="0.6", lw=0.6)
        ax_rate.legend(fontsize=6)
        for ax in (ax_rate, ax_soc):
            ax.set_xlabel("period")
    _save(fig, target, spec)
    return {"lines": lines, "models": len(models)}


_RENDERERS = {
    "fit": _render_fit,
    "incentives": _render_incentives,
    "rsc": _render_rsc,
    "traces": _render_traces,
}

"""Matplotlib renderings of report data, written next to the delimited output."""
from __future__ import annotations

from pathlib import Path


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_census_figure(rows: list[dict], path: Path) -> Path:
    """Horizontal bars of facet composition (dodecahedral vs hemi) per row."""
    plt = _plt()
    rows = [r for r in rows if r.get("facet_d") is not None]
    if not rows:
        return path
    names = [str(r.get("name", r.get("row", "?"))) for r in rows]
    d = [r["facet_d"] for r in rows]
    h = [r.get("facet_h") or 0 for r in rows]
    fig, ax = plt.subplots(figsize=(8, 0.5 * len(rows) + 1.5))
    y = range(len(rows))
    ax.barh(y, d, color="#44709d", label="dodecahedral")
    ax.barh(y, h, left=d, color="#c25d4e", label="hemi-dodecahedral")
    ax.set_yticks(list(y), names)
    ax.set_xscale("log")
    ax.set_xlabel("facets of the quotient (log scale)")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_catalog_figure(rows: list[dict], path: Path) -> Path:
    """Subgroup order vs row id, verdict-colored."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ok = [r for r in rows if r.get("semisparse")]
    bad = [r for r in rows if not r.get("semisparse")]
    if ok:
        ax.scatter([r["row"] for r in ok], [r["order"] for r in ok],
                   color="#44709d", label="semisparse")
    if bad:
        ax.scatter([r["row"] for r in bad], [r["order"] for r in bad],
                   color="#c25d4e", marker="x", s=60, label="criterion fails")
    ax.set_yscale("log")
    ax.set_xlabel("catalog row")
    ax.set_ylabel("subgroup order (log scale)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_compare_figure(result: dict, path: Path) -> Path:
    """Match / mismatch / missing summary of a report diff."""
    plt = _plt()
    summary = result.get("summary", {})
    labels = ["match", "mismatch", "missing"]
    values = [summary.get(k, 0) for k in labels]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(labels, values, color=["#44709d", "#c25d4e", "#b0a152"])
    for i, v in enumerate(values):
        ax.text(i, v, str(v), ha="center", va="bottom")
    ax.set_ylabel("rows")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_check_figure(checks: list[dict], path: Path) -> Path:
    """Pass/fail/skip overview of a pipeline run."""
    plt = _plt()
    fig, ax = plt.subplots(figsize=(8, 0.45 * len(checks) + 1.2))
    colors = {"PASS": "#44709d", "FAIL": "#c25d4e", "SKIP": "#b0a152"}
    y = range(len(checks))
    ax.barh(y, [1] * len(checks),
            color=[colors.get(c["status"], "#999999") for c in checks])
    ax.set_yticks(list(y), [c["id"] for c in checks])
    ax.set_xticks([])
    for i, c in enumerate(checks):
        ax.text(0.5, i, c["status"], ha="center", va="center", color="white")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path

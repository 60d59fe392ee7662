"""Serialization and plotting for the command line front end."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .pareto import ParetoCurve, SVRegion


def num(v) -> str:
    """Float formatted with 17 significant digits (round-trips exactly)."""
    v = float(v)
    if math.isnan(v) or math.isinf(v):
        raise ValueError("non-finite value in output")
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return format(v, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """JSON with fixed float formatting; keys keep insertion order."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)
               for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def csv_rows(rows, header=None) -> str:
    lines = [",".join(header)] if header else []
    for r in rows:
        lines.append(",".join(num(v) for v in np.atleast_1d(r)))
    return "\n".join(lines) + "\n"


def curve_dict(curve: ParetoCurve) -> dict:
    return {"kind": curve.kind, "orientation": curve.orientation,
            "points": [[float(x), float(y)] for x, y in curve.points],
            "breakpoints": list(curve.breakpoints) if curve.breakpoints else [],
            "flags": list(curve.flags)}


def region_rows(region: SVRegion):
    if region.kind == "bars":
        return [(h, w) for h, w in region.bars], ["height", "width"]
    return [tuple(r) for r in region.sampled], ["y", "x"]


# ---------------------------------------------------------------------------
# figures


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "dualpareto"
    return plt


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = path.suffix.lstrip(".").lower()
    meta = {"Date": None} if fmt == "svg" else {"Software": None}
    fig.savefig(path, format=fmt, metadata=meta)
    return path


def plot_curves(curves: dict, path: Path, title: str = "") -> Path:
    """Draw labelled curves ``{label: ParetoCurve}`` in the (x, y) plane."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    for label, curve in curves.items():
        ax.plot(curve.xs, curve.ys, label=label, lw=1.5)
    ax.set_xlabel("|a|_X")
    ax.set_ylabel("|b|_Y")
    ax.set_xlim(left=0)
    ax.set_ylim(bottom=0)
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_region(region: SVRegion, path: Path, title: str = "") -> Path:
    """Bars of height ``lambda`` and width ``m`` stacked from ``x = 0``, or the sampled outline."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    if region.kind == "bars":
        left = 0.0
        for h, w in region.bars:
            ax.bar(left, h, width=w, align="edge", color="C0", alpha=0.6, edgecolor="C0")
            left += w
        ax.set_xlim(left=min(0.0, ax.get_xlim()[0]))
    else:
        y, x = region.sampled[:, 0], region.sampled[:, 1]
        ax.fill_betweenx(y, 0, x, color="C0", alpha=0.6)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out

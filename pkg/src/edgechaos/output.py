"""Output files: 17-digit CSV, JSON, run manifest with digests, minimal SVG plots."""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path
from xml.sax.saxutils import escape


def fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path, header, rows) -> Path:
    """``rows`` are dicts keyed by ``header`` or plain sequences; ``\\n`` line endings."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        vals = [row[h] for h in header] if isinstance(row, dict) else list(row)
        lines.append(",".join(fmt(v) for v in vals))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, default=_jsonable) + "\n", encoding="utf-8")
    return path


def write_table(path_stem, header, rows, fmt_name: str = "csv") -> Path:
    rows = list(rows)
    if fmt_name == "json":
        recs = [r if isinstance(r, dict) else dict(zip(header, r)) for r in rows]
        return write_json(Path(str(path_stem) + ".json"), recs)
    return write_csv(Path(str(path_stem) + ".csv"), header, rows)


def _jsonable(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, config: dict, started: str, finished: str, seeds, outputs) -> Path:
    """Write ``manifest.json`` atomically (temp file + rename)."""
    out_dir = Path(out_dir)
    manifest = {
        "config": config,
        "started": started,
        "finished": finished,
        "seeds": [int(s) for s in seeds],
        "outputs": [{"path": Path(p).name, "sha256": sha256(p)} for p in outputs],
    }
    fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=".manifest-", suffix=".json")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, default=_jsonable)
        fh.write("\n")
    target = out_dir / "manifest.json"
    os.replace(tmp, target)
    return target


def emit_svg(series, axes: dict, path, width: int = 640, height: int = 420) -> Path:
    """Scatter/line plot as standalone SVG.

    ``series``: list of dicts with ``points`` ([(x, y), ...]), optional
    ``label``, ``style`` ("markers", "line" or "both") and ``color``.
    ``axes``: ``xlabel``, ``ylabel``, ``xscale`` ("linear" or "log").
    Markers are ``<circle>`` elements, lines ``<polyline>``.
    """
    if not series or any(len(s.get("points", ())) == 0 for s in series):
        raise ValueError("emit_svg needs at least one non-empty series")
    logx = axes.get("xscale", "linear") == "log"
    pts = [(x, y) for s in series for x, y in s["points"]]
    if logx and any(x <= 0 for x, _ in pts):
        raise ValueError("log x axis needs positive x values")

    def tx(x):
        return math.log10(x) if logx else x

    xs = [tx(x) for x, _ in pts]
    ys = [y for _, y in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    left, right, top, bottom = 70, 20, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (tx(x) - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1.0 - (y - y0) / (y1 - y0)) * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
           f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle" '
           f'font-size="13">{escape(axes.get("xlabel", ""))}</text>',
           f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="13" '
           f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(axes.get("ylabel", ""))}</text>']
    for value, label in ((y0, f"{y0:.3g}"), (y1, f"{y1:.3g}")):
        out.append(f'<text x="{left - 6}" y="{py(value) + 4:.1f}" text-anchor="end" '
                   f'font-size="11">{label}</text>')
    for value in (x0, x1):
        label = f"{10 ** value:.3g}" if logx else f"{value:.3g}"
        xpix = left + (value - x0) / (x1 - x0) * pw
        out.append(f'<text x="{xpix:.1f}" y="{top + ph + 16}" text-anchor="middle" '
                   f'font-size="11">{label}</text>')
    for i, s in enumerate(series):
        color = s.get("color", colors[i % len(colors)])
        style = s.get("style", "markers")
        coords = [(px(x), py(y)) for x, y in s["points"]]
        if style in ("line", "both") and len(coords) > 1:
            path_pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in coords)
            out.append(f'<polyline points="{path_pts}" fill="none" stroke="{color}"/>')
        if style in ("markers", "both"):
            out.extend(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{color}"/>'
                       for a, b in coords)
        if s.get("label"):
            out.append(f'<text x="{left + 8}" y="{top + 16 + 14 * i}" font-size="11" '
                       f'fill="{color}">{escape(s["label"])}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path

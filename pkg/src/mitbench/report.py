"""Result files: JSON document, flat CSV, SVG heatmaps and a hash manifest.

Every writer is deterministic: identical inputs give identical bytes.

Heatmap colours (ε clipped to [0, 2]):

=========  ===========  ==============================
ε          colour       meaning
=========  ===========  ==============================
0          ``#1a9850``  perfect mitigation
0.5        ``#fee08b``
1          ``#f46d43``  no better than the noisy value
(1, 2]     ``#d73027``  failure region, darkening to
2 and up   ``#4d0019``  ``#4d0019`` at the clip value
empty      ``#d9d9d9``  no defined ε in the cell
=========  ===========  ==============================
"""

import csv
import hashlib
import io
import json
import math
import os
from dataclasses import dataclass

from .benchmark import VolumetricGrid
from .errors import InvalidInputError, NothingToRenderError

SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "svg")
RESULTS_JSON = "results.json"
RESULTS_CSV = "results.csv"
MANIFEST = "manifest.sha256"
CSV_COLUMNS = (
    "class", "method", "n", "d", "circuit_id", "status", "ideal", "noisy", "mitigated",
    "eps_n", "eps_em", "eps_rel", "sigma_eps", "variance", "n_cx", "error",
)
CLIP = 2.0
_OK_STOPS = ((0.0, (0x1A, 0x98, 0x50)), (0.5, (0xFE, 0xE0, 0x8B)), (1.0, (0xF4, 0x6D, 0x43)))
_FAIL_STOPS = ((1.0, (0xD7, 0x30, 0x27)), (2.0, (0x4D, 0x00, 0x19)))
EMPTY_COLOUR = "#d9d9d9"


@dataclass(frozen=True)
class ReportSpec:
    output_dir: str
    formats: tuple = FORMATS

    def __post_init__(self):
        fmts = tuple(self.formats)
        if not fmts or any(f not in FORMATS for f in fmts):
            raise InvalidInputError(f"formats must be a non-empty subset of {FORMATS}")
        object.__setattr__(self, "formats", fmts)


def _clean(x):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _clean(x.item())
    return x


def results_document(grids, config=None):
    """The JSON-ready results document."""
    if not grids:
        raise InvalidInputError("no grids to write")
    summary = {}
    for g in grids:
        cells = [g.cells[k] for k in sorted(g.cells)]
        ok = [c for c in cells if c.summary.get("status") == "ok"]
        summary[g.method] = {
            "cells": len(cells),
            "cells_with_data": len(ok),
            "cells_median_le_1": sum(1 for c in ok if c.summary["median"] <= 1.0),
        }
    return _clean({
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "grids": [g.to_dict() for g in grids],
        "summary": summary,
    })


def dumps_json(doc):
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dumps_csv(grids):
    """One row per circuit per method; an empty cell gets one ``status=empty`` row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for g in grids:
        label = g.circuit_class.label
        for (n, d) in sorted(g.cells):
            cell = g.cells[(n, d)]
            if not cell.records:
                w.writerow([label, g.method, n, d, "", "empty"] + [""] * 9 + [_fmt(cell.error)])
                continue
            for r in cell.records:
                errs = r.get("errors") or {}
                w.writerow([
                    label, g.method, n, d, r["circuit_id"], r["status"], _fmt(r.get("ideal")),
                    _fmt(r.get("noisy")), _fmt(r.get("mitigated")), _fmt(errs.get("eps_n")),
                    _fmt(errs.get("eps_em")), _fmt(errs.get("eps_rel")), _fmt(r.get("sigma_eps")),
                    _fmt(r.get("variance")), _fmt(r.get("n_cx")), _fmt(r.get("error")),
                ])
    return buf.getvalue()


def _lerp(stops, t):
    for (t0, c0), (t1, c1) in zip(stops, stops[1:]):
        if t <= t1:
            u = (t - t0) / (t1 - t0)
            return "#" + "".join(f"{round(a + u * (b - a)):02x}" for a, b in zip(c0, c1))
    return "#" + "".join(f"{c:02x}" for c in stops[-1][1])


def colour(eps):
    """Fill colour for ``eps``; values above 1 use the separate failure ramp."""
    if eps is None:
        return EMPTY_COLOUR
    t = min(max(float(eps), 0.0), CLIP)
    return _lerp(_OK_STOPS, t) if t <= 1.0 else _lerp(_FAIL_STOPS, t)


def render_heatmap_svg(grid):
    """SVG text of one grid: widths n on the vertical axis, depths d across."""
    cells = grid.cells
    if not any(c.summary.get("status") == "ok" for c in cells.values()):
        raise NothingToRenderError(f"every cell of the {grid.method} grid is empty")
    ns = sorted({n for n, _ in cells})
    ds = sorted({d for _, d in cells})
    size, pad_l, pad_t = 60, 60, 40
    legend_w = 150
    width = pad_l + size * len(ds) + 30 + legend_w
    height = max(pad_t + size * len(ns) + 50, 300)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<title>{grid.circuit_class.label} / {grid.method}</title>',
        f'<text x="{pad_l}" y="20" font-size="14">{grid.circuit_class.label}: {grid.method}</text>',
    ]
    for i, n in enumerate(reversed(ns)):
        y = pad_t + i * size
        out.append(f'<text x="{pad_l - 8}" y="{y + size / 2 + 4:g}" text-anchor="end">{n}</text>')
        for j, d in enumerate(ds):
            x = pad_l + j * size
            cell = cells.get((n, d))
            s = cell.summary if cell is not None else {}
            med, worst = s.get("median"), s.get("worst")
            out.append(f'<rect x="{x + 1}" y="{y + 1}" width="{size - 2}" height="{size - 2}" '
                       f'fill="{colour(med)}" stroke="#ffffff"><title>n={n} d={d} median={_fmt(med)} '
                       f'worst={_fmt(worst)}</title></rect>')
            if worst is not None:
                q = size / 4
                out.append(f'<rect x="{x + q:g}" y="{y + q:g}" width="{size / 2:g}" height="{size / 2:g}" '
                           f'fill="{colour(worst)}" stroke="#ffffff"/>')
            else:
                out.append(f'<text x="{x + size / 2:g}" y="{y + size / 2 + 4:g}" text-anchor="middle" '
                           f'fill="#555555">n/a</text>')
    base = pad_t + size * len(ns)
    for j, d in enumerate(ds):
        out.append(f'<text x="{pad_l + j * size + size / 2:g}" y="{base + 16}" text-anchor="middle">{d}</text>')
    out.append(f'<text x="{pad_l + size * len(ds) / 2:g}" y="{base + 36}" text-anchor="middle">depth d</text>')
    out.append(f'<text x="16" y="{pad_t + size * len(ns) / 2:g}" text-anchor="middle" '
               f'transform="rotate(-90 16 {pad_t + size * len(ns) / 2:g})">width n</text>')
    out.extend(_legend(pad_l + size * len(ds) + 30, pad_t))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _legend(x0, y0):
    bar_h, bar_w, steps = 200, 20, 40
    out = [f'<g id="legend"><text x="{x0}" y="{y0 - 8}">ε (outer median, inner worst)</text>']
    for k in range(steps):
        mid = CLIP * (steps - k - 0.5) / steps
        y = y0 + bar_h * k / steps
        out.append(f'<rect x="{x0}" y="{y:g}" width="{bar_w}" height="{bar_h / steps:g}" fill="{colour(mid)}"/>')
    for v in (0.0, 0.5, 1.0, 1.5, 2.0):
        y = y0 + bar_h * (1 - v / CLIP)
        lab = "≥ 2" if v == CLIP else f"{v:g}"
        out.append(f'<line x1="{x0 + bar_w}" y1="{y:g}" x2="{x0 + bar_w + 4}" y2="{y:g}" stroke="#000000"/>')
        out.append(f'<text x="{x0 + bar_w + 7}" y="{y + 4:g}">{lab}</text>')
    y1 = y0 + bar_h / 2
    out.append(f'<line x1="{x0 - 3}" y1="{y1:g}" x2="{x0 + bar_w + 3}" y2="{y1:g}" stroke="#000000" '
               'stroke-width="2"/>')
    out.append(f'<text x="{x0 + bar_w + 40}" y="{y0 + bar_h / 4 + 4:g}" fill="#d73027">failure</text>')
    out.append(f'<rect x="{x0}" y="{y0 + bar_h + 15}" width="{bar_w}" height="{bar_w}" fill="{EMPTY_COLOUR}"/>')
    out.append(f'<text x="{x0 + bar_w + 7}" y="{y0 + bar_h + 29}">empty cell</text></g>')
    return out


def heatmap_name(grid):
    return f"heatmap_{grid.circuit_class.label}_{grid.method}.svg"


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def render_heatmap(grid, spec):
    os.makedirs(spec.output_dir, exist_ok=True)
    return _write(os.path.join(spec.output_dir, heatmap_name(grid)), render_heatmap_svg(grid))


def write_results(grids, spec, config=None):
    """Write the requested formats and the manifest; return the paths written.

    Grids whose cells are all empty are skipped for SVG output; the manifest
    lists only files that exist.
    """
    if not grids:
        raise InvalidInputError("no grids to write")
    os.makedirs(spec.output_dir, exist_ok=True)
    paths = []
    if "json" in spec.formats:
        paths.append(_write(os.path.join(spec.output_dir, RESULTS_JSON),
                            dumps_json(results_document(grids, config))))
    if "csv" in spec.formats:
        paths.append(_write(os.path.join(spec.output_dir, RESULTS_CSV), dumps_csv(grids)))
    if "svg" in spec.formats:
        for g in grids:
            try:
                paths.append(render_heatmap(g, spec))
            except NothingToRenderError:
                continue
    paths.append(write_manifest(spec.output_dir, paths))
    return paths


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(output_dir, paths):
    """``sha256  name`` lines for ``paths`` (sorted by name)."""
    names = sorted({os.path.relpath(p, output_dir) for p in paths if os.path.basename(p) != MANIFEST})
    lines = [f"{sha256_file(os.path.join(output_dir, n))}  {n}\n" for n in names]
    return _write(os.path.join(output_dir, MANIFEST), "".join(lines))


def load_results(path):
    """Read a results JSON file; return ``(document, grids)``."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InvalidInputError(f"unsupported schema version {doc.get('schema_version')!r}")
    return doc, [VolumetricGrid.from_dict(g) for g in doc["grids"]]

"""Quartile-binned SVG choropleth of a per-location value."""

from xml.sax.saxutils import escape as _escape

import numpy as np

from .errors import IntegrityError

# lowest quartile darkest, top quartile light blue
QUARTILE_FILLS = ("#08306b", "#2171b5", "#6baed6", "#c6dbef")
NO_DATA_FILL = "#e0e0e0"


def escape(text):
    return _escape(str(text), {'"': "&quot;"})


def quartile_bins(values):
    """Bin index 0-3 per value: the number of quartile cut points below it."""
    v = np.asarray(values, dtype=float)
    cuts = np.percentile(v, [25, 50, 75])
    return [int(b) for b in np.searchsorted(cuts, v, side="left")]


def render_svg(values, neighborhoods, width=800, height=600, margin=10, title=None):
    """Return SVG text with one ``<path>`` per neighbourhood.

    ``values`` maps location id to a number. Neighbourhoods without a value
    are drawn in a neutral grey; a value without a neighbourhood is an error.
    """
    by_id = {nb.id: nb for nb in neighborhoods}
    missing = sorted(set(values) - set(by_id))
    if missing:
        raise IntegrityError(f"no geometry for locations: {', '.join(missing)}")
    ids = sorted(values)
    fills = {}
    if ids:
        for loc, b in zip(ids, quartile_bins([values[i] for i in ids])):
            fills[loc] = QUARTILE_FILLS[b]

    xs = [p[0] for nb in by_id.values() for r in nb.rings for p in r]
    ys = [p[1] for nb in by_id.values() for r in nb.rings for p in r]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    scale = min((width - 2 * margin) / ((x1 - x0) or 1), (height - 2 * margin) / ((y1 - y0) or 1))

    def pt(p):
        return f"{margin + (p[0] - x0) * scale:.3f},{height - margin - (p[1] - y0) * scale:.3f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    for loc in sorted(by_id):
        nb = by_id[loc]
        d = " ".join("M" + " L".join(pt(p) for p in ring[:-1]) + " Z" for ring in nb.rings)
        fill = fills.get(loc, NO_DATA_FILL)
        label = escape(nb.name)
        value = "" if loc not in values else f' data-value="{values[loc]!r}"'
        out.append(f'<path id="{escape(loc)}" d="{d}" fill="{fill}" fill-rule="evenodd" '
                   f'stroke="#ffffff" stroke-width="0.5"{value}><title>{label}</title></path>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def choropleth(values, neighborhoods, out_path, **kw):
    """Write :func:`render_svg` output to ``out_path``."""
    svg = render_svg(values, neighborhoods, **kw)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return out_path

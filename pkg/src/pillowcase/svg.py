"""Deterministic SVG rendering of pillowcase figures.

The fundamental domain [0, pi] x [0, 2pi] is drawn as a fixed-size frame
with the four corner orbits marked by identification glyphs, the abelian
locus {beta = 0} in red, curves colored per label, and optional marks at
intersection points.  All floats are formatted to two decimals and every
element list is sorted, so identical input yields byte-identical output.
"""

from __future__ import annotations

from .geometry import PI, TWO_PI, PillowCurve, PillowPoint

# pixels per radian; margins leave room for corner glyphs and labels
_SCALE = 120.0
_MARGIN = 40.0
_W = _MARGIN * 2 + PI * _SCALE
_H = _MARGIN * 2 + TWO_PI * _SCALE

# label "abelian" always maps to red; the palette serves everything else
_RED = "#d62728"
_PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)


def _fmt(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def _xy(alpha: float, beta: float) -> tuple[float, float]:
    # beta increases upward; SVG y runs downward
    return (_MARGIN + alpha * _SCALE, _MARGIN + (TWO_PI - beta) * _SCALE)


def _poly_d(verts: list[tuple[float, float]]) -> str:
    """Path data for chart vertices, split where beta wraps past 0 or 2pi."""
    pieces: list[str] = []
    run: list[tuple[float, float]] = []

    def flush() -> None:
        if len(run) >= 2:
            coords = [f"{_fmt(x)},{_fmt(y)}" for x, y in (_xy(a, b) for a, b in run)]
            pieces.append("M" + "L".join(coords))
        run.clear()

    prev = None
    for a, b in verts:
        k = b // TWO_PI
        if prev is not None:
            pa, pb = prev
            pk = pb // TWO_PI
            if k != pk:
                # interpolate the boundary crossing and restart the run
                edge = TWO_PI * max(k, pk)
                t = (edge - pb) / (b - pb) if b != pb else 0.0
                am = pa + t * (a - pa)
                run.append((am, edge - TWO_PI * pk))
                flush()
                run.append((am, edge - TWO_PI * k))
        run.append((a, b - TWO_PI * k))
        prev = (a, b)
    flush()
    return "".join(pieces)


def _corner_glyphs() -> list[str]:
    # identification orbits: (0,0)~(0,2pi), (pi,0)~(pi,2pi), (0,pi), (pi,pi)
    glyphs: list[str] = []
    orbits = [
        ((0.0, 0.0), (0.0, TWO_PI)),
        ((PI, 0.0), (PI, TWO_PI)),
        ((0.0, PI),),
        ((PI, PI),),
    ]
    shapes = ["circle-open", "circle-fill", "square-open", "square-fill"]
    for orbit, shape in zip(orbits, shapes):
        for a, b in orbit:
            x, y = _xy(a, b)
            if shape.startswith("circle"):
                fill = "none" if shape.endswith("open") else "black"
                glyphs.append(
                    f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="4" fill="{fill}" stroke="black"/>'
                )
            else:
                fill = "none" if shape.endswith("open") else "black"
                glyphs.append(
                    f'<rect x="{_fmt(x - 4)}" y="{_fmt(y - 4)}" width="8" height="8" '
                    f'fill="{fill}" stroke="black"/>'
                )
    return glyphs


def _color_for(label: str, order: dict[str, int]) -> str:
    if label == "abelian":
        return _RED
    return _PALETTE[order[label] % len(_PALETTE)]


def emit_svg(curves: list[PillowCurve], marks: list[PillowPoint] = ()) -> str:
    """Render curves and intersection marks over the fundamental domain."""
    lines: list[str] = []
    lines.append(
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="0 0 {_fmt(_W)} {_fmt(_H)}" '
        f'width="{_fmt(_W)}" height="{_fmt(_H)}">'
    )
    x0, y0 = _xy(0.0, TWO_PI)
    lines.append(
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(PI * _SCALE)}" '
        f'height="{_fmt(TWO_PI * _SCALE)}" fill="white" stroke="black" stroke-width="1.5"/>'
    )
    lines.extend(_corner_glyphs())
    # abelian locus furniture: the bottom edge beta = 0 in red
    ax0, ay0 = _xy(0.0, 0.0)
    ax1, ay1 = _xy(PI, 0.0)
    lines.append(
        f'<line x1="{_fmt(ax0)}" y1="{_fmt(ay0)}" x2="{_fmt(ax1)}" y2="{_fmt(ay1)}" '
        f'stroke="{_RED}" stroke-width="2.5"/>'
    )

    labels = sorted({c.label for c in curves if c.label != "abelian"})
    order = {label: i for i, label in enumerate(labels)}
    drawn = sorted(
        (c for c in curves),
        key=lambda c: (c.label, _poly_d([tuple(v) for v in c.real_vertices()])),
    )
    label_anchors: list[tuple[str, float, float, str]] = []
    for c in drawn:
        verts = [tuple(v) for v in c.real_vertices()]
        d = _poly_d(verts)
        if not d:
            continue
        color = _color_for(c.label, order)
        lines.append(
            f'<path d="{d}" fill="none" stroke="{color}" stroke-width="2" '
            f'data-label="{c.label}"/>'
        )
        if c.label and c.label != "abelian":
            mid = verts[len(verts) // 2]
            mx, my = _xy(mid[0], mid[1] % TWO_PI)
            label_anchors.append((c.label, mx + 6, my - 6, color))

    for alpha, beta in sorted(
        ((round(m.alpha, 12), round(m.beta, 12)) for m in marks)
    ):
        x, y = _xy(alpha, beta)
        lines.append(
            f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="5" fill="none" '
            'stroke="black" stroke-width="2"/>'
        )
    for label, x, y, color in sorted(label_anchors):
        lines.append(
            f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-family="monospace" '
            f'font-size="14" fill="{color}">{label}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"

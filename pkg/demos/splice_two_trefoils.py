"""
Splicing two trefoils
=====================

The splice of two knots glues their exteriors swapping meridian and
longitude.  Traceless representations of the result are pinned down by
intersections of one knot's pillowcase image with the coordinate
transpose of the other's.  This script finds those intersection
witnesses for the trefoil-trefoil splice and draws the overlay.
"""

import math
from pathlib import Path

from pillowcase.charvar import TraceConfig, trace_image
from pillowcase.geometry import PillowCurve
from pillowcase.knots import splice, trefoil
from pillowcase.splice import casson_note, find_splice_reps, transpose_image
from pillowcase.svg import emit_svg


def relabel(c: PillowCurve, label: str) -> PillowCurve:
    a = [p.alpha for p in c.points]
    b = [p.beta for p in c.points]
    return PillowCurve.from_real_path(a, b, label=label, max_step=math.inf)

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

prob = splice(trefoil(), trefoil())
reps = find_splice_reps(prob)

print(f"witnesses: {len(reps)}")
for r in reps:
    print(f"  ({r.point.alpha:.6f}, {r.point.beta:.6f})  residual {r.residual:.1e}")

# all witnesses here are irreducible, so each contributes to the
# signed representation count
print(casson_note(prob))

# overlay figure: left image as-is, right image transposed
cfg = TraceConfig(alpha_step=0.02)
curves = [relabel(c, f"left-{c.label}") for c in trace_image(trefoil(), cfg)]
for c in trace_image(trefoil(), cfg):
    curves.append(relabel(transpose_image(c), f"right-{c.label}"))
path = OUT / "splice_trefoils.svg"
path.write_text(emit_svg(curves, marks=[r.point for r in reps]))
print(f"wrote {path}")

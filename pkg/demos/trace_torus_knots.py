"""
Tracing torus-knot images on the pillowcase
===========================================

Numerically continue the traceless-representation image of a few torus
knots and check the result against the straight-line chart description.
Writes SVG figures next to this script under demos/out/.
"""

import math
import time
from pathlib import Path

from pillowcase.charvar import TraceConfig, torus_knot_closed_form, trace_image
from pillowcase.charvar import min_distance_to_cut_lines
from pillowcase.geometry import hausdorff_distance
from pillowcase.knots import torus_knot
from pillowcase.svg import emit_svg

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# A coarser alpha step than the default keeps this demo quick; drop it
# back to 0.005 to reproduce the figures at full resolution.
cfg = TraceConfig(alpha_step=0.02)

for p, q in [(2, 3), (2, 5), (3, 4)]:
    k = torus_knot(p, q)
    t0 = time.perf_counter()
    curves = trace_image(k, cfg)
    arcs = [c for c in curves if c.label != "abelian"]
    print(f"T({p},{q}): {len(arcs)} irreducible arc(s), "
          f"expected {(p - 1) * (q - 1) // 2}, "
          f"traced in {time.perf_counter() - t0:.1f}s")

    # every traced arc should hug one straight closed-form branch
    branches = torus_knot_closed_form(p, q)
    for br in branches:
        oracle = br.sample()
        best = min(hausdorff_distance(a, oracle) for a in arcs)
        print(f"  branch alpha in ({br.alpha_lo:.4f}, {br.alpha_hi:.4f}): "
              f"hausdorff {best:.2e}")

    # the image stays a definite distance away from the two cut lines;
    # for T(p,q) that clearance is pi/(p*q) exactly
    d = min_distance_to_cut_lines(arcs)
    print(f"  cut-line clearance {d:.6f}  (pi/{p * q} = {math.pi / (p * q):.6f})")

    path = OUT / f"torus_{p}_{q}.svg"
    path.write_text(emit_svg(curves))
    print(f"  wrote {path}")

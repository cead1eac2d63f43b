"""
Area-preserving shear deformations
==================================

Build shear programs out of class-function profiles, push the straight
P-to-Q path around with them, recover a program from a target path by
greedy fitting, and watch how a deformation moves the critical points
of the trefoil image.
"""

import math
from pathlib import Path

import numpy as np

from pillowcase.geometry import PillowCurve, canonicalize, hausdorff_distance
from pillowcase.knots import trefoil
from pillowcase.shear import (
    ClassFunctionProfile,
    ShearProgram,
    ShearStep,
    apply_program,
    base_path,
    fit_program_to_path,
    perturbed_critical_set,
)
from pillowcase.svg import emit_svg

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# ----------------------------------------------------------------------
# 1. a single vertical shear step
# ----------------------------------------------------------------------
# A profile is a trig polynomial f(t) = sum c_j cos(j t); the step moves
# each point along direction (0,1) by f evaluated on the transverse
# coordinate.  This one is a gentle bump.
bump = ClassFunctionProfile.from_sine_coeffs((0.3,))
prog = ShearProgram(steps=(ShearStep((0, 1), bump),))

c0 = base_path()
moved = apply_program(prog, c0)
print(f"base path {len(c0.points)} pts -> sheared path {len(moved.points)} pts")

# programs compose and invert exactly; round-tripping is the identity
back = apply_program(prog.then(prog.inverse()), c0)
print(f"round-trip error {hausdorff_distance(c0, back):.2e}")

# ----------------------------------------------------------------------
# 2. fitting a program to a target path
# ----------------------------------------------------------------------
alphas = np.linspace(0.0, math.pi, 600)
betas = math.pi + 0.5 * np.sin(alphas)
target = PillowCurve.from_real_path(alphas, betas, label="target")

fitted = fit_program_to_path(target, budget=40, tol=1e-6)
fitted_curve = apply_program(fitted, c0)
err = hausdorff_distance(fitted_curve, target)
print(f"fit: {len(fitted.steps)} step(s), distance to target {err:.2e}")

(OUT / "shear_fit.svg").write_text(emit_svg([target, fitted_curve]))
print(f"wrote {OUT / 'shear_fit.svg'}")

# ----------------------------------------------------------------------
# 3. critical points of a deformed trefoil image
# ----------------------------------------------------------------------
# The perturbed critical set tracks where the deformed trefoil arcs meet
# the deformed abelian path.  With the identity program this is just the
# usual intersection locus.
crits, moved_c0 = perturbed_critical_set(trefoil(), prog)
print(f"critical points under the bump program: {len(crits)}")
for cp in crits:
    pt = canonicalize(cp.rep.alpha, cp.rep.beta)
    print(f"  alpha={pt.alpha:.6f} beta={pt.beta:.6f} mult={cp.multiplicity}")

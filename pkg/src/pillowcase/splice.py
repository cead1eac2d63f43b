"""Irreducible SU(2) representations of spliced knot exteriors.

Splicing glues two exteriors along the boundary torus so that the meridian
of each side matches the longitude of the other.  A representation of the
glued group restricts to a representation on each side, and the shared
peripheral torus forces the two pillowcase coordinates to agree after
exchanging the axes.  Witnesses are therefore intersections of the left
image with the transpose of the right image, away from the abelian loci,
lifted back to an explicit pair of representations plus the conjugation
aligning their peripheral frames.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .charvar import (
    IRREDUCIBLE_CUTOFF,
    NoConvergence,
    RepPoint,
    TraceConfig,
    _word_value,
    solve_at_alpha,
    trace_image,
)
from .geometry import (
    DEDUP_RADIUS,
    PI,
    TWO_PI,
    PillowCurve,
    PillowPoint,
    canonicalize,
    intersect_curves,
    pillow_distance,
)
from .knots import SpliceProblem, eval_word, torus_knot
from .su2 import Su2Elem, commutator_norm, conjugate_to_diagonal, mul

# interior margin: intersections closer than this to an abelian locus are
# reported as filtered, not refined (the frame matching degenerates there)
_ABELIAN_MARGIN = 1e-3

_REFINE_TOL = 1e-9


class NoIntersections(RuntimeError):
    """The two images do not meet away from the abelian loci."""


class LiftFailed(RuntimeError):
    """A candidate intersection could not be lifted to a representation pair."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SpliceRep:
    """A representation of the splice, split along the gluing torus.

    ``point`` carries alpha = angle of mu1 = lambda2 and beta = angle of
    lambda1 = mu2.  ``aligner`` conjugates the right representation into
    the left one's peripheral frame; ``residual`` is the largest deviation
    over all relators of both sides and both gluing equations.
    """

    point: PillowPoint
    left: RepPoint
    right: RepPoint
    aligner: Su2Elem
    residual: float

    @property
    def irreducible(self) -> bool:
        elems = list(self.left.assignment.values()) + [
            _conj(self.aligner, q) for q in self.right.assignment.values()
        ]
        worst = max(
            commutator_norm(elems[i], elems[j])
            for i in range(len(elems))
            for j in range(i + 1, len(elems))
        )
        return worst > IRREDUCIBLE_CUTOFF


def _conj(g: Su2Elem, q: Su2Elem) -> Su2Elem:
    return mul(mul(g, q), g.inverse())


def _dev(a: Su2Elem, b: Su2Elem) -> float:
    # Frobenius distance of the corresponding matrices
    return math.sqrt(2.0) * math.sqrt(
        (a.w - b.w) ** 2 + (a.x - b.x) ** 2 + (a.y - b.y) ** 2 + (a.z - b.z) ** 2
    )


def transpose_image(c: PillowCurve) -> PillowCurve:
    """Exchange the coordinate axes pointwise: (a, b) -> canonicalize(b, a).

    The vertex order is preserved.  A transposed path that pokes through
    the fold lines away from beta in {0, pi} has no continuous single-chart
    polyline, so step validation is relaxed here; consumers needing valid
    polylines split the result into chart strands first.
    """
    pts = [canonicalize(p.beta, p.alpha) for p in c.points]
    if c.label.endswith("^T"):
        label = c.label[:-2]
    else:
        label = c.label + "^T" if c.label else ""
    return PillowCurve(pts, closed=c.closed, label=label, max_step=math.inf)


def transposed_strands(c: PillowCurve) -> list[PillowCurve]:
    """Valid chart polylines jointly covering the transpose of ``c``.

    Works on the cover: the transposed path (A, B) = (beta_real, alpha) is
    cut exactly where A crosses a multiple of pi, and each piece is mapped
    into [0, pi] x R by the deck transformation of its strip.
    """
    rv = c.real_vertices()
    A = rv[:, 1]
    B = rv[:, 0]
    # insert exact crossings of A through k*pi
    aug_a: list[float] = [float(A[0])]
    aug_b: list[float] = [float(B[0])]
    for i in range(len(A) - 1):
        a0, a1 = float(A[i]), float(A[i + 1])
        b0, b1 = float(B[i]), float(B[i + 1])
        if a1 != a0:
            lo, hi = sorted((a0 / PI, a1 / PI))
            for k in range(math.floor(lo) + 1, math.ceil(hi)):
                t = (k * PI - a0) / (a1 - a0)
                if 1e-12 < t < 1.0 - 1e-12:
                    aug_a.append(k * PI)
                    aug_b.append(b0 + t * (b1 - b0))
        aug_a.append(a1)
        aug_b.append(b1)
    # group segments by the strip their midpoint lies in
    strands: list[PillowCurve] = []
    start = 0
    n = len(aug_a)

    def emit(lo: int, hi: int) -> None:
        if hi - lo < 1:
            return
        mid = 0.5 * (aug_a[lo] + aug_a[lo + 1])
        k = math.floor(mid / PI)
        a_seg = np.array(aug_a[lo : hi + 1])
        b_seg = np.array(aug_b[lo : hi + 1])
        if k % 2 == 0:
            a_chart = a_seg - k * PI
            b_chart = b_seg
        else:
            a_chart = (k + 1) * PI - a_seg
            b_chart = -b_seg
        strands.append(
            PillowCurve.from_real_path(
                np.clip(a_chart, 0.0, PI), b_chart, label=c.label
            )
        )

    def strip(i: int) -> int:
        mid = 0.5 * (aug_a[i] + aug_a[i + 1])
        return math.floor(mid / PI)

    cur = strip(0)
    for i in range(1, n - 1):
        s = strip(i)
        if s != cur:
            emit(start, i)
            start = i
            cur = s
    emit(start, n - 1)
    return strands


def _near_abelian(pt: PillowPoint, margin: float) -> bool:
    left_ab = min(pt.beta, TWO_PI - pt.beta) <= margin  # lambda1 angle ~ 0
    right_ab = pt.alpha <= margin  # lambda2 angle ~ 0
    return left_ab or right_ab


def _pick_seed(k, alpha: float, beta_target: float, cfg: TraceConfig, side: str, cand):
    try:
        pts = solve_at_alpha(k, alpha, cfg)
    except NoConvergence as e:
        raise LiftFailed(
            f"seed solve failed on the {side} side",
            {"candidate": cand, "stage": f"seed-{side}", **e.diagnostics},
        ) from e
    irr = [p for p in pts if p.irreducible]
    if not irr:
        raise LiftFailed(
            f"no irreducible seed on the {side} side",
            {"candidate": cand, "stage": f"seed-{side}", "found": len(pts)},
        )
    def gap(p):
        d = abs(p.beta - beta_target) % TWO_PI
        return min(d, TWO_PI - d)
    return min(irr, key=gap)


def _assignment_vector(p: RepPoint) -> np.ndarray:
    return np.concatenate([np.array(q.components()) for q in p.assignment.values()])


def _refine_candidate(
    problem: SpliceProblem, cfg: TraceConfig, pt0: PillowPoint
) -> SpliceRep:
    left, right = problem.left, problem.right
    n_l, n_r = len(left.generators), len(right.generators)
    flip = pt0.beta > PI
    s = -1.0 if flip else 1.0
    ar0 = TWO_PI - pt0.beta if flip else pt0.beta
    br0 = TWO_PI - pt0.alpha if flip else pt0.alpha
    cand = (pt0.alpha, pt0.beta)
    lseed = _pick_seed(left, pt0.alpha, pt0.beta, cfg, "left", cand)
    rseed = _pick_seed(right, ar0, br0, cfg, "right", cand)
    z0 = np.concatenate(
        [
            _assignment_vector(lseed),
            _assignment_vector(rseed),
            [pt0.alpha, pt0.beta],
        ]
    )

    def residuals(z: np.ndarray) -> np.ndarray:
        gl = z[: 4 * n_l].reshape(1, n_l, 4)
        gr = z[4 * n_l : 4 * (n_l + n_r)].reshape(1, n_r, 4)
        a, b = z[-2], z[-1]
        out = []
        for w in left.relators:
            out.append(_word_value(w, gl)[0] - np.array([1.0, 0.0, 0.0, 0.0]))
        for w in right.relators:
            out.append(_word_value(w, gr)[0] - np.array([1.0, 0.0, 0.0, 0.0]))
        out.append(np.sum(gl[0] ** 2, axis=1) - 1.0)
        out.append(np.sum(gr[0] ** 2, axis=1) - 1.0)
        if n_l >= 2:
            out.append(gl[0, 1, 3:4])
        if n_r >= 2:
            out.append(gr[0, 1, 3:4])
        ca, sa, cb, sb = math.cos(a), math.sin(a), math.cos(b), math.sin(b)
        out.append(_word_value(left.meridian, gl)[0] - np.array([ca, sa, 0.0, 0.0]))
        out.append(_word_value(left.longitude, gl)[0] - np.array([cb, sb, 0.0, 0.0]))
        out.append(_word_value(right.meridian, gr)[0] - np.array([cb, s * sb, 0.0, 0.0]))
        out.append(_word_value(right.longitude, gr)[0] - np.array([ca, s * sa, 0.0, 0.0]))
        return np.concatenate(out)

    sol = least_squares(residuals, z0, xtol=1e-14, ftol=1e-14, gtol=1e-15)
    worst = float(np.max(np.abs(sol.fun)))
    if worst > _REFINE_TOL:
        raise LiftFailed(
            f"joint refinement stalled at residual {worst:.3g}",
            {"candidate": cand, "stage": "joint", "best_residual": worst},
        )
    z = sol.x
    l_elems = _unit_elems(z[: 4 * n_l], n_l)
    r_elems = _unit_elems(z[4 * n_l : 4 * (n_l + n_r)], n_r)
    lp = RepPoint.from_assignment(left, l_elems)
    rp = RepPoint.from_assignment(right, r_elems)
    point = canonicalize(float(z[-2]), float(z[-1]))
    aligner = _compute_aligner(left, right, l_elems, r_elems)
    residual = _verify_residual(problem, l_elems, r_elems, aligner)
    return SpliceRep(point=point, left=lp, right=rp, aligner=aligner, residual=residual)


def _unit_elems(v: np.ndarray, n: int) -> list[Su2Elem]:
    out = []
    for i in range(n):
        q = v[4 * i : 4 * i + 4]
        q = q / np.linalg.norm(q)
        out.append(Su2Elem(*q))
    return out


def _compute_aligner(left, right, l_elems, r_elems) -> Su2Elem:
    """g with g rho2(lambda2) g^-1 = rho1(mu1) and g rho2(mu2) g^-1 = rho1(lambda1).

    Both peripheral pairs commute, so each determines a diagonalizing
    frame; g maps one frame to the other, and the leftover rotation about
    the diagonal is fixed by aligning the designated right generator's
    axis into the (j, k) half-plane with nonnegative j, mirroring the
    gauge slice used for single-knot solves.
    """
    mu1 = eval_word(left.meridian, l_elems)
    lam2 = eval_word(right.longitude, r_elems)
    f1, _ = conjugate_to_diagonal(mu1)
    f2, _ = conjugate_to_diagonal(lam2)
    pick = 1 if len(r_elems) >= 2 else 0
    v = _conj(f2, r_elems[pick])
    t = -0.5 * math.atan2(v.z, v.y) if math.hypot(v.y, v.z) > 1e-12 else 0.0
    return mul(mul(f1.inverse(), Su2Elem.diagonal(t)), f2)


def _verify_residual(problem, l_elems, r_elems, g: Su2Elem) -> float:
    """Largest deviation over relators and gluing equations, from scratch."""
    one = Su2Elem.identity()
    worst = 0.0
    for w in problem.left.relators:
        worst = max(worst, _dev(eval_word(w, l_elems), one))
    for w in problem.right.relators:
        worst = max(worst, _dev(eval_word(w, r_elems), one))
    mu1 = eval_word(problem.left.meridian, l_elems)
    lam1 = eval_word(problem.left.longitude, l_elems)
    mu2 = eval_word(problem.right.meridian, r_elems)
    lam2 = eval_word(problem.right.longitude, r_elems)
    worst = max(worst, _dev(_conj(g, lam2), mu1))
    worst = max(worst, _dev(_conj(g, mu2), lam1))
    return worst


def find_splice_reps(
    p: SpliceProblem,
    cfg: TraceConfig | None = None,
    images: tuple[list[PillowCurve], list[PillowCurve]] | None = None,
) -> list[SpliceRep]:
    """All interior intersections of the two images, lifted to rep pairs.

    Traces both sides (or reuses `images` = precomputed left/right traces),
    intersects the left image with the transposed right image strand by
    strand, discards candidates near either abelian locus, and jointly
    refines each survivor at the pinned peripheral angles.  Raises
    NoIntersections when nothing survives the filter; LiftFailed with
    diagnostics when a candidate cannot be refined.
    """
    if cfg is None:
        cfg = TraceConfig()
    if images is None:
        images = (trace_image(p.left, cfg), trace_image(p.right, cfg))
    left_arcs = [c for c in images[0] if c.label != "abelian"]
    right_arcs = [c for c in images[1] if c.label != "abelian"]
    margin = max(cfg.dedup_radius, _ABELIAN_MARGIN)
    candidates: list[PillowPoint] = []
    for L in left_arcs:
        for R in right_arcs:
            for T in transposed_strands(R):
                for pt, _seg in intersect_curves(L, T):
                    if _near_abelian(pt, margin):
                        continue
                    if all(
                        pillow_distance(pt, q) > DEDUP_RADIUS for q in candidates
                    ):
                        candidates.append(pt)
    if not candidates:
        raise NoIntersections(
            "images meet only along the abelian loci (or not at all)"
        )
    reps = [_refine_candidate(p, cfg, pt) for pt in candidates]
    dedup: list[SpliceRep] = []
    for r in sorted(reps, key=lambda r: (r.point.alpha, r.point.beta)):
        if all(pillow_distance(r.point, k.point) > cfg.dedup_radius for k in dedup):
            dedup.append(r)
    return dedup


def casson_note(p: SpliceProblem) -> str:
    """Documentation note attached to trefoil-trefoil splice reports."""
    tref = torus_knot(2, 3)
    if p.left == tref and p.right == tref:
        return (
            "Splicing two right-handed trefoil exteriors yields an integer "
            "homology sphere whose Casson invariant vanishes, so no count of "
            "signed conjugacy classes forces representations to exist; the "
            "intersection points reported here certify irreducible SU(2) "
            "representations directly."
        )
    return ""


def splice_reps_to_json(reps: list[SpliceRep]) -> str:
    rows = []
    for r in reps:
        rows.append(
            {
                "point": {"alpha": r.point.alpha, "beta": r.point.beta},
                "residual": r.residual,
                "left_assignment": {
                    g: list(q.components()) for g, q in r.left.assignment.items()
                },
                "right_assignment": {
                    g: list(q.components()) for g, q in r.right.assignment.items()
                },
                "aligner": list(r.aligner.components()),
            }
        )
    return json.dumps(rows, indent=2, sort_keys=True)

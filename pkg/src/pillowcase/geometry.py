"""The pillowcase orbifold, the cut-open cylinder, and polyline curves in them.

Canonical coordinates: a point is (alpha, beta) with alpha in [0, pi] and
beta in [0, 2pi), where raw coordinates are reduced using 2pi-periodicity
in both coordinates together with the identification
(alpha, beta) ~ (2pi - alpha, 2pi - beta).  On the fold lines alpha = 0 and
alpha = pi the residual identification beta ~ 2pi - beta is applied as
well, so canonical forms are unique.  The four orbifold corners are
(0,0), (0,pi), (pi,0), (pi,pi).

Curves are polylines of canonical points together with an integer beta
lift per vertex: vertex i sits at beta + 2pi*lift in the universal cover
of the cylinder [0,pi] x R/2piZ, which is what intersection and winding
computations use.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
PI = math.pi

DEFAULT_MAX_STEP = 0.05
DEFAULT_INTERSECT_TOL = 1e-6
DEDUP_RADIUS = 1e-4
CLOSED_TOL = 1e-9

P_CORNER = (0.0, PI)
Q_CORNER = (PI, PI)


class DegenerateOverlap(ValueError):
    """Two polyline segments overlap along a positive length."""


class NotClosed(ValueError):
    """Operation requires a closed curve."""


class CrossesCutLine(ValueError):
    """Curve touches the fold lines alpha in {0, pi}; no unambiguous lift."""


class NotEmbedded(ValueError):
    """Path self-intersects or is discontinuous at the sampling scale."""


class HitsForbiddenCorner(ValueError):
    """Path passes through (0,0) or (pi,0)."""


def _mod_2pi(x: float) -> float:
    r = math.fmod(x, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:
        r = 0.0
    return r


@dataclass(frozen=True)
class PillowPoint:
    """Canonical pillowcase coordinates: alpha in [0, pi], beta in [0, 2pi)."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        a, b = self.alpha, self.beta
        if -1e-12 <= a < 0.0:
            a = 0.0
        if PI < a <= PI + 1e-12:
            a = PI
        if -1e-12 <= b < 0.0:
            b = 0.0
        if TWO_PI <= b <= TWO_PI + 1e-12:
            b = 0.0
        if not (0.0 <= a <= PI and 0.0 <= b < TWO_PI):
            raise ValueError(f"not canonical: ({self.alpha!r}, {self.beta!r})")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    def is_corner(self) -> bool:
        return (self.alpha in (0.0, PI)) and (self.beta in (0.0, PI))


@dataclass(frozen=True)
class CylinderPoint:
    """Point of the cut-open cylinder [0, pi] x R/2piZ (no edge folding)."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (-1e-12 <= self.alpha <= PI + 1e-12):
            raise ValueError(f"alpha out of range: {self.alpha!r}")
        object.__setattr__(self, "alpha", min(max(self.alpha, 0.0), PI))
        object.__setattr__(self, "beta", _mod_2pi(self.beta))


def canonicalize(a: float, b: float) -> PillowPoint:
    """Reduce raw coordinates to the canonical domain. Idempotent.

    Uses 2pi-periodicity, the involution (a, b) -> (2pi - a, 2pi - b), and
    on the fold lines the residual beta -> 2pi - beta.
    """
    a = _mod_2pi(a)
    b = _mod_2pi(b)
    if a > PI:
        a = TWO_PI - a
        b = TWO_PI - b if b > 0.0 else 0.0
        if b >= TWO_PI:
            b = 0.0
    if (a == 0.0 or a == PI) and b > PI:
        b = TWO_PI - b
    return PillowPoint(a, b)


def corner_points() -> tuple[PillowPoint, ...]:
    return (
        PillowPoint(0.0, 0.0),
        PillowPoint(0.0, PI),
        PillowPoint(PI, 0.0),
        PillowPoint(PI, PI),
    )


def wrap_angle(x: float) -> float:
    """Reduce to (-pi, pi]."""
    r = _mod_2pi(x)
    return r if r <= PI else r - TWO_PI


def pillow_distance(p: PillowPoint, q: PillowPoint) -> float:
    """Quotient metric on the pillowcase.

    Minimum over the identity image and the two fold images of q that can
    come near the canonical band.
    """
    db = wrap_angle(p.beta - q.beta)
    ds = wrap_angle(p.beta + q.beta)
    return min(
        math.hypot(p.alpha - q.alpha, db),
        math.hypot(p.alpha + q.alpha, ds),
        math.hypot(TWO_PI - p.alpha - q.alpha, ds),
    )


class PillowCurve:
    """Polyline in the pillowcase with per-vertex cylinder lift integers.

    The real-beta polyline (beta_i + 2pi * lift_i) is continuous data used
    for intersections and winding; the folded points are the canonical
    view.  Consecutive vertices must be closer than ``max_step`` in the
    cylinder metric; closed curves repeat their first point within 1e-9.
    """

    def __init__(
        self,
        points: list[PillowPoint],
        lifts: list[int] | None = None,
        *,
        closed: bool = False,
        label: str = "",
        max_step: float = DEFAULT_MAX_STEP,
    ) -> None:
        if len(points) < 2:
            raise ValueError("curve needs at least two points")
        if lifts is None:
            lifts = self._default_lifts(points)
        if len(lifts) != len(points):
            raise ValueError("lifts and points length mismatch")
        breal = np.array([p.beta + TWO_PI * k for p, k in zip(points, lifts)])
        alphas = np.array([p.alpha for p in points])
        steps = np.hypot(np.diff(alphas), np.diff(breal))
        if steps.size and float(np.max(steps)) > max_step + 1e-12:
            i = int(np.argmax(steps))
            raise ValueError(
                f"step {steps[i]:.4g} between vertices {i},{i+1} exceeds max_step {max_step}"
            )
        if closed and pillow_distance(points[0], points[-1]) > CLOSED_TOL:
            raise ValueError("closed curve endpoints do not match within 1e-9")
        self.points = tuple(points)
        self.lifts = tuple(int(k) for k in lifts)
        self.closed = bool(closed)
        self.label = str(label)

    @staticmethod
    def _default_lifts(points: list[PillowPoint]) -> list[int]:
        # Choose each successive lift to minimize the beta jump.
        lifts = [0]
        prev = points[0].beta
        for p in points[1:]:
            raw = p.beta + TWO_PI * lifts[-1]
            k = lifts[-1] + round((prev - raw) / TWO_PI)
            lifts.append(int(k))
            prev = p.beta + TWO_PI * k
        return lifts

    @classmethod
    def from_real_path(
        cls,
        alphas,
        betas,
        *,
        closed: bool = False,
        label: str = "",
        max_step: float = DEFAULT_MAX_STEP,
    ) -> "PillowCurve":
        """Build from arrays with alpha in [0, pi] and beta real (unfolded)."""
        pts, lifts = [], []
        for a, b in zip(alphas, betas):
            bm = _mod_2pi(float(b))
            k = round((float(b) - bm) / TWO_PI)
            pts.append(PillowPoint(float(a), bm))
            lifts.append(int(k))
        return cls(pts, lifts, closed=closed, label=label, max_step=max_step)

    def real_vertices(self) -> np.ndarray:
        """(n, 2) array of (alpha, beta + 2pi*lift)."""
        return np.array(
            [(p.alpha, p.beta + TWO_PI * k) for p, k in zip(self.points, self.lifts)]
        )

    def cylinder_points(self) -> list[CylinderPoint]:
        return [CylinderPoint(p.alpha, p.beta) for p in self.points]

    def reversed(self) -> "PillowCurve":
        return PillowCurve(
            list(self.points[::-1]),
            list(self.lifts[::-1]),
            closed=self.closed,
            label=self.label,
        )

    def refine_midpoints(self) -> "PillowCurve":
        """Insert the midpoint of every segment (in the real-beta lift)."""
        rv = self.real_vertices()
        out_a, out_b = [rv[0, 0]], [rv[0, 1]]
        for i in range(1, len(rv)):
            out_a.append((rv[i - 1, 0] + rv[i, 0]) / 2)
            out_b.append((rv[i - 1, 1] + rv[i, 1]) / 2)
            out_a.append(rv[i, 0])
            out_b.append(rv[i, 1])
        return PillowCurve.from_real_path(
            out_a, out_b, closed=self.closed, label=self.label
        )

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "closed": self.closed,
            "points": [[p.alpha, p.beta] for p in self.points],
            "lifts": list(self.lifts),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "PillowCurve":
        pts = [PillowPoint(a, b) for a, b in d["points"]]
        return cls(pts, list(d["lifts"]), closed=bool(d["closed"]), label=d["label"])


def curves_to_json(curves: list[PillowCurve]) -> str:
    """Deterministic JSON text for a list of curves."""
    return json.dumps([c.to_json_dict() for c in curves], indent=2, sort_keys=True)


def curves_from_json(text: str) -> list[PillowCurve]:
    return [PillowCurve.from_json_dict(d) for d in json.loads(text)]


def abelian_locus(step: float = 0.025) -> PillowCurve:
    """The reducible-representation segment {(alpha, 0) : alpha in [0, pi]}."""
    n = max(2, int(math.ceil(PI / step)) + 1)
    alphas = np.linspace(0.0, PI, n)
    return PillowCurve.from_real_path(alphas, np.zeros(n), label="abelian")


# --- intersections -----------------------------------------------------------

def _segment_arrays(c: PillowCurve) -> tuple[np.ndarray, np.ndarray]:
    rv = c.real_vertices()
    return rv[:-1], rv[1:]


def _images_for_band(p0: np.ndarray, p1: np.ndarray, lo: float, hi: float):
    """Images of segments under the fold group meeting beta-range [lo, hi].

    Yields (q0, q1, tag) arrays: identity translates, and the two fold
    reflections (alpha -> -alpha and alpha -> 2pi - alpha, beta -> -beta),
    each shifted by multiples of 2pi in beta to overlap [lo, hi].
    """
    for sign, a_off in ((1.0, 0.0), (-1.0, 0.0), (-1.0, TWO_PI)):
        b0 = sign * p0[:, 1]
        b1 = sign * p1[:, 1]
        a0 = a_off + sign * p0[:, 0]
        a1 = a_off + sign * p1[:, 0]
        bmin = float(np.min(np.minimum(b0, b1)))
        bmax = float(np.max(np.maximum(b0, b1)))
        kmin = int(math.floor((lo - bmax) / TWO_PI))
        kmax = int(math.ceil((hi - bmin) / TWO_PI))
        for k in range(kmin, kmax + 1):
            off = TWO_PI * k
            q0 = np.stack([a0, b0 + off], axis=1)
            q1 = np.stack([a1, b1 + off], axis=1)
            yield q0, q1, (sign, a_off, k)


def _seg_pair_intersections(p0, p1, q0, q1, tol, min_gap: int = 0):
    """All crossings between segment families; returns points and index pairs.

    p0,p1: (n,2); q0,q1: (m,2). A near-parallel pair whose overlap exceeds
    tol raises DegenerateOverlap. ``min_gap`` skips pairs with |i-j| below
    it (used when scanning a curve against itself).
    """
    r = p1 - p0
    u = q1 - q0
    # bounding-box prefilter
    pmin = np.minimum(p0, p1)[:, None, :]
    pmax = np.maximum(p0, p1)[:, None, :]
    qmin = np.minimum(q0, q1)[None, :, :]
    qmax = np.maximum(q0, q1)[None, :, :]
    near = np.all((pmin <= qmax + tol) & (qmin <= pmax + tol), axis=2)
    ii, jj = np.nonzero(near)
    out_pts, out_idx = [], []
    for i, j in zip(ii, jj):
        if min_gap and abs(int(i) - int(j)) < min_gap:
            continue
        ri, uj = r[i], u[j]
        d = q0[j] - p0[i]
        denom = ri[0] * uj[1] - ri[1] * uj[0]
        ln_r = math.hypot(*ri)
        ln_u = math.hypot(*uj)
        if ln_r == 0.0 or ln_u == 0.0:
            continue
        if abs(denom) <= 1e-14 * ln_r * ln_u:
            # parallel: collinear overlap / touch handling
            perp = abs(d[0] * ri[1] - d[1] * ri[0]) / ln_r
            if perp <= tol:
                t0 = float(np.dot(d, ri)) / (ln_r * ln_r)
                t1 = t0 + float(np.dot(uj, ri)) / (ln_r * ln_r)
                lo_t, hi_t = min(t0, t1), max(t0, t1)
                overlap = (min(1.0, hi_t) - max(0.0, lo_t)) * ln_r
                if overlap > tol:
                    raise DegenerateOverlap(
                        f"segments {i} and {j} are collinear over length {overlap:.3g}"
                    )
                if overlap >= -tol:
                    # endpoint touch along the common line: counts once
                    t_mid = (max(0.0, lo_t) + min(1.0, hi_t)) / 2
                    out_pts.append(p0[i] + t_mid * ri)
                    out_idx.append((int(i), int(j)))
            continue
        t = (d[0] * uj[1] - d[1] * uj[0]) / denom
        s = (d[0] * ri[1] - d[1] * ri[0]) / denom
        pad_t = tol / ln_r
        pad_s = tol / ln_u
        if -pad_t <= t <= 1.0 + pad_t and -pad_s <= s <= 1.0 + pad_s:
            pt = p0[i] + min(max(t, 0.0), 1.0) * ri
            out_pts.append(pt)
            out_idx.append((int(i), int(j)))
    return out_pts, out_idx


def intersect_curves(
    c1: PillowCurve, c2: PillowCurve, tol: float = DEFAULT_INTERSECT_TOL
) -> list[tuple[PillowPoint, tuple[int, int]]]:
    """Transverse intersections of two canonical curves, fold-aware.

    Segments of c2 are also intersected against their images under the
    pillowcase fold so that meetings across the lines alpha in {0, pi}
    are found.  Results are deduplicated within DEDUP_RADIUS and sorted
    by (alpha, beta).
    """
    p0, p1 = _segment_arrays(c1)
    q0_base, q1_base = _segment_arrays(c2)
    lo = float(np.min(np.minimum(p0[:, 1], p1[:, 1]))) - tol
    hi = float(np.max(np.maximum(p0[:, 1], p1[:, 1]))) + tol
    found: list[tuple[PillowPoint, tuple[int, int]]] = []
    for q0, q1, _tag in _images_for_band(q0_base, q1_base, lo, hi):
        pts, idx = _seg_pair_intersections(p0, p1, q0, q1, tol)
        for pt, ij in zip(pts, idx):
            found.append((canonicalize(pt[0], pt[1]), ij))
    found.sort(key=lambda t: (t[0].alpha, t[0].beta, t[1]))
    dedup: list[tuple[PillowPoint, tuple[int, int]]] = []
    for cand, ij in found:
        if all(pillow_distance(cand, kept) > DEDUP_RADIUS for kept, _ in dedup):
            dedup.append((cand, ij))
    return dedup


# --- homology ----------------------------------------------------------------

def homology_class_in_cylinder(c: PillowCurve) -> int:
    """Signed beta-winding of a closed curve in H1 of the cylinder.

    Convention: beta increasing counts +1.  Raises NotClosed for open
    curves and CrossesCutLine when a vertex touches alpha in {0, pi},
    where the lift is ambiguous.
    """
    if not c.closed:
        raise NotClosed("curve is not closed")
    if pillow_distance(c.points[0], c.points[-1]) > CLOSED_TOL:
        raise NotClosed("endpoints do not match")
    for p in c.points:
        if p.alpha < CLOSED_TOL or p.alpha > PI - CLOSED_TOL:
            raise CrossesCutLine(f"vertex at alpha = {p.alpha!r} touches a fold line")
    rv = c.real_vertices()
    total = rv[-1, 1] - rv[0, 1]
    return int(round(total / TWO_PI))


# --- paths from P to Q -------------------------------------------------------

def _check_embedded_and_corners(curve: PillowCurve) -> None:
    rv = curve.real_vertices()
    for bad in ((0.0, 0.0), (PI, 0.0)):
        if distance_point_to_curve(PillowPoint(*bad), curve) < 1e-9:
            raise HitsForbiddenCorner(f"path passes through {bad}")
    # doubling back: consecutive segments collinear with opposite direction
    d = np.diff(rv, axis=0)
    for i in range(len(d) - 1):
        cross = d[i, 0] * d[i + 1, 1] - d[i, 1] * d[i + 1, 0]
        dot = d[i, 0] * d[i + 1, 0] + d[i, 1] * d[i + 1, 1]
        if abs(cross) < 1e-12 and dot < 0.0:
            raise NotEmbedded(f"path doubles back at vertex {i + 1}")
    # self-intersection scan: nonadjacent segment pairs only
    p0, p1 = rv[:-1], rv[1:]
    pts, idx = _seg_pair_intersections(p0, p1, p0, p1, 1e-9, min_gap=2)
    if idx:
        i, j = idx[0]
        raise NotEmbedded(f"segments {i} and {j} cross")


def path_P_to_Q(spec, samples: int = 257) -> PillowCurve:
    """An embedded path from P = (0, pi) to Q = (pi, pi).

    ``spec`` is "straight" (the line {beta = pi}), a callable alpha -> beta,
    or an explicit list of (alpha, beta) vertices.  The path must avoid the
    corners (0, 0) and (pi, 0) and must not self-intersect.
    """
    if spec == "straight":
        alphas = np.linspace(0.0, PI, samples)
        betas = np.full(samples, PI)
    elif callable(spec):
        n = samples
        while True:
            alphas = np.linspace(0.0, PI, n)
            betas = np.array([float(spec(a)) for a in alphas])
            steps = np.hypot(np.diff(alphas), np.diff(betas))
            if float(np.max(steps)) <= DEFAULT_MAX_STEP:
                break
            n = 2 * n - 1
            if n > 1 << 17:
                raise NotEmbedded("function spec is discontinuous at sampling scale")
    else:
        # explicit vertices: densify each leg to respect the step bound
        arr = np.asarray(spec, dtype=float)
        out_a, out_b = [arr[0, 0]], [arr[0, 1]]
        for k in range(1, len(arr)):
            leg = math.hypot(arr[k, 0] - arr[k - 1, 0], arr[k, 1] - arr[k - 1, 1])
            n = max(1, int(math.ceil(leg / (DEFAULT_MAX_STEP * 0.5))))
            for t in range(1, n + 1):
                frac = t / n
                out_a.append(arr[k - 1, 0] + frac * (arr[k, 0] - arr[k - 1, 0]))
                out_b.append(arr[k - 1, 1] + frac * (arr[k, 1] - arr[k - 1, 1]))
        alphas, betas = np.array(out_a), np.array(out_b)
    if abs(alphas[0]) > 1e-9 or abs(wrap_angle(betas[0] - PI)) > 1e-9:
        raise ValueError("path must start at P = (0, pi)")
    if abs(alphas[-1] - PI) > 1e-9 or abs(wrap_angle(betas[-1] - PI)) > 1e-9:
        raise ValueError("path must end at Q = (pi, pi)")
    curve = PillowCurve.from_real_path(alphas, betas, label="path")
    _check_embedded_and_corners(curve)
    return curve


# --- distances ---------------------------------------------------------------

def _point_to_segments_min(pt: np.ndarray, s0: np.ndarray, s1: np.ndarray) -> float:
    d = s1 - s0
    l2 = np.sum(d * d, axis=1)
    l2 = np.where(l2 == 0.0, 1.0, l2)
    t = np.clip(np.sum((pt - s0) * d, axis=1) / l2, 0.0, 1.0)
    proj = s0 + t[:, None] * d
    return float(np.min(np.hypot(proj[:, 0] - pt[0], proj[:, 1] - pt[1])))


def distance_point_to_curve(p: PillowPoint, c: PillowCurve) -> float:
    """Quotient-metric distance from a point to a polyline curve."""
    s0, s1 = _segment_arrays(c)
    best = math.inf
    pt_b = p.beta
    for sign, a_off in ((1.0, 0.0), (-1.0, 0.0), (-1.0, TWO_PI)):
        a = a_off + sign * np.stack([s0[:, 0], s1[:, 0]], axis=1)
        b = sign * np.stack([s0[:, 1], s1[:, 1]], axis=1)
        bmin = float(np.min(b))
        bmax = float(np.max(b))
        kmin = int(math.floor((pt_b - math.pi - bmax) / TWO_PI))
        kmax = int(math.ceil((pt_b + math.pi - bmin) / TWO_PI))
        for k in range(kmin, kmax + 1):
            q0 = np.stack([a[:, 0], b[:, 0] + TWO_PI * k], axis=1)
            q1 = np.stack([a[:, 1], b[:, 1] + TWO_PI * k], axis=1)
            best = min(best, _point_to_segments_min(np.array([p.alpha, pt_b]), q0, q1))
    return best


def _one_sided_hausdorff(pts: np.ndarray, c: PillowCurve, block: int = 256) -> float:
    """max over pts of quotient distance to the polyline, batched."""
    s0, s1 = _segment_arrays(c)
    images = []
    for sign, a_off in ((1.0, 0.0), (-1.0, 0.0), (-1.0, TWO_PI)):
        a0 = a_off + sign * s0[:, 0]
        a1 = a_off + sign * s1[:, 0]
        b0 = sign * s0[:, 1]
        b1 = sign * s1[:, 1]
        images.append((a0, a1, b0, b1))
    worst = 0.0
    for lo in range(0, len(pts), block):
        blk = pts[lo : lo + block]
        best = np.full(len(blk), np.inf)
        win_lo = blk[:, 1].min() - math.pi
        win_hi = blk[:, 1].max() + math.pi
        for a0, a1, b0, b1 in images:
            seg_lo = np.minimum(b0, b1)
            seg_hi = np.maximum(b0, b1)
            kmin = int(math.floor((win_lo - seg_hi.max()) / TWO_PI))
            kmax = int(math.ceil((win_hi - seg_lo.min()) / TWO_PI))
            for k in range(kmin, kmax + 1):
                off = TWO_PI * k
                # only segments whose shifted beta interval meets the window
                m = (seg_hi + off >= win_lo) & (seg_lo + off <= win_hi)
                if not m.any():
                    continue
                q0 = np.stack([a0[m], b0[m] + off], axis=1)
                d = np.stack([a1[m] - a0[m], b1[m] - b0[m]], axis=1)
                l2 = np.sum(d * d, axis=1)
                l2 = np.where(l2 == 0.0, 1.0, l2)
                w = blk[:, None, :] - q0[None, :, :]
                t = np.clip(np.einsum("pmc,mc->pm", w, d) / l2, 0.0, 1.0)
                diff = w - t[:, :, None] * d[None, :, :]
                dist = np.min(np.hypot(diff[:, :, 0], diff[:, :, 1]), axis=1)
                best = np.minimum(best, dist)
        worst = max(worst, float(best.max()))
    return worst


def hausdorff_distance(c1: PillowCurve, c2: PillowCurve) -> float:
    """Symmetric Hausdorff distance between polylines in the quotient metric."""
    p1 = np.array([(p.alpha, p.beta) for p in c1.points])
    p2 = np.array([(p.alpha, p.beta) for p in c2.points])
    return max(_one_sided_hausdorff(p1, c2), _one_sided_hausdorff(p2, c1))

"""Shearing self-maps of the pillowcase and perturbed critical sets.

A shear displaces every point along a primitive integer direction (d1, d2)
by f(t), where t = d2*alpha - d1*beta is the coordinate invariant under
that displacement and f is the derivative of an even 2pi-periodic class
function.  On the torus cover this has Jacobian determinant exactly 1,
commutes with the pillowcase identifications, and fixes the four corners,
so it descends to an area-preserving self-map of the quotient.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .charvar import (
    NoConvergence,
    RepPoint,
    TraceConfig,
    _word_value,
    solve_at_alpha,
    trace_image,
)
from .geometry import (
    PI,
    TWO_PI,
    PillowCurve,
    PillowPoint,
    _check_embedded_and_corners,
    canonicalize,
    intersect_curves,
    path_P_to_Q,
    wrap_angle,
)
from .knots import KnotPresentation


class BudgetExceeded(RuntimeError):
    """Fit ran out of steps; carries the best program and its distance."""

    def __init__(self, message: str, program: "ShearProgram", distance: float):
        super().__init__(message)
        self.program = program
        self.distance = distance


@dataclass(frozen=True)
class ClassFunctionProfile:
    """Even 2pi-periodic function g stored as a finite cosine series.

    cosine_coeffs[n] multiplies cos(n t).  The displacement profile of the
    associated shear is f = g', an odd sine series, so f vanishes at every
    integer multiple of pi and the series form keeps evenness and
    periodicity structural rather than numerical.
    """

    cosine_coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.cosine_coeffs)
        if not coeffs:
            coeffs = (0.0,)
        if not all(math.isfinite(c) for c in coeffs):
            raise ValueError("profile coefficients must be finite")
        object.__setattr__(self, "cosine_coeffs", coeffs)

    @classmethod
    def from_sine_coeffs(cls, sine_coeffs) -> "ClassFunctionProfile":
        """Profile whose derivative is sum_k sine_coeffs[k-1] * sin(k t)."""
        return cls((0.0,) + tuple(-s / (k + 1) for k, s in enumerate(sine_coeffs)))

    @property
    def degree(self) -> int:
        return len(self.cosine_coeffs) - 1

    def _k(self) -> np.ndarray:
        return np.arange(1, len(self.cosine_coeffs))

    def g(self, t):
        t = np.asarray(t, dtype=float)
        a = np.asarray(self.cosine_coeffs)
        return a[0] + np.cos(np.multiply.outer(t, self._k())) @ (a[1:])

    def f(self, t):
        """g'(t) as a sine series; odd, 2pi-periodic."""
        t = np.asarray(t, dtype=float)
        k = self._k()
        a = np.asarray(self.cosine_coeffs)
        return np.sin(np.multiply.outer(t, k)) @ (-(k * a[1:]))

    def f_prime(self, t):
        t = np.asarray(t, dtype=float)
        k = self._k()
        a = np.asarray(self.cosine_coeffs)
        return np.cos(np.multiply.outer(t, k)) @ (-(k * k * a[1:]))

    def negated(self) -> "ClassFunctionProfile":
        return ClassFunctionProfile(tuple(-c for c in self.cosine_coeffs))


@dataclass(frozen=True)
class ShearStep:
    """One shear along a primitive direction with a class-function profile."""

    direction: tuple[int, int]
    profile: ClassFunctionProfile

    def __post_init__(self) -> None:
        d1, d2 = self.direction
        if d1 != int(d1) or d2 != int(d2):
            raise ValueError("direction must be an integer vector")
        d1, d2 = int(d1), int(d2)
        if math.gcd(abs(d1), abs(d2)) != 1:
            raise ValueError("direction must be a primitive integer vector")
        object.__setattr__(self, "direction", (d1, d2))

    def invariant_coordinate(self, a, b):
        d1, d2 = self.direction
        return d2 * np.asarray(a, dtype=float) - d1 * np.asarray(b, dtype=float)

    def apply_lift(self, a, b):
        """Cover map, no folding; a and b may be arrays."""
        d1, d2 = self.direction
        df = self.profile.f(self.invariant_coordinate(a, b))
        return np.asarray(a, dtype=float) + d1 * df, np.asarray(b, dtype=float) + d2 * df

    def inverse(self) -> "ShearStep":
        # the displaced coordinate t is invariant, so negating the profile
        # inverts the map exactly, not just to first order
        return ShearStep(self.direction, self.profile.negated())

    def to_json_dict(self) -> dict:
        return {
            "direction": list(self.direction),
            "cosine_coeffs": list(self.profile.cosine_coeffs),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "ShearStep":
        return cls(tuple(d["direction"]), ClassFunctionProfile(tuple(d["cosine_coeffs"])))


@dataclass(frozen=True)
class ShearProgram:
    """Ordered composition of shear steps (first entry applied first)."""

    steps: tuple[ShearStep, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))

    def inverse(self) -> "ShearProgram":
        return ShearProgram(tuple(s.inverse() for s in reversed(self.steps)))

    def then(self, other: "ShearProgram") -> "ShearProgram":
        return ShearProgram(self.steps + other.steps)

    def apply_lift(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        for s in self.steps:
            a, b = s.apply_lift(a, b)
        return a, b

    def to_json_dict(self) -> dict:
        return {"steps": [s.to_json_dict() for s in self.steps]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "ShearProgram":
        return cls(tuple(ShearStep.from_json_dict(s) for s in d["steps"]))


def program_to_json(prog: ShearProgram) -> str:
    return json.dumps(prog.to_json_dict(), indent=2, sort_keys=True)


def program_from_json(text: str) -> ShearProgram:
    return ShearProgram.from_json_dict(json.loads(text))


def apply_shear(s: ShearStep, p: PillowPoint) -> PillowPoint:
    a, b = s.apply_lift(p.alpha, p.beta)
    return canonicalize(float(a), float(b))


def _fold_cover_path(a_arr, b_arr):
    """Fold a continuous cover path into alpha in [0, pi], beta a real lift.

    Deck transformations are (a, b) -> (2pi m + s a, 2pi n + s b) with a
    common sign s; the transform is switched only when the incoming alpha
    leaves the band, and n is rechosen to keep the output beta continuous.
    """
    out_a = np.empty(len(a_arr))
    out_b = np.empty(len(a_arr))
    s, u, v = 1.0, 0.0, 0.0
    for i, (a, b) in enumerate(zip(a_arr, b_arr)):
        fa = s * a + u
        if fa < -1e-12 or fa > PI + 1e-12:
            r = math.fmod(a, TWO_PI)
            if r < 0.0:
                r += TWO_PI
            if r <= PI:
                s_new, u_new = 1.0, r - a
            else:
                s_new, u_new = -1.0, (TWO_PI - r) + a
            prev_b = out_b[i - 1] if i else 0.0
            v = TWO_PI * round((prev_b - s_new * b) / TWO_PI)
            s, u = s_new, u_new
            fa = s * a + u
        out_a[i] = min(max(fa, 0.0), PI)
        out_b[i] = s * b + v
    return out_a, out_b


def apply_program(prog: ShearProgram, c: PillowCurve) -> PillowCurve:
    """Image curve, resampled so the output satisfies the step bound."""
    rv = c.real_vertices()
    dom_a = list(rv[:, 0])
    dom_b = list(rv[:, 1])
    for _ in range(24):
        im_a, im_b = prog.apply_lift(np.array(dom_a), np.array(dom_b))
        steps = np.hypot(np.diff(im_a), np.diff(im_b))
        bad = np.flatnonzero(steps > 0.045)
        if not len(bad):
            break
        for j in bad[::-1]:
            dom_a.insert(j + 1, 0.5 * (dom_a[j] + dom_a[j + 1]))
            dom_b.insert(j + 1, 0.5 * (dom_b[j] + dom_b[j + 1]))
    fa, fb = _fold_cover_path(im_a, im_b)
    return PillowCurve.from_real_path(fa, fb, closed=c.closed, label=c.label)


def base_path() -> PillowCurve:
    """The reference path c0 = {beta = pi} from P to Q."""
    c = path_P_to_Q("straight")
    return PillowCurve(list(c.points), list(c.lifts), closed=False, label="c0")


def _lawson_sine_fit(t: np.ndarray, resid: np.ndarray, degree: int) -> np.ndarray:
    """Sine-series coefficients minimizing a reweighted least-squares error.

    Lawson's iteration pushes the weighted L2 solution toward the minimax
    one; the sup error, not the L2 error, is what the fit contract is
    stated in.
    """
    ks = np.arange(1, degree + 1)
    S = np.sin(np.outer(t, ks))
    w = np.full(len(t), 1.0 / len(t))
    best_c = None
    best_sup = math.inf
    for _ in range(25):
        sw = np.sqrt(w)
        coef, *_ = np.linalg.lstsq(S * sw[:, None], resid * sw, rcond=None)
        err = np.abs(resid - S @ coef)
        sup = float(np.max(err))
        if sup < best_sup - 1e-15:
            best_sup, best_c = sup, coef
        w = w * (err + 1e-14)
        w = w / np.sum(w)
    return best_c


def fit_program_to_path(
    target: PillowCurve,
    budget: int = 40,
    tol: float = 1e-2,
    degree: int = 32,
    samples: int = 1024,
) -> ShearProgram:
    """Program steering c0 = {beta = pi} to within tol of the target path.

    Greedy coordinate descent: while the target is a graph over alpha the
    residual is purely vertical and (0,1) steps are fitted; otherwise
    (0,1) and (1,0) steps alternate against an arc-length matching.  The
    approximation theorem guarantees a program exists, not that this
    scheme finds it, so running out of budget raises BudgetExceeded
    carrying the best program and its achieved distance.
    """
    rv = target.real_vertices()
    if abs(rv[0, 0]) > 1e-9 or abs(wrap_angle(rv[0, 1] - PI)) > 1e-9:
        raise ValueError("target must start at P = (0, pi)")
    if abs(rv[-1, 0] - PI) > 1e-9 or abs(wrap_angle(rv[-1, 1] - PI)) > 1e-9:
        raise ValueError("target must end at Q = (pi, pi)")
    _check_embedded_and_corners(target)

    graph = bool(np.all(np.diff(rv[:, 0]) > 1e-12))
    steps: list[ShearStep] = []
    if graph:
        # fit at the target's own vertices: an exactly representable target
        # then reaches machine-level distance instead of chord error
        grid = rv[:, 0]
        beta_t = rv[:, 1]
        cur = np.full(len(grid), PI)
        dist = float(np.max(np.abs(beta_t - cur)))
        while dist > tol and len(steps) < budget:
            coef = _lawson_sine_fit(grid, beta_t - cur, degree)
            f_vals = np.sin(np.outer(grid, np.arange(1, degree + 1))) @ coef
            new_dist = float(np.max(np.abs(beta_t - cur - f_vals)))
            if new_dist >= dist - 1e-15:
                break
            steps.append(ShearStep((0, 1), ClassFunctionProfile.from_sine_coeffs(coef)))
            cur = cur + f_vals
            dist = new_dist
    else:
        tgt = _resample_by_arclength(rv, samples)
        cur_a = np.linspace(0.0, PI, samples)
        cur_b = np.full(samples, PI)
        dist = float(np.max(np.hypot(tgt[:, 0] - cur_a, tgt[:, 1] - cur_b)))
        directions = ((0, 1), (1, 0))
        attempt = 0
        stalls = 0
        while dist > tol and len(steps) < budget and stalls < 2:
            d1, d2 = directions[attempt % 2]
            attempt += 1
            t = d2 * cur_a - d1 * cur_b
            resid = (tgt[:, 0] - cur_a) if d2 == 0 else (tgt[:, 1] - cur_b)
            coef = _lawson_sine_fit(t, resid, degree)
            f_vals = np.sin(np.outer(t, np.arange(1, degree + 1))) @ coef
            na = cur_a + d1 * f_vals
            nb = cur_b + d2 * f_vals
            new_dist = float(np.max(np.hypot(tgt[:, 0] - na, tgt[:, 1] - nb)))
            if new_dist >= dist - 1e-15:
                stalls += 1
                continue
            stalls = 0
            steps.append(ShearStep((d1, d2), ClassFunctionProfile.from_sine_coeffs(coef)))
            cur_a, cur_b = na, nb
            dist = new_dist
    prog = ShearProgram(tuple(steps))
    if dist <= tol:
        return prog
    raise BudgetExceeded(
        f"no fit within tol={tol} after {len(steps)} steps (achieved {dist:.4g})",
        program=prog,
        distance=dist,
    )


def _resample_by_arclength(rv: np.ndarray, n: int) -> np.ndarray:
    seg = np.hypot(np.diff(rv[:, 0]), np.diff(rv[:, 1]))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    s_new = np.linspace(0.0, s[-1], n)
    return np.stack([np.interp(s_new, s, rv[:, 0]), np.interp(s_new, s, rv[:, 1])], axis=1)


@dataclass(frozen=True)
class CriticalPoint:
    """One refined point of R(K | c'), annotated with its cover multiplicity."""

    rep: RepPoint
    multiplicity: int = 2


def perturbed_critical_set(
    k: KnotPresentation,
    prog: ShearProgram,
    cfg: TraceConfig | None = None,
    image: list[PillowCurve] | None = None,
) -> tuple[list[CriticalPoint], PillowCurve]:
    """R(K | c') for c' = program image of c0, plus c' itself.

    Intersections of the traced representation image (retraced unless a
    precomputed `image` is supplied) with c' seed a Newton refinement of
    the combined system (relators, peripheral pins, and the exact
    constraint that the inverse program returns the point to
    {beta = pi}).  Each point stands for two critical points upstairs;
    the multiplicity annotation records that instead of duplicating data.
    """
    if cfg is None:
        cfg = TraceConfig()
    c_prime = apply_program(prog, base_path())
    if image is None:
        image = trace_image(k, cfg)
    seen: list[tuple[float, float]] = []
    out: list[CriticalPoint] = []
    for curve in image:
        for p0, _seg in intersect_curves(curve, c_prime):
            rep = _refine_critical_point(k, prog, p0, cfg)
            if rep is None:
                continue
            key = (rep.alpha, rep.beta)
            if any(math.hypot(key[0] - a, key[1] - b) < 1e-6 for a, b in seen):
                continue
            seen.append(key)
            out.append(CriticalPoint(rep=rep))
    out.sort(key=lambda c: (c.rep.alpha, c.rep.beta))
    return out, c_prime


def constraint_value(prog: ShearProgram, alpha: float, beta: float) -> float:
    """Signed distance (in beta, before the program) from the curve c'."""
    _, b0 = prog.inverse().apply_lift(alpha, beta)
    return wrap_angle(float(b0) - PI)


def _refine_critical_point(
    k: KnotPresentation, prog: ShearProgram, p0: PillowPoint, cfg: TraceConfig
) -> RepPoint | None:
    n_g = len(k.generators)
    try:
        seeds = solve_at_alpha(k, p0.alpha, cfg)
    except NoConvergence:
        return None
    seed = min(seeds, key=lambda s: abs(wrap_angle(s.beta - p0.beta)))
    if abs(wrap_angle(seed.beta - p0.beta)) > 0.1:
        return None
    z0 = np.empty(4 * n_g + 2)
    for i, gname in enumerate(k.generators):
        z0[4 * i : 4 * i + 4] = seed.assignment[gname].components()
    z0[-2] = p0.alpha
    z0[-1] = seed.beta + wrap_angle(p0.beta - seed.beta)

    gauge_gen = 1 if n_g >= 2 else None

    def residuals(z: np.ndarray) -> np.ndarray:
        g = z[: 4 * n_g].reshape(1, n_g, 4)
        a, b = z[-2], z[-1]
        parts = [_word_value(w, g)[0] - np.array([1.0, 0, 0, 0]) for w in k.relators]
        parts.append(np.sum(g[0] * g[0], axis=1) - 1.0)
        parts.append(_word_value(k.meridian, g)[0] - np.array([math.cos(a), math.sin(a), 0, 0]))
        parts.append(_word_value(k.longitude, g)[0] - np.array([math.cos(b), math.sin(b), 0, 0]))
        if gauge_gen is not None:
            parts.append(np.array([g[0, gauge_gen, 3]]))
        parts.append(np.array([constraint_value(prog, a, b)]))
        return np.concatenate(parts)

    sol = least_squares(residuals, z0, xtol=1e-14, ftol=1e-14, gtol=1e-15)
    if float(np.max(np.abs(sol.fun))) > 1e-9:
        return None
    z = sol.x
    elems = []
    from .su2 import Su2Elem

    for i in range(n_g):
        q = z[4 * i : 4 * i + 4]
        q = q / np.linalg.norm(q)
        elems.append(Su2Elem(*q))
    return RepPoint.from_assignment(k, elems)

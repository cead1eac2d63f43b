"""Numerical tracer of SU(2) representation varieties and pillowcase images.

For a knot-exterior presentation, fix the meridian angle alpha, solve the
relator equations on a product of unit quaternions with the meridian
holonomy pinned to diag(exp(i alpha), exp(-i alpha)), and read off the
longitude angle beta in the same frame.  Sweeping alpha and joining
solutions by nearest-neighbor continuation in assignment space produces
the image curves.

Inverses inside words are evaluated as quaternion conjugates.  That is
linear in the components and agrees with the true inverse exactly on the
unit sphere, so together with the unit-norm constraints the residual
system is polynomial and its Jacobian is a product of left and right
multiplication matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import (
    PI,
    TWO_PI,
    PillowCurve,
    PillowPoint,
    abelian_locus,
    canonicalize,
    wrap_angle,
)
from .knots import KnotPresentation, NotCoprime, Word, eval_word, h1_generator_images
from .su2 import Su2Elem, angle, commutator_norm, conjugate_to_diagonal, mul, signed_angle_in_frame

IRREDUCIBLE_CUTOFF = 1e-6
REP_RESIDUAL_TOL = 1e-10


class NoConvergence(RuntimeError):
    """No restart converged; carries partial results and diagnostics."""

    def __init__(self, message: str, partial: list, diagnostics: dict):
        super().__init__(message)
        self.partial = partial
        self.diagnostics = diagnostics


class EmptyInput(ValueError):
    """Operation needs at least one irreducible curve."""


@dataclass(frozen=True)
class RepPoint:
    """One conjugacy class of solutions at a fixed meridian angle."""

    assignment: dict
    residual: float
    alpha: float
    beta: float
    irreducible: bool

    @classmethod
    def from_assignment(
        cls,
        k: KnotPresentation,
        elems: list[Su2Elem],
        residual_tol: float = REP_RESIDUAL_TOL,
    ) -> "RepPoint":
        residual = max(
            (_frobenius_from_identity(eval_word(w, elems)) for w in k.relators),
            default=0.0,
        )
        if residual >= residual_tol:
            raise ValueError(f"relator residual {residual:.3g} exceeds {residual_tol:.3g}")
        mu = eval_word(k.meridian, elems)
        lam = eval_word(k.longitude, elems)
        pt = joint_pillow_point(mu, lam)
        irr = False
        for i in range(len(elems)):
            for j in range(i + 1, len(elems)):
                if commutator_norm(elems[i], elems[j]) > IRREDUCIBLE_CUTOFF:
                    irr = True
        return cls(
            assignment=dict(zip(k.generators, elems)),
            residual=residual,
            alpha=pt.alpha,
            beta=pt.beta,
            irreducible=irr,
        )


@dataclass(frozen=True)
class TraceConfig:
    alpha_step: float = 0.005
    alpha_range: tuple[float, float] = (0.0, PI)
    newton_tol: float = 1e-12
    max_newton_iters: int = 60
    restarts: int = 64
    rng_seed: int = 0
    dedup_radius: float = 1e-6

    def __post_init__(self) -> None:
        if self.alpha_step <= 0:
            raise ValueError("alpha_step must be positive")
        if self.newton_tol <= 0 or self.dedup_radius <= 0:
            raise ValueError("tolerances must be positive")


def _frobenius_from_identity(q: Su2Elem) -> float:
    # |M(q) - I|_F = sqrt(2) * |q - 1| as 4-vectors
    return math.sqrt(2.0) * math.sqrt(
        (q.w - 1.0) ** 2 + q.x * q.x + q.y * q.y + q.z * q.z
    )


def joint_pillow_point(mu: Su2Elem, lam: Su2Elem) -> PillowPoint:
    """Canonical pillowcase coordinates of a commuting peripheral pair.

    Reads both holonomies in one diagonalizing frame: the meridian's when
    it is noncentral, else the longitude's, else the pair is at a corner.
    """
    if math.sqrt(mu.x**2 + mu.y**2 + mu.z**2) > 1e-9:
        frame, a = conjugate_to_diagonal(mu)
        b = signed_angle_in_frame(lam, frame, tol=1e-6)
    elif math.sqrt(lam.x**2 + lam.y**2 + lam.z**2) > 1e-9:
        frame, b = conjugate_to_diagonal(lam)
        a = signed_angle_in_frame(mu, frame, tol=1e-6)
    else:
        a, b = angle(mu), angle(lam)
    return canonicalize(a, b)


# --- batched quaternion machinery -------------------------------------------

_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def _qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    out = np.empty(np.broadcast(a, b).shape)
    out[..., 0] = aw * bw - ax * bx - ay * by - az * bz
    out[..., 1] = aw * bx + ax * bw + ay * bz - az * by
    out[..., 2] = aw * by - ax * bz + ay * bw + az * bx
    out[..., 3] = aw * bz + ax * by - ay * bx + az * bw
    return out


def _left_mult_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (4, 4))
    m[..., 0, 0] = w; m[..., 0, 1] = -x; m[..., 0, 2] = -y; m[..., 0, 3] = -z
    m[..., 1, 0] = x; m[..., 1, 1] = w;  m[..., 1, 2] = -z; m[..., 1, 3] = y
    m[..., 2, 0] = y; m[..., 2, 1] = z;  m[..., 2, 2] = w;  m[..., 2, 3] = -x
    m[..., 3, 0] = z; m[..., 3, 1] = -y; m[..., 3, 2] = x;  m[..., 3, 3] = w
    return m


def _right_mult_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (4, 4))
    m[..., 0, 0] = w; m[..., 0, 1] = -x; m[..., 0, 2] = -y; m[..., 0, 3] = -z
    m[..., 1, 0] = x; m[..., 1, 1] = w;  m[..., 1, 2] = z;  m[..., 1, 3] = -y
    m[..., 2, 0] = y; m[..., 2, 1] = -z; m[..., 2, 2] = w;  m[..., 2, 3] = x
    m[..., 3, 0] = z; m[..., 3, 1] = y;  m[..., 3, 2] = -x; m[..., 3, 3] = w
    return m


def _word_value_and_jacobian(word: Word, g: np.ndarray):
    """Evaluate a word on a batch of assignments with its Jacobian.

    g: (B, n_g, 4).  Inverse letters use the conjugate.  Returns
    value (B, 4) and jacobian (B, 4, n_g*4).
    """
    B, n_g, _ = g.shape
    m = len(word)
    ident = np.zeros((B, 4))
    ident[:, 0] = 1.0
    if m == 0:
        return ident, np.zeros((B, 4, n_g * 4))
    letters = []
    for s in word:
        v = g[:, abs(s) - 1, :]
        letters.append(v * _CONJ if s < 0 else v)
    prefixes = [ident]
    for v in letters:
        prefixes.append(_qmul(prefixes[-1], v))
    suffixes = [ident]
    for v in reversed(letters):
        suffixes.append(_qmul(v, suffixes[-1]))
    suffixes.reverse()
    value = prefixes[-1]
    jac = np.zeros((B, 4, n_g, 4))
    for i, s in enumerate(word):
        contrib = _left_mult_matrix(prefixes[i]) @ _right_mult_matrix(suffixes[i + 1])
        if s < 0:
            contrib = contrib * _CONJ[None, None, :]
        jac[:, :, abs(s) - 1, :] += contrib
    return value, jac.reshape(B, 4, n_g * 4)


def _word_value(word: Word, g: np.ndarray) -> np.ndarray:
    B = g.shape[0]
    out = np.zeros((B, 4))
    out[:, 0] = 1.0
    for s in word:
        v = g[:, abs(s) - 1, :]
        out = _qmul(out, v * _CONJ if s < 0 else v)
    return out


class _System:
    """Residual system for one presentation at a fixed meridian angle."""

    def __init__(self, k: KnotPresentation, alpha: float, gauge_gen: int | None):
        self.k = k
        self.n_g = len(k.generators)
        self.alpha = alpha
        self.pin = np.array([math.cos(alpha), math.sin(alpha), 0.0, 0.0])
        self.gauge_gen = gauge_gen

    def value(self, v: np.ndarray) -> np.ndarray:
        B = v.shape[0]
        g = v.reshape(B, self.n_g, 4)
        parts = []
        for w in self.k.relators:
            val = _word_value(w, g).copy()
            val[:, 0] -= 1.0
            parts.append(val)
        parts.append(np.sum(g * g, axis=2) - 1.0)
        parts.append(_word_value(self.k.meridian, g) - self.pin)
        if self.gauge_gen is not None:
            parts.append(g[:, self.gauge_gen, 3:4])
        return np.concatenate(parts, axis=1)

    def __call__(self, v: np.ndarray):
        B = v.shape[0]
        g = v.reshape(B, self.n_g, 4)
        parts_r, parts_j = [], []
        for w in self.k.relators:
            val, jac = _word_value_and_jacobian(w, g)
            val = val.copy()
            val[:, 0] -= 1.0
            parts_r.append(val)
            parts_j.append(jac)
        # unit norms
        norms = np.sum(g * g, axis=2) - 1.0
        parts_r.append(norms)
        jn = np.zeros((B, self.n_g, self.n_g, 4))
        idx = np.arange(self.n_g)
        jn[:, idx, idx, :] = 2.0 * g
        parts_j.append(jn.reshape(B, self.n_g, self.n_g * 4))
        # meridian pin
        val, jac = _word_value_and_jacobian(self.k.meridian, g)
        parts_r.append(val - self.pin)
        parts_j.append(jac)
        # gauge slice: designated generator's k-component vanishes
        if self.gauge_gen is not None:
            parts_r.append(g[:, self.gauge_gen, 3:4])
            jg = np.zeros((B, 1, self.n_g * 4))
            jg[:, 0, self.gauge_gen * 4 + 3] = 1.0
            parts_j.append(jg)
        return np.concatenate(parts_r, axis=1), np.concatenate(parts_j, axis=1)


def _lm_minimize(system, v0: np.ndarray, tol: float, iters: int):
    """Batched Levenberg-Marquardt; returns final v and max-abs residuals.

    Trial steps evaluate the residual only; the Jacobian is refreshed just
    for accepted samples.  Starts that reject several steps in a row while
    far from a solution are pruned (stuck at a nonzero local minimum).
    """
    v = v0.copy()
    r, J = system(v)
    cost = np.sum(r * r, axis=1)
    lam = np.full(v.shape[0], 1e-3)
    streak = np.zeros(v.shape[0], dtype=int)
    alive = np.ones(v.shape[0], dtype=bool)
    n_unk = v.shape[1]
    eye = np.eye(n_unk)
    for _ in range(iters):
        active = alive & (np.max(np.abs(r), axis=1) >= tol)
        if not np.any(active):
            break
        JtJ = np.einsum("bri,brj->bij", J, J)
        Jtr = np.einsum("bri,br->bi", J, r)
        A = JtJ + lam[:, None, None] * eye[None]
        try:
            step = np.linalg.solve(A, Jtr[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError:
            step = np.linalg.solve(A + 1e-8 * eye[None], Jtr[:, :, None])[:, :, 0]
        v_try = v - step
        r_try = system.value(v_try)
        cost_try = np.sum(r_try * r_try, axis=1)
        improved = active & (cost_try < cost)
        idx = np.nonzero(improved)[0]
        if idx.size:
            v[idx] = v_try[idx]
            r_new, J_new = system(v[idx])
            r[idx] = r_new
            J[idx] = J_new
            cost[idx] = np.sum(r_new * r_new, axis=1)
        rejected = active & ~improved
        streak = np.where(improved, 0, np.where(rejected, streak + 1, streak))
        alive &= ~(rejected & (streak >= 5) & (cost > 100.0 * tol * tol))
        lam = np.where(improved, lam * 0.33, np.where(rejected, lam * 6.0, lam))
        lam = np.clip(lam, 1e-13, 1e9)
    return v, np.max(np.abs(r), axis=1)


def _abelian_seed(k: KnotPresentation, alpha: float) -> np.ndarray:
    imgs = h1_generator_images(k)
    out = np.zeros((1, len(k.generators) * 4))
    for i, e in enumerate(imgs):
        out[0, 4 * i] = math.cos(e * alpha)
        out[0, 4 * i + 1] = math.sin(e * alpha)
    return out


def _gauge_normalize(v: np.ndarray, n_g: int, gauge_gen: int | None) -> np.ndarray:
    """Rotate each solution about the diagonal axis into the gauge slice.

    Sets the designated generator's (j, k) components to (h, 0) with
    h >= 0; fixes the pinned meridian since rotations about i stabilize
    diagonal elements.
    """
    if gauge_gen is None:
        return v
    B = v.shape[0]
    g = v.reshape(B, n_g, 4).copy()
    yd = g[:, gauge_gen, 2]
    zd = g[:, gauge_gen, 3]
    h = np.hypot(yd, zd)
    psi = np.where(h > 1e-12, -np.arctan2(zd, yd), 0.0)
    c, s = np.cos(psi), np.sin(psi)
    y, z = g[..., 2].copy(), g[..., 3].copy()
    g[..., 2] = c[:, None] * y - s[:, None] * z
    g[..., 3] = s[:, None] * y + c[:, None] * z
    return g.reshape(B, n_g * 4)


def _as_elems(row: np.ndarray, n_g: int) -> list[Su2Elem]:
    out = []
    for i in range(n_g):
        q = row[4 * i : 4 * i + 4]
        q = q / np.linalg.norm(q)
        out.append(Su2Elem(*q))
    return out


def solve_at_alpha(
    k: KnotPresentation,
    alpha: float,
    cfg: TraceConfig | None = None,
    seeds: np.ndarray | None = None,
    rng_index: int = 0,
) -> list[RepPoint]:
    """All conjugacy classes of relator solutions with meridian angle alpha.

    Multistart damped Newton from cfg.restarts random assignments plus the
    exact abelian seed plus any continuation ``seeds``.  Solutions are
    gauge-normalized and deduplicated.  Raises NoConvergence when not a
    single start converges.
    """
    if cfg is None:
        cfg = TraceConfig()
    n_g = len(k.generators)
    gauge_gen = 1 if n_g >= 2 else None
    rng = np.random.default_rng((cfg.rng_seed, rng_index))
    starts = [
        rng.normal(size=(cfg.restarts, n_g, 4)).reshape(cfg.restarts, n_g * 4),
        _abelian_seed(k, alpha),
    ]
    if seeds is not None and len(seeds):
        starts.append(np.asarray(seeds, dtype=float))
    v0 = np.concatenate(starts, axis=0)
    norms = np.linalg.norm(v0.reshape(-1, n_g, 4), axis=2, keepdims=True)
    v0 = (v0.reshape(-1, n_g, 4) / norms).reshape(-1, n_g * 4)
    system = _System(k, alpha, gauge_gen)
    v, maxabs = _lm_minimize(system, v0, cfg.newton_tol, cfg.max_newton_iters)
    ok = maxabs < cfg.newton_tol
    if not np.any(ok):
        raise NoConvergence(
            f"no start converged at alpha={alpha}",
            partial=[],
            diagnostics={"best_residual": float(np.min(maxabs)), "starts": len(v0)},
        )
    sols = _gauge_normalize(v[ok], n_g, gauge_gen)
    kept: list[np.ndarray] = []
    for row in sols:
        if all(np.max(np.abs(row - r0)) > cfg.dedup_radius for r0 in kept):
            kept.append(row)
    points = [RepPoint.from_assignment(k, _as_elems(row, n_g)) for row in kept]
    points.sort(key=lambda p: (not p.irreducible, p.beta, p.alpha))
    # gauge normalization cannot separate reducible classes (the slice is
    # degenerate there); merge those by pillowcase coordinates instead
    dedup: list[RepPoint] = []
    for p in points:
        if p.irreducible:
            dedup.append(p)
        elif all(
            q.irreducible or abs(wrap_angle(q.beta - p.beta)) > 1e-8 for q in dedup
        ):
            dedup.append(p)
    return dedup


# --- closed-form oracle ------------------------------------------------------

def _fold(t: float) -> float:
    return abs(wrap_angle(t))


@dataclass(frozen=True)
class ClosedFormBranch:
    """One irreducible arc of a torus-knot pillowcase image.

    beta(alpha) = c - p*q*alpha (as a real lift) for alpha in the open
    interval (alpha_lo, alpha_hi).
    """

    p: int
    q: int
    theta_x: float
    theta_y: float
    c: float
    alpha_lo: float
    alpha_hi: float

    def beta_at(self, a: float) -> float:
        return self.c - self.p * self.q * a

    def sample(self, max_step: float = 0.045) -> PillowCurve:
        slope = math.hypot(1.0, self.p * self.q)
        n = max(2, int(math.ceil((self.alpha_hi - self.alpha_lo) * slope / max_step)) + 1)
        alphas = np.linspace(self.alpha_lo, self.alpha_hi, n)
        betas = self.c - self.p * self.q * alphas
        return PillowCurve.from_real_path(
            alphas, betas, label=f"closed-form({self.p},{self.q})"
        )


def torus_knot_closed_form(p: int, q: int) -> list[ClosedFormBranch]:
    """Independent arc-by-arc description of the torus-knot image.

    Enumerates pairs (theta_x, theta_y) = (m pi / p, n pi / q) with m + n
    even (so that rho(x)^p = rho(y)^q = +-1 consistently), both angles
    interior.  Writing mu = x^u y^v, the attainable meridian angles as
    the two rotation axes vary form the open interval
    (|A - B|, min(A + B, 2pi - A - B)) with A, B the folded angles of
    rho(x)^u and rho(y)^v, and beta follows c - p*q*alpha.
    """
    if math.gcd(p, q) != 1:
        raise NotCoprime(f"gcd({p},{q}) != 1")
    if abs(p) < 2 or abs(q) < 2:
        raise ValueError("|p| and |q| must be at least 2")
    u = pow(q, -1, abs(p)) % abs(p)
    v = (1 - u * q) // p
    branches = []
    for m in range(1, abs(p)):
        for n in range(1, abs(q)):
            if (m + n) % 2 != 0:
                continue
            theta_x = m * PI / abs(p)
            theta_y = n * PI / abs(q)
            c = 0.0 if m % 2 == 0 else PI
            A = _fold(u * theta_x)
            B = _fold(v * theta_y)
            lo = abs(A - B)
            hi = min(A + B, TWO_PI - A - B)
            branches.append(
                ClosedFormBranch(
                    p=p, q=q, theta_x=theta_x, theta_y=theta_y, c=c,
                    alpha_lo=lo, alpha_hi=hi,
                )
            )
    branches.sort(key=lambda b: (b.alpha_lo, b.alpha_hi, b.theta_x, b.theta_y))
    return branches


# --- tracing -----------------------------------------------------------------

@dataclass
class _Chain:
    alphas: list[float] = field(default_factory=list)
    betas_real: list[float] = field(default_factory=list)
    vectors: list[np.ndarray] = field(default_factory=list)
    done: bool = False
    miss: int = 0

    def append(self, a: float, p: RepPoint, vec: np.ndarray) -> None:
        b = p.beta
        if self.betas_real:
            prev = self.betas_real[-1]
            b = prev + wrap_angle(b - prev)
        self.alphas.append(a)
        self.betas_real.append(b)
        self.vectors.append(vec)


def _solution_vector(p: RepPoint) -> np.ndarray:
    return np.concatenate([np.array(e.components()) for e in p.assignment.values()])


_CHAIN_MATCH_RADIUS = 0.35
# consecutive grid points a live chain may go unmatched before it is closed
_MISS_LIMIT = 3


def _match_points_to_chains(chains, points, vectors):
    """Greedy nearest-pair matching; returns (assignments, unmatched points)."""
    open_chains = [c for c in chains if not c.done]
    pairs = []
    for ci, ch in enumerate(open_chains):
        last = ch.vectors[-1]
        for pi, vec in enumerate(vectors):
            d = float(np.max(np.abs(last - vec)))
            if d < _CHAIN_MATCH_RADIUS:
                pairs.append((d, ci, pi))
    pairs.sort()
    used_c, used_p = set(), set()
    matches = []
    for d, ci, pi in pairs:
        if ci in used_c or pi in used_p:
            continue
        used_c.add(ci)
        used_p.add(pi)
        matches.append((open_chains[ci], pi))
    unmatched_points = [i for i in range(len(points)) if i not in used_p]
    unmatched_chains = [c for i, c in enumerate(open_chains) if i not in used_c]
    return matches, unmatched_points, unmatched_chains


def _refine_endpoint(
    k, cfg, a_live: float, vec_live: np.ndarray, a_dead: float, resolution: float = 1e-7
):
    """Bisect between a solved and an unsolved alpha; returns boundary data."""
    small_cfg = replace(cfg, restarts=2)
    while abs(a_dead - a_live) > resolution:
        mid = 0.5 * (a_live + a_dead)
        try:
            pts = solve_at_alpha(k, mid, small_cfg, seeds=vec_live[None, :])
        except NoConvergence:
            pts = []
        best = None
        for p in pts:
            if not p.irreducible:
                continue
            vec = _solution_vector(p)
            d = float(np.max(np.abs(vec - vec_live)))
            if d < _CHAIN_MATCH_RADIUS and (best is None or d < best[0]):
                best = (d, p, vec)
        if best is None:
            a_dead = mid
        else:
            a_live = mid
            vec_live = best[2]
    return a_live, vec_live


def trace_image(k: KnotPresentation, cfg: TraceConfig | None = None) -> list[PillowCurve]:
    """Pillowcase image curves of the representation variety.

    Returns the abelian segment (label "abelian") plus one polyline per
    irreducible branch (labels "irreducible-0", ...), assembled by
    nearest-neighbor continuation in assignment space with endpoint
    bisection where the solution count changes.
    """
    if cfg is None:
        cfg = TraceConfig()
    lo, hi = cfg.alpha_range
    n_steps = int(math.ceil((hi - lo) / cfg.alpha_step))
    grid = [
        a
        for a in (lo + i * cfg.alpha_step for i in range(1, n_steps + 1))
        if max(lo, 0.0) + 1e-12 < a < min(hi, PI) - 1e-12
    ]
    chains: list[_Chain] = []
    prev_alpha = max(lo, 0.0)
    # full multistart census every tenth grid point; cheaper continuation
    # solves in between (births are still caught by the census cadence and
    # their alpha pinned afterwards by endpoint bisection)
    light_cfg = replace(cfg, restarts=min(cfg.restarts, 8))
    for idx, a in enumerate(grid):
        live = [c.vectors[-1] for c in chains if not c.done]
        seeds = np.array(live) if live else None
        step_cfg = cfg if idx % 10 == 0 else light_cfg
        pts = solve_at_alpha(k, a, step_cfg, seeds=seeds, rng_index=idx)
        irr = [p for p in pts if p.irreducible]
        vectors = [_solution_vector(p) for p in irr]
        matches, new_points, dying = _match_points_to_chains(chains, irr, vectors)
        for ch, pi in matches:
            ch.miss = 0
            ch.append(a, irr[pi], vectors[pi])
        for pi in new_points:
            revived = None
            for ch in chains:
                if not ch.done:
                    continue
                gap = a - ch.alphas[-1]
                d = float(np.max(np.abs(ch.vectors[-1] - vectors[pi])))
                if gap < (_MISS_LIMIT + 1.5) * cfg.alpha_step and d < _CHAIN_MATCH_RADIUS:
                    revived = ch
                    break
            if revived is not None:
                # the branch was declared dead on a transient solver miss;
                # reopen it instead of starting a duplicate chain
                revived.done = False
                revived.miss = 0
                revived.append(a, irr[pi], vectors[pi])
                continue
            ch = _Chain()
            ch.append(a, irr[pi], vectors[pi])
            floor = max(lo, 0.0)
            window_lo = prev_alpha
            a_b, vec_b = _refine_endpoint(k, cfg, a, vectors[pi], window_lo)
            while a_b <= window_lo + 1e-6 and window_lo > floor + 1e-9:
                # birth predates the last grid point (solver missed it there);
                # widen the search window one grid step at a time
                window_lo = max(floor, window_lo - cfg.alpha_step)
                a_b, vec_b = _refine_endpoint(k, cfg, a_b, vec_b, window_lo)
            if a_b < a - 1e-12:
                bb = _beta_real_from_vector(k, vec_b, ch.betas_real[0])
                ch.alphas.insert(0, a_b)
                ch.betas_real.insert(0, bb)
                ch.vectors.insert(0, vec_b)
            chains.append(ch)
        for ch in dying:
            ch.miss += 1
            if ch.miss >= _MISS_LIMIT:
                _extend_chain_end(k, cfg, ch, a)
                ch.done = True
        prev_alpha = a
    for ch in chains:
        if not ch.done:
            _extend_chain_end(k, cfg, ch, min(hi, PI))
            ch.done = True
    curves = [abelian_locus()]
    chains.sort(key=lambda c: (c.alphas[0], c.betas_real[0] % TWO_PI))
    for i, ch in enumerate(chains):
        _polish_chain_end(ch, head=True)
        _polish_chain_end(ch, head=False)
        al, bl = _densify_chain(k, cfg, ch)
        curves.append(
            PillowCurve.from_real_path(al, bl, label=f"irreducible-{i}")
        )
    return curves


def _beta_real_from_vector(k: KnotPresentation, vec: np.ndarray, near: float) -> float:
    elems = _as_elems(vec, len(k.generators))
    p = RepPoint.from_assignment(k, elems)
    return near + wrap_angle(p.beta - near)


def _extend_chain_end(k, cfg, ch: _Chain, a_dead: float) -> None:
    a_b, vec_b = _refine_endpoint(k, cfg, ch.alphas[-1], ch.vectors[-1], a_dead)
    if a_b > ch.alphas[-1] + 1e-12:
        bb = _beta_real_from_vector(k, vec_b, ch.betas_real[-1])
        ch.alphas.append(a_b)
        ch.betas_real.append(bb)
        ch.vectors.append(vec_b)


def _off_axis_sq(vec: np.ndarray) -> float:
    v = vec.reshape(-1, 4)
    return float(np.sum(v[:, 2] ** 2 + v[:, 3] ** 2))


def _polish_chain_end(ch: _Chain, head: bool) -> None:
    """Sharpen an endpoint that merges into the abelian arc.

    Bisection alone stalls at ~1e-5 because the zero set degenerates at the
    merge; the summed squared off-axis components vanish linearly there, so a
    cubic fit through well-conditioned interior samples pins the endpoint two
    orders of magnitude better.
    """
    idxs = range(len(ch.alphas)) if head else range(len(ch.alphas) - 1, -1, -1)
    end_a = ch.alphas[0] if head else ch.alphas[-1]
    als, bts, ss = [], [], []
    for i in idxs:
        d = abs(ch.alphas[i] - end_a)
        if d < 3e-4:
            continue
        if d > 0.035:
            break
        als.append(ch.alphas[i])
        bts.append(ch.betas_real[i])
        ss.append(_off_axis_sq(ch.vectors[i]))
    if len(als) < 5:
        return
    coeffs = np.polyfit(als, ss, 3)
    roots = np.roots(coeffs)
    real = [r.real for r in roots if abs(r.imag) < 1e-9]
    if not real:
        return
    root = min(real, key=lambda r: abs(r - end_a))
    if abs(root - end_a) > 5e-4:
        # endpoint is not an abelian merge (or the fit is unreliable)
        return
    bfit = np.polyfit(als[:4], bts[:4], 1)
    pos = 0 if head else -1
    ch.alphas[pos] = root
    ch.betas_real[pos] = float(np.polyval(bfit, root))


def _densify_chain(k, cfg, ch: _Chain):
    """Insert solved midpoints until consecutive steps fit the curve bound."""
    alphas = list(ch.alphas)
    betas = list(ch.betas_real)
    vecs = list(ch.vectors)
    i = 0
    while i < len(alphas) - 1:
        da = alphas[i + 1] - alphas[i]
        db = betas[i + 1] - betas[i]
        if math.hypot(da, db) <= 0.045:
            i += 1
            continue
        mid = 0.5 * (alphas[i] + alphas[i + 1])
        if da < 1e-7:
            alphas.insert(i + 1, mid)
            betas.insert(i + 1, 0.5 * (betas[i] + betas[i + 1]))
            vecs.insert(i + 1, vecs[i])
            continue
        small_cfg = replace(cfg, restarts=0)
        try:
            pts = solve_at_alpha(k, mid, small_cfg, seeds=vecs[i][None, :])
        except NoConvergence:
            pts = []
        best = None
        for p in pts:
            if not p.irreducible:
                # near a birth on the abelian locus the reducible solution
                # also lies within the match radius; it must not be spliced
                # into the branch polyline
                continue
            vec = _solution_vector(p)
            d = float(np.max(np.abs(vec - vecs[i])))
            if d < _CHAIN_MATCH_RADIUS and (best is None or d < best[0]):
                best = (d, p, vec)
        if best is None:
            # chord midpoint: leaves the polyline pointwise unchanged but
            # restores the vertex-step bound
            alphas.insert(i + 1, mid)
            betas.insert(i + 1, 0.5 * (betas[i] + betas[i + 1]))
            vecs.insert(i + 1, vecs[i])
            continue
        b_mid = betas[i] + wrap_angle(best[1].beta - betas[i])
        alphas.insert(i + 1, mid)
        betas.insert(i + 1, b_mid)
        vecs.insert(i + 1, best[2])
    return alphas, betas


def min_distance_to_cut_lines(curves: list[PillowCurve]) -> float:
    """Smallest min(alpha, pi - alpha) over the non-abelian curves."""
    best = math.inf
    seen = False
    for c in curves:
        if c.label == "abelian":
            continue
        seen = True
        for p in c.points:
            best = min(best, p.alpha, PI - p.alpha)
    if not seen:
        raise EmptyInput("no irreducible curves supplied")
    return best

"""Solver examples, closed-form tables, and tracing smoke checks."""

import math

import numpy as np
import pytest

from pillowcase.charvar import (
    EmptyInput,
    NoConvergence,
    TraceConfig,
    joint_pillow_point,
    min_distance_to_cut_lines,
    solve_at_alpha,
    torus_knot_closed_form,
    trace_image,
)
from pillowcase.geometry import PillowCurve, abelian_locus, hausdorff_distance
from pillowcase.knots import eval_word, torus_knot, trefoil
from pillowcase.su2 import Su2Elem, commutator_norm, mul

PI = math.pi

# branch tuples (theta_x, theta_y, c, alpha_lo, alpha_hi) in units of pi,
# in the order torus_knot_closed_form returns them
BRANCH_TABLE = {
    (2, 3): [(1 / 2, 1 / 3, 1, 1 / 6, 5 / 6)],
    (2, 5): [
        (1 / 2, 1 / 5, 1, 1 / 10, 9 / 10),
        (1 / 2, 3 / 5, 1, 3 / 10, 7 / 10),
    ],
    (3, 4): [
        (1 / 3, 1 / 4, 1, 1 / 12, 7 / 12),
        (2 / 3, 1 / 2, 0, 1 / 6, 5 / 6),
        (1 / 3, 3 / 4, 1, 5 / 12, 11 / 12),
    ],
    (3, 5): [
        (1 / 3, 1 / 5, 1, 1 / 15, 11 / 15),
        (2 / 3, 2 / 5, 0, 2 / 15, 8 / 15),
        (2 / 3, 4 / 5, 0, 4 / 15, 14 / 15),
        (1 / 3, 3 / 5, 1, 7 / 15, 13 / 15),
    ],
}


@pytest.mark.parametrize("pq", sorted(BRANCH_TABLE))
def test_closed_form_tables(pq):
    branches = torus_knot_closed_form(*pq)
    expected = BRANCH_TABLE[pq]
    assert len(branches) == len(expected)
    for b, (tx, ty, c, lo, hi) in zip(branches, expected):
        assert b.theta_x == pytest.approx(tx * PI, abs=1e-12)
        assert b.theta_y == pytest.approx(ty * PI, abs=1e-12)
        assert b.c == pytest.approx(c * PI, abs=1e-12)
        assert b.alpha_lo == pytest.approx(lo * PI, abs=1e-12)
        assert b.alpha_hi == pytest.approx(hi * PI, abs=1e-12)


@pytest.mark.parametrize(
    "p,q", [(2, 3), (2, 5), (2, 7), (3, 4), (3, 5), (4, 5), (5, 6), (3, 7)]
)
def test_branch_count(p, q):
    assert len(torus_knot_closed_form(p, q)) == (p - 1) * (q - 1) // 2


def test_closed_form_transposed_knot_has_same_image():
    a = torus_knot_closed_form(2, 3)[0]
    b = torus_knot_closed_form(3, 2)[0]
    assert (a.c, a.alpha_lo, a.alpha_hi) == pytest.approx(
        (b.c, b.alpha_lo, b.alpha_hi), abs=1e-12
    )
    for t in np.linspace(a.alpha_lo + 0.01, a.alpha_hi - 0.01, 17):
        assert a.beta_at(t) == pytest.approx(b.beta_at(t), abs=1e-12)


def test_branch_sample_is_on_the_line_and_fine():
    b = torus_knot_closed_form(2, 3)[0]
    curve = b.sample()
    real = curve.real_vertices()
    assert real[0][0] == pytest.approx(b.alpha_lo, abs=1e-12)
    assert real[-1][0] == pytest.approx(b.alpha_hi, abs=1e-12)
    for (a0, b0), (a1, b1) in zip(real, real[1:]):
        assert math.hypot(a1 - a0, b1 - b0) <= 0.045 + 1e-12
    for pt, (a, _) in zip(curve.points, real):
        want = (PI - 6.0 * a) % (2 * PI)
        got = pt.beta
        assert min(abs(got - want), 2 * PI - abs(got - want)) < 1e-9


def test_joint_pillow_point_conjugation_invariant():
    mu = Su2Elem.diagonal(0.8)
    lam = Su2Elem.diagonal(2.9)
    base = joint_pillow_point(mu, lam)
    assert base.alpha == pytest.approx(0.8)
    assert base.beta == pytest.approx(2.9)
    g = Su2Elem.from_axis_angle((0.3, -0.5, 0.81), 1.234)
    gi = g.inverse()
    moved = joint_pillow_point(mul(mul(g, mu), gi), mul(mul(g, lam), gi))
    assert moved.alpha == pytest.approx(base.alpha, abs=1e-12)
    assert moved.beta == pytest.approx(base.beta, abs=1e-12)


def test_solve_trefoil_at_half_pi_finds_irreducible():
    pts = solve_at_alpha(trefoil(), PI / 2)
    irr = [p for p in pts if p.irreducible]
    assert len(irr) == 1
    p = irr[0]
    assert p.alpha == pytest.approx(PI / 2, abs=1e-9)
    # branch beta = pi - 6 alpha lands on the abelian locus here
    assert min(p.beta, 2 * PI - p.beta) < 1e-8
    assert p.residual < 1e-10
    elems = list(p.assignment.values())
    assert commutator_norm(elems[0], elems[1]) > 1e-6


def test_solve_trefoil_below_first_root_is_abelian_only():
    pts = solve_at_alpha(trefoil(), PI / 12)
    assert pts and not any(p.irreducible for p in pts)
    betas = [min(p.beta, 2 * PI - p.beta) for p in pts]
    assert min(betas) < 1e-9


def test_solve_at_zero_only_central():
    pts = solve_at_alpha(trefoil(), 0.0)
    assert pts and not any(p.irreducible for p in pts)


def test_solver_points_satisfy_relations_independently():
    k = torus_knot(3, 4)
    for p in solve_at_alpha(k, 1.3):
        elems = [p.assignment[g] for g in k.generators]
        x3 = eval_word((1, 1, 1), elems)
        y4 = eval_word((2, 2, 2, 2), elems)
        assert max(abs(c1 - c2) for c1, c2 in zip(x3.components(), y4.components())) < 1e-9
        mu = eval_word(k.meridian, elems)
        lam = eval_word(k.longitude, elems)
        ml = mul(mu, lam)
        lm = mul(lam, mu)
        assert max(abs(c1 - c2) for c1, c2 in zip(ml.components(), lm.components())) < 1e-8


def test_census_stable_under_more_restarts():
    k = trefoil()
    a = 1.0
    one = solve_at_alpha(k, a, TraceConfig(restarts=64))
    two = solve_at_alpha(k, a, TraceConfig(restarts=128))
    key = lambda pts: sorted((p.irreducible, round(p.beta, 6)) for p in pts)
    assert key(one) == key(two)


def test_no_convergence_reports_diagnostics():
    with pytest.raises(NoConvergence) as ei:
        solve_at_alpha(trefoil(), 1.0, TraceConfig(newton_tol=1e-30, restarts=4))
    err = ei.value
    assert err.partial == []
    assert err.diagnostics["best_residual"] > 0
    assert err.diagnostics["starts"] >= 5


def test_trace_config_validation():
    with pytest.raises(ValueError):
        TraceConfig(alpha_step=0.0)
    with pytest.raises(ValueError):
        TraceConfig(newton_tol=-1.0)


def test_trace_trefoil_coarse_grid():
    cfg = TraceConfig(alpha_step=0.02, restarts=16)
    curves = trace_image(trefoil(), cfg)
    assert [c.label for c in curves] == ["abelian", "irreducible-0"]
    arc = curves[1]
    oracle = torus_knot_closed_form(2, 3)[0].sample()
    assert hausdorff_distance(arc, oracle) < 5e-4
    assert arc.points[0].alpha == pytest.approx(PI / 6, abs=2e-3)
    assert arc.points[-1].alpha == pytest.approx(5 * PI / 6, abs=2e-3)


def test_min_distance_to_cut_lines():
    line = PillowCurve.from_real_path(
        list(np.linspace(0.3, 0.6, 40)), [1.0] * 40, label="irreducible-0"
    )
    assert min_distance_to_cut_lines([abelian_locus(), line]) == pytest.approx(0.3)
    with pytest.raises(EmptyInput):
        min_distance_to_cut_lines([abelian_locus()])

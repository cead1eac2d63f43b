"""Shear map algebra, program fitting, and critical-set cross-checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pillowcase.charvar import TraceConfig
from pillowcase.geometry import (
    NotEmbedded,
    PillowCurve,
    PillowPoint,
    canonicalize,
    hausdorff_distance,
    path_P_to_Q,
    pillow_distance,
)
from pillowcase.knots import trefoil, unknot
from pillowcase.shear import (
    BudgetExceeded,
    ClassFunctionProfile,
    ShearProgram,
    ShearStep,
    _fold_cover_path,
    apply_program,
    apply_shear,
    base_path,
    constraint_value,
    fit_program_to_path,
    perturbed_critical_set,
    program_from_json,
    program_to_json,
)

PI = math.pi

DIRECTIONS = [(0, 1), (1, 0), (1, 1), (1, -1), (2, 1), (1, 2), (3, -2), (-1, 2)]


def random_step(rng) -> ShearStep:
    d = DIRECTIONS[rng.integers(len(DIRECTIONS))]
    ks = np.arange(1, 7)
    coeffs = (0.0, *(0.3 * rng.standard_normal(6) / ks**2))
    return ShearStep(d, ClassFunctionProfile(coeffs))


def test_profile_derivative_consistency():
    prof = ClassFunctionProfile((0.2, -0.4, 0.15, 0.0, 0.07))
    t = np.linspace(-7.0, 7.0, 501)
    h = 1e-6
    dg = (prof.g(t + h) - prof.g(t - h)) / (2 * h)
    assert np.max(np.abs(dg - prof.f(t))) < 1e-7
    df = (prof.f(t + h) - prof.f(t - h)) / (2 * h)
    assert np.max(np.abs(df - prof.f_prime(t))) < 1e-6
    # even, periodic, and odd-derivative structure
    assert np.max(np.abs(prof.g(-t) - prof.g(t))) == 0.0
    assert np.max(np.abs(prof.g(t + 2 * PI) - prof.g(t))) < 1e-12
    assert np.max(np.abs(prof.f(-t) + prof.f(t))) == 0.0
    assert abs(prof.f(0.0)) == 0.0
    assert abs(prof.f(PI)) < 1e-14


def test_from_sine_coeffs():
    prof = ClassFunctionProfile.from_sine_coeffs([0.5, 0.0, -0.2])
    t = np.linspace(0, 2 * PI, 100)
    want = 0.5 * np.sin(t) - 0.2 * np.sin(3 * t)
    assert np.max(np.abs(prof.f(t) - want)) < 1e-14


def test_direction_validation():
    prof = ClassFunctionProfile((0.0, 1.0))
    with pytest.raises(ValueError):
        ShearStep((2, 4), prof)
    with pytest.raises(ValueError):
        ShearStep((0, 0), prof)
    ShearStep((0, -1), prof)
    ShearStep((-3, 2), prof)


def test_constant_profile_is_identity():
    s = ShearStep((1, 1), ClassFunctionProfile((4.2,)))
    p = PillowPoint(1.1, 2.2)
    assert apply_shear(s, p) == p


def test_eps_cos_example():
    eps = 0.25
    s = ShearStep((0, 1), ClassFunctionProfile((0.0, eps)))
    q = apply_shear(s, PillowPoint(0.7, 1.1))
    assert q.alpha == pytest.approx(0.7, abs=1e-15)
    assert q.beta == pytest.approx(1.1 - eps * math.sin(0.7), abs=1e-15)


def test_corners_fixed_random_steps():
    rng = np.random.default_rng(7)
    corners = [(0.0, 0.0), (0.0, PI), (PI, 0.0), (PI, PI)]
    for _ in range(200):
        s = random_step(rng)
        for c in corners:
            r = apply_shear(s, PillowPoint(*c))
            db = min(abs(r.beta - c[1]), 2 * PI - abs(r.beta - c[1]))
            assert math.hypot(r.alpha - c[0], db) < 1e-12


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, len(DIRECTIONS) - 1),
    st.lists(st.floats(-0.5, 0.5), min_size=1, max_size=6),
    st.floats(0.05, PI - 0.05),
    st.floats(-20.0, 20.0),
)
def test_inverse_step_is_exact(di, coeffs, a, b):
    s = ShearStep(DIRECTIONS[di], ClassFunctionProfile((0.0, *coeffs)))
    a1, b1 = s.apply_lift(a, b)
    a2, b2 = s.inverse().apply_lift(a1, b1)
    scale = 1.0 + abs(float(b1))
    assert abs(float(a2) - a) < 1e-12 * scale
    assert abs(float(b2) - b) < 1e-12 * scale


def test_program_inverse_on_grid():
    rng = np.random.default_rng(3)
    prog = ShearProgram(tuple(random_step(rng) for _ in range(5)))
    both = prog.then(prog.inverse())
    a = np.linspace(0.01, PI - 0.01, 1000)
    b = np.linspace(0.0, 2 * PI, 1000)
    aa, bb = both.apply_lift(a, b)
    assert float(np.max(np.hypot(aa - a, bb - b))) < 1e-9


def test_area_preservation_small_triangles():
    rng = np.random.default_rng(11)
    for _ in range(300):
        s = random_step(rng)
        v = rng.uniform([0.2, 0.5], [PI - 0.2, 2 * PI - 0.5])
        tri = v + 1e-4 * rng.standard_normal((3, 2))
        ia, ib = s.apply_lift(tri[:, 0], tri[:, 1])
        img = np.stack([ia, ib], axis=1)
        area = lambda t: 0.5 * (
            (t[1, 0] - t[0, 0]) * (t[2, 1] - t[0, 1])
            - (t[2, 0] - t[0, 0]) * (t[1, 1] - t[0, 1])
        )
        assert abs(area(img) - area(tri)) < 1e-9


def test_fold_cover_path_stays_in_quotient_class():
    # transversal poke through alpha=0 near beta=pi folds with a gentle corner
    a = np.linspace(0.4, -0.4, 60)
    b = np.linspace(3.0, 3.3, 60)
    fa, fb = _fold_cover_path(a, b)
    assert np.all(fa >= 0.0) and np.all(fa <= PI)
    steps = np.hypot(np.diff(fa), np.diff(fb))
    assert float(np.max(steps)) < 0.05
    for x, y, u, v in zip(a, b, fa, fb):
        assert pillow_distance(canonicalize(x, y), canonicalize(u, v)) < 1e-12


def test_apply_program_empty_is_identity():
    c0 = base_path()
    out = apply_program(ShearProgram(), c0)
    assert hausdorff_distance(out, c0) == 0.0


def test_apply_program_graph_image():
    prof = ClassFunctionProfile((0.0, 0.25))
    prog = ShearProgram((ShearStep((0, 1), prof),))
    img = apply_program(prog, base_path())
    for p in img.points:
        assert p.beta == pytest.approx(PI - 0.25 * math.sin(p.alpha), abs=1e-12)


def tame_step(rng) -> ShearStep:
    # keeps images of c0 representable: wander from beta=pi stays small
    d = DIRECTIONS[rng.integers(len(DIRECTIONS))]
    ks = np.arange(1, 5)
    coeffs = (0.0, *(0.06 * rng.standard_normal(4) / ks**3))
    return ShearStep(d, ClassFunctionProfile(coeffs))


def test_apply_program_respects_composition():
    rng = np.random.default_rng(5)
    p1 = ShearProgram(tuple(tame_step(rng) for _ in range(2)))
    p2 = ShearProgram(tuple(tame_step(rng) for _ in range(2)))
    c0 = base_path()
    joint = apply_program(p1.then(p2), c0)
    staged = apply_program(p2, apply_program(p1, c0))
    assert hausdorff_distance(joint, staged) < 1e-3


def test_fit_trivial_target():
    prog = fit_program_to_path(path_P_to_Q("straight"), tol=1e-9)
    assert prog.steps == ()


def test_fit_sine_bump_exact():
    tgt = path_P_to_Q(lambda a: PI + 0.3 * math.sin(a))
    prog = fit_program_to_path(tgt, tol=1e-9)
    assert len(prog.steps) == 1
    step = prog.steps[0]
    assert step.direction == (0, 1)
    coeffs = step.profile.cosine_coeffs
    assert coeffs[1] == pytest.approx(-0.3, abs=1e-9)
    assert max(abs(c) for c in coeffs[2:]) < 1e-9


def test_fit_semicircle_bump_within_budget():
    tgt = path_P_to_Q(lambda a: PI + 0.8 * math.sqrt(max(0.0, 1 - (2 * a / PI - 1) ** 2)))
    prog = fit_program_to_path(tgt, budget=40, tol=0.05)
    assert 1 <= len(prog.steps) <= 40
    img = apply_program(prog, base_path())
    assert hausdorff_distance(img, tgt) < 0.05


def test_fit_budget_exceeded_reports_best():
    verts = [(0.0, PI), (0.8, PI + 0.9), (0.6, PI + 1.4), (1.4, PI + 1.6), (2.2, PI + 0.9), (PI, PI)]
    tgt = path_P_to_Q(verts)
    with pytest.raises(BudgetExceeded) as ei:
        fit_program_to_path(tgt, budget=4, tol=1e-6)
    err = ei.value
    assert isinstance(err.program, ShearProgram)
    assert 0 < err.distance < 2.0


def test_fit_rejects_bad_targets():
    # self-crossing polyline
    a = [0.0, 2.6, 0.5, 1.8, PI]
    b = [PI, PI + 1.1, PI + 1.3, PI - 0.8, PI]
    crossing = PillowCurve.from_real_path(
        np.concatenate([np.linspace(x, y, 80)[:-1] for x, y in zip(a, a[1:])] + [[a[-1]]]),
        np.concatenate([np.linspace(x, y, 80)[:-1] for x, y in zip(b, b[1:])] + [[b[-1]]]),
    )
    with pytest.raises(NotEmbedded):
        fit_program_to_path(crossing)
    # wrong endpoints
    seg = PillowCurve.from_real_path(np.linspace(0.5, PI, 90), np.full(90, PI))
    with pytest.raises(ValueError):
        fit_program_to_path(seg)


def test_program_json_round_trip():
    rng = np.random.default_rng(2)
    prog = ShearProgram(tuple(random_step(rng) for _ in range(3)))
    text = program_to_json(prog)
    back = program_from_json(text)
    assert back == prog
    assert program_to_json(back) == text


COARSE = TraceConfig(alpha_step=0.02, restarts=16)


def test_critical_set_trefoil_base_curve():
    pts, c_prime = perturbed_critical_set(trefoil(), ShearProgram(), COARSE)
    assert [round(c.rep.alpha, 9) for c in pts] == [
        round(PI / 3, 9),
        round(2 * PI / 3, 9),
    ]
    for c in pts:
        assert c.multiplicity == 2
        assert c.rep.irreducible
        assert c.rep.residual < 1e-9
        assert abs(constraint_value(ShearProgram(), c.rep.alpha, c.rep.beta)) < 1e-8
    assert c_prime.points[0].beta == pytest.approx(PI)


def test_critical_set_unknot_avoiding_abelian_locus():
    prog = ShearProgram((ShearStep((0, 1), ClassFunctionProfile((0.0, -0.3))),))
    pts, c_prime = perturbed_critical_set(unknot(), prog, COARSE)
    assert pts == []
    assert all(0.5 < p.beta < 2 * PI - 0.5 for p in c_prime.points)

"""Unit quaternion substrate: arithmetic identities and frame handling."""

from __future__ import annotations

import math

import numpy as np
import pytest

from pillowcase.su2 import (
    NotDiagonalInFrame,
    Su2Elem,
    angle,
    commutator_norm,
    conjugate_to_diagonal,
    mul,
    signed_angle_in_frame,
)


def random_elem(rng: np.random.Generator) -> Su2Elem:
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return Su2Elem(*v)


def test_constructor_rejects_non_unit():
    with pytest.raises(ValueError):
        Su2Elem(1.0, 1.0, 0.0, 0.0)


def test_constructor_renormalizes_within_tolerance():
    q = Su2Elem(1.0 + 4e-13, 0.0, 0.0, 0.0)
    assert q.w == 1.0


def test_angle_examples():
    assert angle(Su2Elem(1, 0, 0, 0)) == 0.0
    assert angle(Su2Elem(-1, 0, 0, 0)) == math.pi
    assert angle(Su2Elem(0, 1, 0, 0)) == pytest.approx(math.pi / 2, abs=1e-15)


def test_mul_matches_matrix_product():
    # The quaternion product must agree with 2x2 matrix multiplication under
    # q = w + xi + yj + zk  <->  [[w + ix, y + iz], [-y + iz, w - ix]].
    def as_matrix(q: Su2Elem) -> np.ndarray:
        return np.array(
            [
                [q.w + 1j * q.x, q.y + 1j * q.z],
                [-q.y + 1j * q.z, q.w - 1j * q.x],
            ]
        )

    rng = np.random.default_rng(7)
    for _ in range(200):
        a, b = random_elem(rng), random_elem(rng)
        lhs = as_matrix(mul(a, b))
        rhs = as_matrix(a) @ as_matrix(b)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_product_of_units_is_unit_bulk():
    # 1e6 random pairs, vectorized with the same product coefficients.
    rng = np.random.default_rng(2024)
    a = rng.normal(size=(1_000_000, 4))
    b = rng.normal(size=(1_000_000, 4))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    aw, ax, ay, az = a.T
    bw, bx, by, bz = b.T
    prod = np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=1,
    )
    assert np.max(np.abs(np.linalg.norm(prod, axis=1) - 1.0)) < 1e-12


def test_product_of_units_is_unit_object_path():
    rng = np.random.default_rng(5)
    for _ in range(5000):
        q = mul(random_elem(rng), random_elem(rng))
        n = math.sqrt(q.w**2 + q.x**2 + q.y**2 + q.z**2)
        assert abs(n - 1.0) < 1e-12


def test_angle_conjugation_invariant():
    rng = np.random.default_rng(11)
    for _ in range(5000):
        q, g = random_elem(rng), random_elem(rng)
        conj = mul(mul(g, q), g.inverse())
        assert abs(angle(conj) - angle(q)) < 1e-12


def test_conjugate_to_diagonal_j_axis():
    q = Su2Elem(0, 0, 1, 0)
    frame, theta = conjugate_to_diagonal(q)
    assert theta == pytest.approx(math.pi / 2, abs=1e-15)
    d = mul(mul(frame, q), frame.inverse())
    assert abs(d.w) < 1e-10 and abs(d.x - 1.0) < 1e-10
    assert math.hypot(d.y, d.z) < 1e-10


def test_conjugate_to_diagonal_central():
    frame, theta = conjugate_to_diagonal(Su2Elem(1, 0, 0, 0))
    assert frame == Su2Elem.identity()
    assert theta == 0.0
    frame, theta = conjugate_to_diagonal(Su2Elem(-1, 0, 0, 0))
    assert frame == Su2Elem.identity()
    assert theta == math.pi


def test_conjugate_to_diagonal_already_diagonal():
    for t in (0.3, 1.0, 2.9):
        frame, theta = conjugate_to_diagonal(Su2Elem.diagonal(t))
        assert frame == Su2Elem.identity()
        assert theta == pytest.approx(t, abs=1e-12)


def test_conjugate_to_diagonal_round_trip():
    rng = np.random.default_rng(23)
    for _ in range(2000):
        q = random_elem(rng)
        frame, theta = conjugate_to_diagonal(q)
        back = mul(mul(frame.inverse(), Su2Elem.diagonal(theta)), frame)
        err = math.sqrt(
            (back.w - q.w) ** 2 + (back.x - q.x) ** 2 + (back.y - q.y) ** 2 + (back.z - q.z) ** 2
        )
        assert err < 1e-10


def test_signed_angle_examples():
    assert signed_angle_in_frame(Su2Elem(-1, 0, 0, 0), Su2Elem.identity()) == math.pi
    assert signed_angle_in_frame(Su2Elem(1, 0, 0, 0), Su2Elem.identity()) == 0.0
    assert signed_angle_in_frame(Su2Elem.diagonal(-0.7), Su2Elem.identity()) == pytest.approx(
        -0.7, abs=1e-12
    )


def test_signed_angle_rejects_non_diagonal():
    with pytest.raises(NotDiagonalInFrame):
        signed_angle_in_frame(Su2Elem(0, 0, 1, 0), Su2Elem.identity())


def test_signed_angle_in_computed_frame():
    rng = np.random.default_rng(31)
    for _ in range(500):
        q = random_elem(rng)
        frame, theta = conjugate_to_diagonal(q)
        assert signed_angle_in_frame(q, frame) == pytest.approx(theta, abs=1e-10)


def test_commutator_norm_examples():
    a = Su2Elem.diagonal(0.9)
    assert commutator_norm(a, a) < 1e-12
    b = Su2Elem.from_axis_angle((0, 1, 0), math.pi / 2)
    assert commutator_norm(a, b) > 1e-3
    assert commutator_norm(Su2Elem(-1, 0, 0, 0), b) < 1e-15


def test_commutator_norm_zero_iff_parallel_or_central():
    rng = np.random.default_rng(41)
    for _ in range(500):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        t1, t2 = rng.uniform(0.1, math.pi - 0.1, size=2)
        a = Su2Elem.from_axis_angle(tuple(axis), t1)
        b = Su2Elem.from_axis_angle(tuple(-axis), t2)
        assert commutator_norm(a, b) < 1e-9
    for _ in range(500):
        a, b = random_elem(rng), random_elem(rng)
        ax = np.array(a.components()[1:])
        bx = np.array(b.components()[1:])
        cross = np.linalg.norm(np.cross(ax, bx))
        if cross > 0.1:
            assert commutator_norm(a, b) > 1e-9

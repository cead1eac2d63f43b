"""Unit quaternion arithmetic for SU(2)-valued holonomy data.

A group element is stored as a unit quaternion ``w + x i + y j + z k``.
The identification with 2x2 special unitary matrices used throughout is

    w + x i + y j + z k  <->  [[w + i x,  y + i z],
                               [-y + i z, w - i x]]

so the diagonal subgroup ``diag(exp(i t), exp(-i t))`` corresponds to
quaternions ``(cos t, sin t, 0, 0)``: the i-axis is the diagonal axis,
and the signed rotation angle of a diagonal element is ``atan2(x, w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_RENORM_TOL = 1e-12
_DIAGONAL_TOL = 1e-8
_CENTRAL_TOL = 1e-12


class NotDiagonalInFrame(ValueError):
    """The element is not diagonal after conjugating by the given frame."""


@dataclass(frozen=True)
class Su2Elem:
    """A unit quaternion (w, x, y, z) with |q| = 1.

    Construction renormalizes when the norm is within 1e-12 of 1 and
    raises ``ValueError`` otherwise, so downstream code may assume the
    unit-norm invariant holds to machine precision.
    """

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(n - 1.0) > _RENORM_TOL:
            raise ValueError(f"not a unit quaternion: |q| = {n!r}")
        if n != 1.0:
            object.__setattr__(self, "w", self.w / n)
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)

    @staticmethod
    def identity() -> "Su2Elem":
        return Su2Elem(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def diagonal(t: float) -> "Su2Elem":
        """The diagonal element diag(exp(i t), exp(-i t))."""
        return Su2Elem(math.cos(t), math.sin(t), 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis: tuple[float, float, float], theta: float) -> "Su2Elem":
        """Element with rotation angle ``theta`` about a (nonzero) axis.

        ``theta`` is the SU(2) angle: the matrix trace is ``2 cos(theta)``.
        """
        ax, ay, az = axis
        n = math.sqrt(ax * ax + ay * ay + az * az)
        if n == 0.0:
            raise ValueError("zero axis")
        s = math.sin(theta) / n
        return Su2Elem(math.cos(theta), ax * s, ay * s, az * s)

    def inverse(self) -> "Su2Elem":
        return Su2Elem(self.w, -self.x, -self.y, -self.z)

    def components(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)

    def axis(self) -> tuple[float, float, float]:
        """Unit rotation axis; raises ValueError for central elements."""
        v = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if v <= _CENTRAL_TOL:
            raise ValueError("central element has no axis")
        return (self.x / v, self.y / v, self.z / v)


def mul(a: Su2Elem, b: Su2Elem) -> Su2Elem:
    """Quaternion product, matching matrix multiplication in the fixed frame."""
    w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z
    x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y
    y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x
    z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w
    return Su2Elem(w, x, y, z)


def angle(q: Su2Elem) -> float:
    """Rotation angle in [0, pi]: arccos of the scalar part, clamped."""
    return math.acos(max(-1.0, min(1.0, q.w)))


def conjugate_to_diagonal(q: Su2Elem) -> tuple[Su2Elem, float]:
    """Return (frame, theta) with frame q frame^-1 = diag(e^{i theta}, e^{-i theta}).

    theta = angle(q) lies in [0, pi]. Central elements (imaginary part below
    1e-12) get the identity frame by convention. The conjugated element is
    diagonal to better than 1e-10.
    """
    v = math.sqrt(q.x * q.x + q.y * q.y + q.z * q.z)
    if v <= _CENTRAL_TOL:
        return Su2Elem.identity(), angle(q)
    ux, uy, uz = q.x / v, q.y / v, q.z / v
    # Rotate the axis u onto i. A rotation about u x i = (0, uz, -uy) by
    # acos(u.i) does it; when u = -i that axis vanishes, so rotate about j
    # by pi instead (SU(2) angle pi/2).
    dot = max(-1.0, min(1.0, ux))
    if dot > 1.0 - 1e-14:
        g = Su2Elem.identity()
    elif dot < -1.0 + 1e-14:
        g = Su2Elem.from_axis_angle((0.0, 1.0, 0.0), math.pi / 2)
    else:
        g = Su2Elem.from_axis_angle((0.0, uz, -uy), math.acos(dot) / 2)
    return g, angle(q)


def signed_angle_in_frame(q: Su2Elem, frame: Su2Elem, tol: float = _DIAGONAL_TOL) -> float:
    """Signed angle t in (-pi, pi] with frame q frame^-1 = diag(e^{it}, e^{-it}).

    Raises ``NotDiagonalInFrame`` when the off-diagonal part (the j, k
    components of the conjugated quaternion) exceeds ``tol``.
    """
    d = mul(mul(frame, q), frame.inverse())
    off = math.hypot(d.y, d.z)
    if off > tol:
        raise NotDiagonalInFrame(f"off-diagonal magnitude {off:.3g} exceeds {tol:.3g}")
    t = math.atan2(d.x, d.w)
    if t <= -math.pi:
        t = math.pi
    return t


def commutator_norm(a: Su2Elem, b: Su2Elem) -> float:
    """Distance from a b a^-1 b^-1 to the identity, as a 4-vector norm.

    Zero exactly when the rotation axes are parallel or either element is
    central; used with a 1e-6 cutoff to classify representations as
    irreducible.
    """
    c = mul(mul(mul(a, b), a.inverse()), b.inverse())
    return math.sqrt((c.w - 1.0) ** 2 + c.x * c.x + c.y * c.y + c.z * c.z)

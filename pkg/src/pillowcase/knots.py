"""Finitely presented knot-exterior groups with peripheral structure.

Words are sequences of signed 1-based generator indices: +i means the
i-th generator, -i its inverse.  No symbolic simplification is done;
all group semantics are via evaluation in SU(2).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .su2 import Su2Elem, mul

Word = tuple[int, ...]


class NotCoprime(ValueError):
    """Torus knot parameters must be coprime."""


class BadHomology(ValueError):
    """H1 of the exterior is not Z, or peripheral images are wrong."""


@dataclass(frozen=True)
class KnotPresentation:
    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    meridian: Word
    longitude: Word
    label: str = ""

    def __post_init__(self) -> None:
        n = len(self.generators)
        for w in (*self.relators, self.meridian, self.longitude):
            for s in w:
                if s == 0 or abs(s) > n:
                    raise ValueError(f"bad generator index {s} in word {w}")

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "generators": list(self.generators),
            "relators": [list(w) for w in self.relators],
            "meridian": list(self.meridian),
            "longitude": list(self.longitude),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "KnotPresentation":
        return cls(
            generators=tuple(d["generators"]),
            relators=tuple(tuple(int(s) for s in w) for w in d["relators"]),
            meridian=tuple(int(s) for s in d["meridian"]),
            longitude=tuple(int(s) for s in d["longitude"]),
            label=d.get("label", ""),
        )

    @classmethod
    def from_json(cls, text: str) -> "KnotPresentation":
        return cls.from_json_dict(json.loads(text))


@dataclass(frozen=True)
class SpliceProblem:
    """Gluing two knot exteriors along their boundary tori.

    The convention is meridian_1 = longitude_2 and longitude_1 = meridian_2:
    a representation of the splice is a pair (rho1, rho2) with
    rho1(mu1) = rho2(lambda2) and rho1(lambda1) = rho2(mu2).
    """

    left: KnotPresentation
    right: KnotPresentation


def inverse_word(w: Word) -> Word:
    return tuple(-s for s in reversed(w))


def eval_word(w: Word, assignment: list[Su2Elem]) -> Su2Elem:
    out = Su2Elem.identity()
    for s in w:
        g = assignment[abs(s) - 1]
        out = mul(out, g if s > 0 else g.inverse())
    return out


def exponent_vector(w: Word, n: int) -> list[int]:
    v = [0] * n
    for s in w:
        v[abs(s) - 1] += 1 if s > 0 else -1
    return v


def _diagonalize_with_left(rows: list[list[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Integer-diagonalize M by row and column operations; track row ops.

    Returns (U, D) with D diagonal-shaped and D = U M V for some invertible
    integer V we do not need: column operations preserve the column span,
    which is all the cokernel computation uses.
    """
    n = len(rows)
    c = len(rows[0]) if rows else 0
    M = [r[:] for r in rows]
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_op(i, j, k):  # row_i -= k * row_j
        M[i] = [a - k * b for a, b in zip(M[i], M[j])]
        U[i] = [a - k * b for a, b in zip(U[i], U[j])]

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        U[i], U[j] = U[j], U[i]

    def col_op(i, j, k):  # col_i -= k * col_j
        for r in M:
            r[i] -= k * r[j]

    def swap_cols(i, j):
        for r in M:
            r[i], r[j] = r[j], r[i]

    t = 0
    while t < min(n, c):
        # find a pivot
        piv = None
        for i in range(t, n):
            for j in range(t, c):
                if M[i][j] != 0:
                    piv = (i, j)
                    break
            if piv:
                break
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            done = True
            for i in range(t + 1, n):
                if M[i][t] != 0:
                    k = M[i][t] // M[t][t]
                    row_op(i, t, k)
                    if M[i][t] != 0:
                        swap_rows(t, i)
                    done = False
            for j in range(t + 1, c):
                if M[t][j] != 0:
                    k = M[t][j] // M[t][t]
                    col_op(j, t, k)
                    if M[t][j] != 0:
                        swap_cols(t, j)
                    done = False
            if done:
                break
        t += 1
    return U, M


def validate_peripheral(k: KnotPresentation) -> dict:
    """Check H1(exterior) = Z with meridian a generator and longitude zero.

    Returns a report dict; raises BadHomology on failure.
    """
    n = len(k.generators)
    rows = [[0] * len(k.relators) for _ in range(n)]
    for j, w in enumerate(k.relators):
        for i, e in enumerate(exponent_vector(w, n)):
            rows[i][j] = e
    U, D = _diagonalize_with_left(rows) if k.relators else (
        [[1 if i == j else 0 for j in range(n)] for i in range(n)],
        [[] for _ in range(n)],
    )
    c = len(k.relators)
    diag = [D[i][i] for i in range(min(n, c))]
    torsion = [abs(d) for d in diag if d != 0 and abs(d) != 1]
    free_idx = [i for i in range(n) if i >= len(diag) or diag[i] == 0]
    report = {
        "h1_diagonal": diag,
        "h1_free_rank": len(free_idx),
        "h1_torsion": torsion,
    }
    if torsion or len(free_idx) != 1:
        raise BadHomology(f"H1 is not Z: {report}")
    fi = free_idx[0]

    def image(w: Word) -> int:
        v = exponent_vector(w, n)
        return sum(U[fi][j] * v[j] for j in range(n))

    mu_img = image(k.meridian)
    lam_img = image(k.longitude)
    report["meridian_image"] = mu_img
    report["longitude_image"] = lam_img
    if abs(mu_img) != 1:
        raise BadHomology(f"meridian does not generate H1: {report}")
    if lam_img != 0:
        raise BadHomology(f"longitude is nonzero in H1: {report}")
    report["ok"] = True
    return report


def h1_generator_images(k: KnotPresentation) -> list[int]:
    """Integer H1 images of the generators, normalized so the meridian maps to +1.

    Only valid for presentations passing validate_peripheral.
    """
    validate_peripheral(k)
    n = len(k.generators)
    rows = [[0] * len(k.relators) for _ in range(n)]
    for j, w in enumerate(k.relators):
        for i, e in enumerate(exponent_vector(w, n)):
            rows[i][j] = e
    if k.relators:
        U, D = _diagonalize_with_left(rows)
        diag = [D[i][i] for i in range(min(n, len(k.relators)))]
    else:
        U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        diag = []
    fi = [i for i in range(n) if i >= len(diag) or diag[i] == 0][0]
    imgs = [U[fi][j] for j in range(n)]
    mu_img = sum(imgs[j] * e for j, e in enumerate(exponent_vector(k.meridian, n)))
    if mu_img < 0:
        imgs = [-e for e in imgs]
    return imgs


def torus_knot(p: int, q: int) -> KnotPresentation:
    """The (p, q) torus knot exterior: <x, y | x^p = y^q>.

    The meridian is mu = x^u y^v for the Bezout pair with minimal
    nonnegative u (u q + v p = 1), and the longitude is
    lambda = x^p mu^(-p q).
    """
    if math.gcd(p, q) != 1:
        raise NotCoprime(f"gcd({p},{q}) != 1")
    if abs(p) < 2 or abs(q) < 2:
        raise ValueError("|p| and |q| must be at least 2")
    u = pow(q, -1, abs(p)) % abs(p)
    v = (1 - u * q) // p
    assert u * q + v * p == 1
    mu: Word = tuple([1] * u + power_word(2, v))
    relator: Word = tuple([1] * p + [-2] * q)
    lam: Word = tuple([1] * p + list(inverse_word(mu)) * (p * q))
    return KnotPresentation(
        generators=("x", "y"),
        relators=(relator,),
        meridian=mu,
        longitude=lam,
        label=f"torus({p},{q})",
    )


def power_word(gen_index: int, e: int) -> list[int]:
    """Word for generator^e as a signed index run."""
    return [gen_index] * e if e >= 0 else [-gen_index] * (-e)


def unknot() -> KnotPresentation:
    """Free group on one generator; meridian x, empty longitude."""
    return KnotPresentation(
        generators=("x",),
        relators=(),
        meridian=(1,),
        longitude=(),
        label="unknot",
    )


def trefoil() -> KnotPresentation:
    return torus_knot(2, 3)


def splice(left: KnotPresentation, right: KnotPresentation) -> SpliceProblem:
    """Glue two exteriors, identifying mu1 = lambda2 and lambda1 = mu2."""
    validate_peripheral(left)
    validate_peripheral(right)
    return SpliceProblem(left=left, right=right)

"""Forward-chaining calculus over surgery terms and Floer-rank judgments.

Terms name three-manifolds built from atoms by Dehn surgery on knots with
slope 0 or 1/n; judgments track only whether an instanton invariant (plain
I or the w-decorated I^w used for 0-surgeries) vanishes, does not vanish,
or is identified with another term's invariant.  Saturation applies four
rules to a fixpoint inside a bounded slope window:

  triangle-iso        a vanishing I^w(Y_0(K)) makes consecutive 1/n
                      surgeries carry isomorphic I
  triangle-collapse   two vanishing consecutive 1/n surgeries force
                      I^w(Y_0(K)) = 0
  cable-surgery       1/4 surgery on K is 1 surgery on the (2,1)-cable
  zero-surgery-detection
                      0-surgery on the cable of a fully flagged knot has
                      nonvanishing I^w
  transport           symmetry of iso/diffeo, diffeomorphism invariance,
                      and moving (non)vanishing across isomorphisms

A subject holding both a vanishing and a nonvanishing judgment yields a
CONTRADICTION fact whose derivation tree replays mechanically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass


class Malformed(ValueError):
    """Ill-formed term, claim, or axiom."""


class WindowTooSmall(RuntimeError):
    """A rule demanded a slope outside the window; enlarge and rerun."""


class UnknownFact(KeyError):
    """The fact is not present in the store."""


class ReplayFailed(RuntimeError):
    """A derivation did not re-validate against its rule definition."""


# --- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class S3:
    pass


@dataclass(frozen=True)
class S2xS1:
    pass


@dataclass(frozen=True)
class KnotSym:
    name: str
    irreducible_exterior: bool = False
    boundary_incompressible: bool = False
    generates_homology: bool = False

    @property
    def fully_flagged(self) -> bool:
        return (
            self.irreducible_exterior
            and self.boundary_incompressible
            and self.generates_homology
        )


@dataclass(frozen=True)
class Cable21:
    knot: object

    def __post_init__(self) -> None:
        if not isinstance(self.knot, (KnotSym, Cable21)):
            raise Malformed("Cable21 applies to knot terms only")


@dataclass(frozen=True)
class Surg:
    """Dehn surgery with slope num/den restricted to 0 or 1/n."""

    base: object
    knot: object
    num: int
    den: int

    def __post_init__(self) -> None:
        if not is_manifold(self.base):
            raise Malformed(f"surgery base must be a manifold term: {self.base!r}")
        if not isinstance(self.knot, (KnotSym, Cable21)):
            raise Malformed(f"surgery knot must be a knot term: {self.knot!r}")
        if (self.num, self.den) != (0, 1) and not (self.num == 1 and self.den != 0):
            raise Malformed(f"slope must be 0 or 1/n, got {self.num}/{self.den}")


def is_manifold(t) -> bool:
    return isinstance(t, (Atom, S3, S2xS1, Surg))


def surgery(base, knot, num: int, den: int):
    """Surgery term constructor; the trivial slope 1/0 returns the base."""
    if (num, den) == (1, 0):
        return base
    return Surg(base, knot, num, den)


def fmt_term(t) -> str:
    if isinstance(t, Atom):
        return t.name
    if isinstance(t, S3):
        return "S^3"
    if isinstance(t, S2xS1):
        return "S^2 x S^1"
    if isinstance(t, KnotSym):
        return t.name
    if isinstance(t, Cable21):
        return fmt_term(t.knot) + "_{2,1}"
    if isinstance(t, Surg):
        if t.num == 0:
            slope = "0"
        elif t.den == 1:
            slope = "1"
        elif t.den == -1:
            slope = "-1"
        elif t.den > 0:
            slope = f"{{1/{t.den}}}"
        else:
            slope = f"{{-1/{-t.den}}}"
        return f"{fmt_term(t.base)}_{slope}({fmt_term(t.knot)})"
    raise Malformed(f"not a term: {t!r}")


def fmt_judgment(flavor: str, t) -> str:
    head = "I" if flavor == "I" else "I^w"
    return f"{head}({fmt_term(t)})"


# --- facts -------------------------------------------------------------------

FLAVORS = ("I", "Iw")


@dataclass(frozen=True)
class Provenance:
    rule: str
    premises: tuple = ()
    note: str = ""


@dataclass(frozen=True)
class Fact:
    subject: object
    claim: tuple
    provenance: Provenance = Provenance("axiom")

    @property
    def key(self) -> tuple:
        return (self.subject, self.claim)


def vanishes(subject, flavor: str = "I") -> Fact:
    return Fact(subject, ("vanishes", flavor))


def nonvanishes(subject, flavor: str = "I") -> Fact:
    return Fact(subject, ("nonvanishes", flavor))


def iso_to(subject, other, flavor: str = "I") -> Fact:
    return Fact(subject, ("iso", flavor, other))


def diffeo_to(subject, other) -> Fact:
    return Fact(subject, ("diffeo", other))


def fmt_fact(f: Fact) -> str:
    kind = f.claim[0]
    if kind == "vanishes":
        return f"{fmt_judgment(f.claim[1], f.subject)} = 0"
    if kind == "nonvanishes":
        return f"{fmt_judgment(f.claim[1], f.subject)} != 0"
    if kind == "iso":
        return (
            f"{fmt_judgment(f.claim[1], f.subject)} ~= "
            f"{fmt_judgment(f.claim[1], f.claim[2])}"
        )
    if kind == "diffeo":
        return f"{fmt_term(f.subject)} is diffeomorphic to {fmt_term(f.claim[1])}"
    if kind == "contradiction":
        return (
            f"CONTRADICTION: {fmt_judgment(f.claim[1], f.subject)} "
            "both vanishes and does not"
        )
    raise Malformed(f"unknown claim {f.claim!r}")


def _validate_claim(f: Fact, allow_contradiction: bool = False) -> None:
    kind = f.claim[0] if f.claim else None
    if kind in ("vanishes", "nonvanishes"):
        if len(f.claim) != 2 or f.claim[1] not in FLAVORS:
            raise Malformed(f"bad claim {f.claim!r}")
        if not is_manifold(f.subject):
            raise Malformed("judgments apply to manifold terms")
    elif kind == "iso":
        if len(f.claim) != 3 or f.claim[1] not in FLAVORS:
            raise Malformed(f"bad claim {f.claim!r}")
        if not (is_manifold(f.subject) and is_manifold(f.claim[2])):
            raise Malformed("iso relates manifold terms")
    elif kind == "diffeo":
        if len(f.claim) != 2:
            raise Malformed(f"bad claim {f.claim!r}")
        if not (is_manifold(f.subject) and is_manifold(f.claim[1])):
            raise Malformed("diffeo relates manifold terms")
    elif kind == "contradiction" and allow_contradiction:
        pass
    else:
        raise Malformed(f"unknown claim {f.claim!r}")


# --- store -------------------------------------------------------------------

class Store:
    """Fact set with the standing vanishing judgment for I^w(S^2 x S^1)."""

    def __init__(self, window: int = 8):
        if window < 1:
            raise Malformed("window must be at least 1")
        self.window = window
        self._facts: dict[tuple, Fact] = {}
        self._add(Fact(S2xS1(), ("vanishes", "Iw"), Provenance("preloaded")))

    def _add(self, f: Fact) -> bool:
        if f.key in self._facts:
            return False
        self._facts[f.key] = f
        return True

    def assert_axiom(self, f: Fact) -> None:
        _validate_claim(f)
        self._add(f)

    def facts(self) -> list[Fact]:
        return sorted(self._facts.values(), key=lambda f: (fmt_fact(f), repr(f.claim)))

    def lookup(self, subject, claim) -> Fact | None:
        return self._facts.get((subject, claim))

    def get(self, subject, claim) -> Fact:
        f = self.lookup(subject, claim)
        if f is None:
            raise UnknownFact(f"no fact {claim!r} about {subject!r}")
        return f

    def contradictions(self) -> list[Fact]:
        return [f for f in self.facts() if f.claim[0] == "contradiction"]

    def __eq__(self, other) -> bool:
        return isinstance(other, Store) and set(self._facts) == set(other._facts)

    def __len__(self) -> int:
        return len(self._facts)


def _collect_pairs(store: Store) -> list[tuple]:
    """All (base, knot) surgery pairs appearing in any stored term."""
    pairs = set()

    def walk(t):
        if isinstance(t, Surg):
            pairs.add((t.base, t.knot))
            walk(t.base)
        elif isinstance(t, Cable21):
            pass

    for f in store._facts.values():
        walk(f.subject)
        for part in f.claim[1:]:
            if is_manifold(part):
                walk(part)
    return sorted(pairs, key=lambda bk: (fmt_term(bk[0]), fmt_term(bk[1])))


def saturate(store: Store) -> Store:
    """Close the store under the rules within its slope window."""
    out = Store(window=store.window)
    for f in store._facts.values():
        out._add(f)
    N = out.window
    changed = True
    while changed:
        changed = False
        pairs = _collect_pairs(out)
        for b, k in pairs:
            # cable-surgery: demands slope 1/4 for the plain knot
            if not isinstance(k, Cable21):
                if N < 4:
                    raise WindowTooSmall(
                        f"cable-surgery needs slope 1/4 but the window is {N}"
                    )
                changed |= out._add(
                    Fact(
                        Surg(b, k, 1, 4),
                        ("diffeo", Surg(b, Cable21(k), 1, 1)),
                        Provenance("cable-surgery"),
                    )
                )
            # zero-surgery-detection on fully flagged cables
            if (
                isinstance(k, Cable21)
                and isinstance(k.knot, KnotSym)
                and k.knot.fully_flagged
            ):
                changed |= out._add(
                    Fact(
                        Surg(b, k, 0, 1),
                        ("nonvanishes", "Iw"),
                        Provenance(
                            "zero-surgery-detection", (), f"flags on {k.knot.name}"
                        ),
                    )
                )
            # triangle-iso
            zf = out.lookup(Surg(b, k, 0, 1), ("vanishes", "Iw"))
            if zf is not None:
                for n in range(-N, N):
                    hi = surgery(b, k, 1, n + 1)
                    lo = surgery(b, k, 1, n)
                    changed |= out._add(
                        Fact(
                            hi,
                            ("iso", "I", lo),
                            Provenance("triangle-iso", (zf,), f"n={n}"),
                        )
                    )
            # triangle-collapse
            for n in range(-N, N):
                f1 = out.lookup(surgery(b, k, 1, n + 1), ("vanishes", "I"))
                f2 = out.lookup(surgery(b, k, 1, n), ("vanishes", "I"))
                if f1 is not None and f2 is not None:
                    changed |= out._add(
                        Fact(
                            Surg(b, k, 0, 1),
                            ("vanishes", "Iw"),
                            Provenance("triangle-collapse", (f1, f2), f"n={n}"),
                        )
                    )
        # transport
        for f in list(out.facts()):
            kind = f.claim[0]
            if kind == "diffeo":
                other = f.claim[1]
                changed |= out._add(
                    Fact(other, ("diffeo", f.subject), Provenance("transport", (f,), "symmetry"))
                )
                for fl in FLAVORS:
                    changed |= out._add(
                        Fact(
                            f.subject,
                            ("iso", fl, other),
                            Provenance("transport", (f,), "diffeomorphism invariance"),
                        )
                    )
            elif kind == "iso":
                fl, other = f.claim[1], f.claim[2]
                changed |= out._add(
                    Fact(other, ("iso", fl, f.subject), Provenance("transport", (f,), "symmetry"))
                )
                for cl in ("vanishes", "nonvanishes"):
                    src = out.lookup(f.subject, (cl, fl))
                    if src is not None:
                        changed |= out._add(
                            Fact(other, (cl, fl), Provenance("transport", (src, f)))
                        )
        # record contradictions
        for f in list(out.facts()):
            if f.claim[0] == "vanishes":
                g = out.lookup(f.subject, ("nonvanishes", f.claim[1]))
                if g is not None:
                    changed |= out._add(
                        Fact(
                            f.subject,
                            ("contradiction", f.claim[1]),
                            Provenance("clash", (f, g)),
                        )
                    )
    return out


def explain(store: Store, fact: Fact) -> str:
    """Indented derivation tree of the store's copy of the fact."""
    root = store.get(fact.subject, fact.claim)
    lines: list[str] = []

    def rec(f: Fact, depth: int) -> None:
        tag = f.provenance.rule
        if f.provenance.note:
            tag += f" {f.provenance.note}"
        lines.append("  " * depth + fmt_fact(f) + f"   [{tag}]")
        for p in f.provenance.premises:
            rec(p, depth + 1)

    rec(root, 0)
    return "\n".join(lines)


# --- mechanical replay -------------------------------------------------------

def _replay_one(store: Store, f: Fact) -> None:
    prov = f.provenance
    for p in prov.premises:
        if store.lookup(p.subject, p.claim) is None:
            raise ReplayFailed(f"premise missing from store: {fmt_fact(p)}")
    r = prov.rule
    if r in ("axiom", "preloaded"):
        return
    try:
        ok = _rule_check(store, f)
    except ReplayFailed:
        raise
    except Exception as exc:
        raise ReplayFailed(f"derivation does not replay: {fmt_fact(f)} [{r}]") from exc
    if not ok:
        raise ReplayFailed(f"derivation does not replay: {fmt_fact(f)} [{r}]")


def _rule_check(store: Store, f: Fact) -> bool:
    prov = f.provenance
    r = prov.rule
    if r == "cable-surgery":
        s = f.subject
        ok = (
            isinstance(s, Surg)
            and (s.num, s.den) == (1, 4)
            and f.claim == ("diffeo", Surg(s.base, Cable21(s.knot), 1, 1))
        )
    elif r == "zero-surgery-detection":
        s = f.subject
        ok = (
            isinstance(s, Surg)
            and (s.num, s.den) == (0, 1)
            and isinstance(s.knot, Cable21)
            and isinstance(s.knot.knot, KnotSym)
            and s.knot.knot.fully_flagged
            and f.claim == ("nonvanishes", "Iw")
        )
    elif r == "triangle-iso":
        (zf,) = prov.premises
        z = zf.subject
        n = int(prov.note.split("=")[1])
        ok = (
            isinstance(z, Surg)
            and (z.num, z.den) == (0, 1)
            and zf.claim == ("vanishes", "Iw")
            and -store.window <= n < store.window
            and f.subject == surgery(z.base, z.knot, 1, n + 1)
            and f.claim == ("iso", "I", surgery(z.base, z.knot, 1, n))
        )
    elif r == "triangle-collapse":
        f1, f2 = prov.premises
        s = f.subject
        n = int(prov.note.split("=")[1])
        ok = (
            isinstance(s, Surg)
            and (s.num, s.den) == (0, 1)
            and f.claim == ("vanishes", "Iw")
            and f1.claim == ("vanishes", "I")
            and f2.claim == ("vanishes", "I")
            and -store.window <= n < store.window
            and f1.subject == surgery(s.base, s.knot, 1, n + 1)
            and f2.subject == surgery(s.base, s.knot, 1, n)
        )
    elif r == "transport":
        if prov.note == "symmetry":
            (p,) = prov.premises
            if p.claim[0] == "diffeo":
                ok = f.claim == ("diffeo", p.subject) and f.subject == p.claim[1]
            else:
                ok = (
                    p.claim[0] == "iso"
                    and f.claim == ("iso", p.claim[1], p.subject)
                    and f.subject == p.claim[2]
                )
        elif prov.note == "diffeomorphism invariance":
            (p,) = prov.premises
            ok = (
                p.claim[0] == "diffeo"
                and f.subject == p.subject
                and f.claim[0] == "iso"
                and f.claim[1] in FLAVORS
                and f.claim[2] == p.claim[1]
            )
        else:
            src, iso = prov.premises
            ok = (
                iso.claim[0] == "iso"
                and src.subject == iso.subject
                and src.claim[0] in ("vanishes", "nonvanishes")
                and src.claim[1] == iso.claim[1]
                and f.subject == iso.claim[2]
                and f.claim == src.claim
            )
    elif r == "clash":
        vf, nf = prov.premises
        ok = (
            vf.subject == f.subject
            and nf.subject == f.subject
            and vf.claim == ("vanishes", f.claim[1])
            and nf.claim == ("nonvanishes", f.claim[1])
            and f.claim[0] == "contradiction"
        )
    else:
        raise ReplayFailed(f"unknown rule {r!r}")
    return ok


def replay(store: Store) -> int:
    """Re-validate every derivation; returns the number of facts checked."""
    for f in store.facts():
        _replay_one(store, f)
    return len(store)


# --- JSON axiom files --------------------------------------------------------

_FLAG_NAMES = ("irreducible_exterior", "boundary_incompressible", "generates_homology")


def term_from_json(d):
    if d == "S3":
        return S3()
    if d == "S2xS1":
        return S2xS1()
    if not isinstance(d, dict) or len(d) < 1:
        raise Malformed(f"bad term {d!r}")
    if "atom" in d:
        return Atom(d["atom"])
    if "knot" in d:
        flags = set(d.get("flags", ()))
        bad = flags - set(_FLAG_NAMES)
        if bad:
            raise Malformed(f"unknown knot flags {sorted(bad)}")
        return KnotSym(d["knot"], *[name in flags for name in _FLAG_NAMES])
    if "cable21" in d:
        return Cable21(term_from_json(d["cable21"]))
    if "surg" in d:
        s = d["surg"]
        num, den = _parse_slope(s["slope"])
        return surgery(term_from_json(s["base"]), term_from_json(s["knot"]), num, den)
    raise Malformed(f"bad term {d!r}")


def _parse_slope(text: str) -> tuple[int, int]:
    text = str(text).strip()
    if text == "0":
        return (0, 1)
    if "/" in text:
        num, den = text.split("/")
        if int(num) != 1:
            raise Malformed(f"slope must be 0 or 1/n, got {text!r}")
        return (1, int(den))
    if int(text) == 1:
        return (1, 1)
    raise Malformed(f"slope must be 0 or 1/n, got {text!r}")


def term_to_json(t):
    if isinstance(t, S3):
        return "S3"
    if isinstance(t, S2xS1):
        return "S2xS1"
    if isinstance(t, Atom):
        return {"atom": t.name}
    if isinstance(t, KnotSym):
        flags = [name for name in _FLAG_NAMES if getattr(t, name)]
        out = {"knot": t.name}
        if flags:
            out["flags"] = flags
        return out
    if isinstance(t, Cable21):
        return {"cable21": term_to_json(t.knot)}
    if isinstance(t, Surg):
        slope = "0" if t.num == 0 else f"1/{t.den}"
        return {
            "surg": {
                "base": term_to_json(t.base),
                "knot": term_to_json(t.knot),
                "slope": slope,
            }
        }
    raise Malformed(f"not a term: {t!r}")


def axiom_from_json(d: dict) -> Fact:
    kind = d.get("claim")
    subject = term_from_json(d["subject"])
    if kind in ("vanishes", "nonvanishes"):
        flavor = d.get("flavor", "I")
        f = Fact(subject, (kind, flavor))
    elif kind == "diffeo":
        f = Fact(subject, ("diffeo", term_from_json(d["other"])))
    elif kind == "iso":
        f = Fact(subject, ("iso", d.get("flavor", "I"), term_from_json(d["other"])))
    else:
        raise Malformed(f"unknown axiom claim {kind!r}")
    _validate_claim(f)
    return f


def load_axioms(text: str) -> tuple[list[Fact], int | None]:
    doc = json.loads(text)
    axioms = [axiom_from_json(a) for a in doc["axioms"]]
    return axioms, doc.get("window")


def run_axioms(text: str, window: int | None = None) -> Store:
    """Parse an axiom file, build a store, and saturate it."""
    axioms, file_window = load_axioms(text)
    store = Store(window=window if window is not None else (file_window or 8))
    for a in axioms:
        store.assert_axiom(a)
    return saturate(store)

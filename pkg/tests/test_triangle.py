"""Tests for the surgery-term calculus and its saturation engine."""

from __future__ import annotations

import time
from pathlib import Path

import pytest

from pillowcase.triangle import (
    Atom,
    Cable21,
    Fact,
    KnotSym,
    Malformed,
    Provenance,
    ReplayFailed,
    S2xS1,
    S3,
    Store,
    Surg,
    UnknownFact,
    WindowTooSmall,
    diffeo_to,
    explain,
    fmt_fact,
    fmt_term,
    load_axioms,
    nonvanishes,
    replay,
    run_axioms,
    saturate,
    surgery,
    term_from_json,
    term_to_json,
    vanishes,
)

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

FLAGGED_K = KnotSym("K", True, True, True)
Y = Atom("Y")


def _fixture(name: str) -> str:
    return (FIXTURES / name).read_text()


def test_term_formatting() -> None:
    assert fmt_term(Y) == "Y"
    assert fmt_term(S3()) == "S^3"
    assert fmt_term(S2xS1()) == "S^2 x S^1"
    assert fmt_term(Cable21(KnotSym("K"))) == "K_{2,1}"
    assert fmt_term(Surg(Y, KnotSym("K"), 0, 1)) == "Y_0(K)"
    assert fmt_term(Surg(Y, KnotSym("K"), 1, 1)) == "Y_1(K)"
    assert fmt_term(Surg(Y, KnotSym("K"), 1, 4)) == "Y_{1/4}(K)"
    assert fmt_term(Surg(Y, KnotSym("K"), 1, -3)) == "Y_{-1/3}(K)"


def test_term_validation() -> None:
    with pytest.raises(Malformed):
        Cable21(Y)
    with pytest.raises(Malformed):
        Surg(Y, KnotSym("K"), 2, 3)
    with pytest.raises(Malformed):
        Surg(Y, KnotSym("K"), 1, 0)
    with pytest.raises(Malformed):
        Surg(KnotSym("K"), KnotSym("K"), 0, 1)
    # the trivial slope collapses to the base
    assert surgery(Y, KnotSym("K"), 1, 0) == Y


def test_term_json_round_trip() -> None:
    terms = [
        S3(),
        S2xS1(),
        Y,
        Surg(Y, FLAGGED_K, 0, 1),
        Surg(Y, Cable21(KnotSym("K")), 1, 1),
        Surg(S2xS1(), KnotSym("L"), 1, -5),
    ]
    for t in terms:
        assert term_from_json(term_to_json(t)) == t
    with pytest.raises(Malformed):
        term_from_json({"knot": "K", "flags": ["sturdy"]})
    with pytest.raises(Malformed):
        term_from_json({"surg": {"base": {"atom": "Y"}, "knot": {"knot": "K"}, "slope": "2/3"}})


def test_assert_axiom_rejects_malformed() -> None:
    store = Store()
    with pytest.raises(Malformed):
        store.assert_axiom(vanishes(KnotSym("K")))
    with pytest.raises(Malformed):
        store.assert_axiom(Fact(Y, ("sings",)))
    with pytest.raises(Malformed):
        store.assert_axiom(Fact(Y, ("contradiction", "I")))
    with pytest.raises(Malformed):
        store.assert_axiom(Fact(Y, ("vanishes", "Iww")))


def test_preloaded_fact_present() -> None:
    store = Store()
    f = store.get(S2xS1(), ("vanishes", "Iw"))
    assert f.provenance.rule == "preloaded"


def test_empty_store_saturates_to_preload_only() -> None:
    sat = saturate(Store())
    assert len(sat) == 1
    assert sat.contradictions() == []


def _contradiction_fixture(name: str, window: int | None = None):
    t0 = time.perf_counter()
    store = run_axioms(_fixture(name), window=window)
    elapsed = time.perf_counter() - t0
    cons = store.contradictions()
    return store, cons, elapsed


def test_vanishing_zero_surgery_fixture_reaches_contradiction() -> None:
    store, cons, elapsed = _contradiction_fixture("axioms_vanishing_zero_surgery.json")
    assert elapsed < 1.0
    assert len(cons) == 1
    con = cons[0]
    assert con.subject == Surg(Y, Cable21(FLAGGED_K), 0, 1)
    assert con.claim == ("contradiction", "Iw")
    golden = (GOLDEN / "derivation_vanishing_zero_surgery.txt").read_text()
    assert explain(store, con) + "\n" == golden


def test_s2xs1_zero_surgery_fixture_reaches_contradiction() -> None:
    store, cons, elapsed = _contradiction_fixture("axioms_s2xs1_zero_surgery.json")
    assert elapsed < 1.0
    assert len(cons) == 1
    con = cons[0]
    flagged_j = KnotSym("J", True, True, True)
    assert con.subject == Surg(Y, Cable21(flagged_j), 0, 1)
    golden = (GOLDEN / "derivation_s2xs1_zero_surgery.txt").read_text()
    assert explain(store, con) + "\n" == golden


def test_contradiction_chain_passes_through_cable_diffeo() -> None:
    store, cons, _ = _contradiction_fixture("axioms_vanishing_zero_surgery.json")
    tree = explain(store, cons[0])
    assert "Y_{1/4}(K) is diffeomorphic to Y_1(K_{2,1})   [cable-surgery]" in tree
    assert "[triangle-collapse n=0]" in tree
    assert "[zero-surgery-detection flags on K]" in tree


def test_contradiction_within_window_five() -> None:
    _, cons, elapsed = _contradiction_fixture(
        "axioms_vanishing_zero_surgery.json", window=5
    )
    assert len(cons) == 1
    assert elapsed < 1.0


def test_window_too_small_is_reported() -> None:
    with pytest.raises(WindowTooSmall):
        run_axioms(_fixture("axioms_vanishing_zero_surgery.json"), window=3)


def test_replay_validates_both_fixtures() -> None:
    for name in ("axioms_vanishing_zero_surgery.json", "axioms_s2xs1_zero_surgery.json"):
        store = run_axioms(_fixture(name))
        assert replay(store) == len(store)


def test_replay_rejects_tampered_derivation() -> None:
    store = run_axioms(_fixture("axioms_vanishing_zero_surgery.json"))
    forged = Fact(Atom("Z"), ("vanishes", "I"), Provenance("triangle-iso", (), "n=0"))
    store._facts[forged.key] = forged
    with pytest.raises(ReplayFailed):
        replay(store)


def test_saturate_is_idempotent() -> None:
    s1 = run_axioms(_fixture("axioms_vanishing_zero_surgery.json"))
    s2 = saturate(s1)
    assert s1 == s2


def test_fact_listing_ignores_insertion_order() -> None:
    axioms, _ = load_axioms(_fixture("axioms_vanishing_zero_surgery.json"))
    fwd = Store()
    for a in axioms:
        fwd.assert_axiom(a)
    rev = Store()
    for a in reversed(axioms):
        rev.assert_axiom(a)
    listing_fwd = [fmt_fact(f) for f in saturate(fwd).facts()]
    listing_rev = [fmt_fact(f) for f in saturate(rev).facts()]
    assert listing_fwd == listing_rev


def test_explain_unknown_fact() -> None:
    store = saturate(Store())
    with pytest.raises(UnknownFact):
        explain(store, nonvanishes(Y))


def test_transport_across_asserted_diffeo() -> None:
    # vanishing moves across a user-asserted diffeomorphism to S^2 x S^1
    store = Store()
    store.assert_axiom(diffeo_to(Atom("M"), S2xS1()))
    sat = saturate(store)
    moved = sat.get(Atom("M"), ("vanishes", "Iw"))
    assert moved.provenance.rule == "transport"


def test_no_contradiction_without_flags() -> None:
    # stripping the knot flags removes the nonvanishing half of the clash
    doc = _fixture("axioms_vanishing_zero_surgery.json").replace(
        '"flags": [\n              "irreducible_exterior",\n              "boundary_incompressible",\n              "generates_homology"\n            ]',
        '"flags": []',
    )
    store = run_axioms(doc)
    assert store.contradictions() == []

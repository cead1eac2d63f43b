"""
Deriving a contradiction in the surgery calculus
================================================

Load a small axiom file asserting that instanton homology vanishes for
a manifold and for the 0-surgery on a suitably flagged knot inside it,
saturate the rule set, and print the derivation that pins the
contradiction on the zero-surgery of the (2,1)-cable.
"""

from pathlib import Path

from pillowcase.triangle import explain, fmt_fact, run_axioms

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

text = (FIXTURES / "axioms_vanishing_zero_surgery.json").read_text()
store = run_axioms(text)

print(f"facts derived: {len(store)}")
for f in store.facts():
    print(f"  {fmt_fact(f)}   [{f.provenance.rule}]")

clashes = store.contradictions()
print(f"\ncontradictions: {len(clashes)}")
for c in clashes:
    print("--- full derivation ---")
    print(explain(store, c))

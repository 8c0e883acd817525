import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from parsetalk.hierarchies import (
    ClassHierarchy,
    ConceptSystem,
    UnknownName,
    permit,
    roles_permitting,
    subsumes_class,
    validate_hierarchy,
)

WORD_CLASSES = ClassHierarchy({
    "WordActor": None,
    "Noun": "WordActor",
    "Substantive": "Noun",
    "Preposition": "WordActor",
})

# the concept facts given for the running example
EXAMPLE_CONCEPTS = ConceptSystem.build(
    {"Hardware": [], "Computer": ["Hardware"], "Notebook": ["Computer"], "Harddisk": []},
    ["hasPart"],
    [("Computer", "hasPart", "Harddisk")],
)


def test_class_examples():
    assert subsumes_class(WORD_CLASSES, "Substantive", "Noun")
    assert subsumes_class(WORD_CLASSES, "Substantive", "WordActor")
    assert not subsumes_class(WORD_CLASSES, "Noun", "Substantive")
    assert not subsumes_class(WORD_CLASSES, "Preposition", "Noun")
    for c in WORD_CLASSES.classes:
        assert subsumes_class(WORD_CLASSES, c, c)


def test_unknown_names():
    with pytest.raises(UnknownName):
        subsumes_class(WORD_CLASSES, "Verb", "WordActor")
    with pytest.raises(UnknownName):
        permit(EXAMPLE_CONCEPTS, "Laptop", "hasPart", "Harddisk")
    with pytest.raises(UnknownName):
        permit(EXAMPLE_CONCEPTS, "Computer", "hasColour", "Harddisk")


def test_permit_examples():
    assert permit(EXAMPLE_CONCEPTS, "Computer", "hasPart", "Harddisk")
    assert permit(EXAMPLE_CONCEPTS, "Notebook", "hasPart", "Harddisk")
    assert not permit(EXAMPLE_CONCEPTS, "Harddisk", "hasPart", "Computer")
    assert not permit(EXAMPLE_CONCEPTS, "Hardware", "hasPart", "Harddisk")


def test_roles_permitting(bundle):
    cs = bundle.concepts
    got = roles_permitting(cs, "NOTEBOOK-00003", "120MB-HARDDISK-00004", {"HasHarddisk", "HasPrice"})
    assert got == {"HasHarddisk"}
    assert roles_permitting(cs, "NOTEBOOK-00003", "120MB-HARDDISK-00004", set()) == frozenset()
    bare = ConceptSystem.build({"A": [], "B": []}, ["r", "s"], [])
    assert roles_permitting(bare, "A", "B", {"r", "s"}) == frozenset()


def test_validate_clean(bundle):
    assert validate_hierarchy(bundle.classes) == []
    assert validate_hierarchy(bundle.concepts) == []


def test_validate_reports_cycles_and_dangling_names():
    looped = ClassHierarchy({"WordActor": None, "A": "B", "B": "A"})
    diags = validate_hierarchy(looped)
    assert len([d for d in diags if "cycle" in d]) == 1
    cs = ConceptSystem.build({"A": ["B"], "B": ["A"], "C": []}, ["r"], [("A", "q", "C")])
    diags = validate_hierarchy(cs)
    assert len([d for d in diags if "cycle" in d]) == 1
    assert len([d for d in diags if "undeclared role 'q'" in d]) == 1
    orphan = ClassHierarchy({"WordActor": None, "A": "Missing"})
    assert any("undeclared parent" in d for d in validate_hierarchy(orphan))


# -- brute force ----------------------------------------------------------------


def closure(concepts):
    """Reflexive-transitive isa as an explicit set of pairs (Warshall)."""
    names = sorted(concepts)
    reach = {(a, a) for a in names} | {(a, p) for a in names for p in concepts[a]}
    for k in names:
        for i in names:
            for j in names:
                if (i, k) in reach and (k, j) in reach:
                    reach.add((i, j))
    return reach


def brute_permit(concepts, cic):
    reach = closure(concepts)
    return {(x, r, y) for (f, r, g) in cic for x in concepts for y in concepts
            if (x, f) in reach and (y, g) in reach}


def random_system(rng, n_concepts=None, n_roles=None, n_cic=None):
    n = n_concepts or rng.randint(1, 20)
    names = [f"c{i}" for i in range(n)]
    # parents only point to earlier names, so the graph is acyclic
    concepts = {c: rng.sample(names[:i], rng.randint(0, min(i, 3))) for i, c in enumerate(names)}
    roles = [f"r{i}" for i in range(n_roles or rng.randint(1, 10))]
    cic = {(rng.choice(names), rng.choice(roles), rng.choice(names)) for _ in range(n_cic or rng.randint(0, 30))}
    return concepts, roles, cic


def disagreements(concepts, roles, cic):
    cs = ConceptSystem.build(concepts, roles, cic)
    expected = brute_permit(concepts, cic)
    return [(x, r, y) for x, r, y in itertools.product(concepts, roles, concepts)
            if permit(cs, x, r, y) != ((x, r, y) in expected)]


def test_permit_matches_brute_force_on_random_systems():
    rng = random.Random(20)
    for _ in range(100):
        assert disagreements(*random_system(rng)) == []


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32))
def test_permit_monotone_in_cic(seed):
    rng = random.Random(seed)
    concepts, roles, cic = random_system(rng)
    extra = (rng.choice(list(concepts)), rng.choice(roles), rng.choice(list(concepts)))
    small = ConceptSystem.build(concepts, roles, cic)
    big = ConceptSystem.build(concepts, roles, cic | {extra})
    for x, r, y in itertools.product(concepts, roles, concepts):
        if permit(small, x, r, y):
            assert permit(big, x, r, y)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_subsumes_class_matches_reachability(seed):
    rng = random.Random(seed)
    names = ["WordActor"] + [f"k{i}" for i in range(rng.randint(0, 12))]
    parent = {"WordActor": None}
    for i, c in enumerate(names[1:], 1):
        parent[c] = rng.choice(names[:i])
    h = ClassHierarchy(parent)

    def reachable(a, b):
        todo, seen = [a], set()
        while todo:
            c = todo.pop()
            if c == b:
                return True
            seen.add(c)
            todo.extend(p for p in [parent[c]] if p is not None and p not in seen)
        return False

    for a, b in itertools.product(names, names):
        assert subsumes_class(h, a, b) == reachable(a, b)

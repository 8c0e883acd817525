"""The admissibility test for a (modifier, valency, head) triple.

Four clauses, evaluated in a fixed order so that failures are reported
deterministically: class, features, concept, order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .features import BOTTOM, FeatureStructure, expand, extract, unify
from .grammar import SELF, Valency
from .hierarchies import ClassHierarchy, ConceptSystem, roles_permitting, subsumes_class


class SpecificationError(Exception):
    """An order tuple names a dependency that has no occurs entry."""


@dataclass(frozen=True)
class CandidateView:
    """What a word exposes to the test, as modifier or as head."""

    word_class: str
    features: FeatureStructure
    concept: str
    position: int
    order: tuple[tuple[str, ...], ...] = ()
    occurs: Mapping[str, int] = field(default_factory=lambda: MappingProxyType({}))


@dataclass(frozen=True)
class SatisfiesResult:
    holds: bool
    head_features: FeatureStructure = BOTTOM
    roles: frozenset[str] = frozenset()
    failed_clause: str | None = None


def check_class(mod: CandidateView, val: Valency, h: ClassHierarchy) -> bool:
    return subsumes_class(h, mod.word_class, val.word_class)


def check_features(mod: CandidateView, val: Valency, head: CandidateView) -> FeatureStructure:
    """Head features after attachment, or BOTTOM if the modifier does not fit."""
    offered = expand(val.name, extract(mod.features, SELF))
    return unify(unify(offered, val.features), head.features)


def check_concept(
    mod: CandidateView, val: Valency, head: CandidateView, cs: ConceptSystem
) -> frozenset[str]:
    return roles_permitting(cs, head.concept, mod.concept, val.domain)


def check_order(mod: CandidateView, val: Valency, head: CandidateView) -> bool:
    """Some order tuple places ``val.name`` so that every name before it is
    occupied left of the modifier and every name after it is free or right."""
    p = mod.position
    for tup in head.order:
        for d in tup:
            if d not in head.occurs:
                raise SpecificationError(f"order tuple {tup} names {d!r} with no occurs entry")
        if val.name not in tup:
            continue
        k = tup.index(val.name)
        before_ok = all(head.occurs[d] < p for d in tup[:k])
        after_ok = all(head.occurs[d] == 0 or head.occurs[d] > p for d in tup[k + 1:])
        if before_ok and after_ok:
            return True
    return False


def satisfies(
    mod: CandidateView,
    val: Valency,
    head: CandidateView,
    h: ClassHierarchy,
    cs: ConceptSystem,
) -> SatisfiesResult:
    if not check_class(mod, val, h):
        return SatisfiesResult(False, failed_clause="class")
    result = check_features(mod, val, head)
    if result.is_bottom:
        return SatisfiesResult(False, failed_clause="features")
    roles = check_concept(mod, val, head, cs)
    if not roles:
        return SatisfiesResult(False, failed_clause="concept")
    if not check_order(mod, val, head):
        return SatisfiesResult(False, failed_clause="order")
    return SatisfiesResult(True, result, roles)

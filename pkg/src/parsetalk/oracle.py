"""Brute-force enumeration of admissible dependency trees, independent of the actor protocol.

Trees are generated span by span so that only projective, single-rooted
structures are produced, with arc labels restricted up front to valencies
whose class and concept constraints the modifier meets. Each candidate is
then checked by replaying the feature updates in scan order and by
re-evaluating the word-order constraint at every attachment.

The whole-tree form of the order constraint (one tuple lines up every filled
name) is kept as :func:`order_ok`. It implies the per-attachment form, and the
two agree whenever a head has a single order tuple; with several tuples the
per-attachment form may combine them, which is what the protocol does.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .features import FeatureStructure, expand, extract, render_fs, unify
from .grammar import SELF, GrammarBundle, LexemeEntry
from .protocol import ReadingRecord, UnknownForm

Arc = tuple[int, int, str]  # (head, dependent, name)


@dataclass(frozen=True)
class OracleTree:
    arcs: frozenset[Arc]
    entries: tuple[LexemeEntry, ...]  # entry chosen for position i + 1


def crossing(a: tuple[int, int], b: tuple[int, int]) -> bool:
    lo1, hi1 = sorted(a)
    lo2, hi2 = sorted(b)
    return lo1 < lo2 < hi1 < hi2 or lo2 < lo1 < hi2 < hi1


def is_projective(arcs: Iterable[Arc], n: int | None = None) -> bool:
    """No two arcs cross, and no arc spans a word that has no head.

    Pass the sentence length ``n`` to count words that appear in no arc at all.
    """
    arcs = list(arcs)
    pairs = [(h, d) for h, d, _ in arcs]
    for a, b in itertools.combinations(pairs, 2):
        if crossing(a, b):
            return False
    governed = {d for _, d in pairs}
    words = governed | {h for h, _ in pairs}
    if n is not None:
        words |= set(range(1, n + 1))
    for h, d in pairs:
        lo, hi = sorted((h, d))
        if any(lo < w < hi and w not in governed for w in words):
            return False
    return True


def _up(concepts: Mapping[str, frozenset[str]], c: str) -> set[str]:
    seen, todo = {c}, [c]
    while todo:
        for p in concepts.get(todo.pop(), ()):
            if p not in seen:
                seen.add(p)
                todo.append(p)
    return seen


def _class_ok(bundle: GrammarBundle, sub: str, sup: str) -> bool:
    c: str | None = sub
    seen = set()
    while c is not None and c not in seen:
        if c == sup:
            return True
        seen.add(c)
        c = bundle.classes.parent.get(c)
    return False


def _concept_ok(bundle: GrammarBundle, head: str, mod: str, domain: Iterable[str]) -> bool:
    cs = bundle.concepts
    up_h, up_m = _up(cs.concepts, head), _up(cs.concepts, mod)
    return any(r == role and f in up_h and g in up_m for role in domain for f, r, g in cs.cic)


def order_ok(order: Sequence[tuple[str, ...]], filled: Mapping[str, int]) -> bool:
    """Some order tuple contains every filled name, and their positions rise along it."""
    for tup in order:
        if not set(filled) <= set(tup):
            continue
        positions = [filled[d] for d in tup if d in filled]
        if all(a < b for a, b in zip(positions, positions[1:])):
            return True
    return False


def scan_order(arcs: Iterable[Arc], n: int) -> list[Arc]:
    """The order in which an incremental left-to-right scan makes the arcs:
    at word k, first its left dependents nearest first, then its own left head."""
    by_head: dict[int, list[Arc]] = {}
    head_of: dict[int, Arc] = {}
    for a in arcs:
        by_head.setdefault(a[0], []).append(a)
        head_of[a[1]] = a
    out = []
    for k in range(1, n + 1):
        out.extend(sorted((a for a in by_head.get(k, ()) if a[1] < k), key=lambda a: -a[1]))
        if k in head_of and head_of[k][0] < k:
            out.append(head_of[k])
    return out


def replay(bundle: GrammarBundle, tree: OracleTree) -> tuple[FeatureStructure, ...] | None:
    """Final features per position, or None if some attachment fails."""
    n = len(tree.entries)
    feats = [e.features for e in tree.entries]
    filled: list[set[str]] = [set() for _ in range(n)]
    for h, d, name in scan_order(tree.arcs, n):
        head, mod = tree.entries[h - 1], tree.entries[d - 1]
        val = head.valency(name)
        if val is None or name in filled[h - 1]:
            return None
        if not _class_ok(bundle, mod.word_class, val.word_class):
            return None
        if not _concept_ok(bundle, head.concept, mod.concept, val.domain):
            return None
        result = unify(unify(expand(name, extract(feats[d - 1], SELF)), val.features), feats[h - 1])
        if result.is_bottom:
            return None
        mod_feats = unify(feats[d - 1], expand(SELF, extract(result, name)))
        if mod_feats.is_bottom:
            return None
        feats[h - 1], feats[d - 1] = result, mod_feats
        filled[h - 1].add(name)
    return tuple(feats)


def order_at_attachment(order: Sequence[tuple[str, ...]], occurs: Mapping[str, int], name: str, pos: int) -> bool:
    """Whether ``name`` may be filled from ``pos`` given the head's current slots."""
    for tup in order:
        for k, d in enumerate(tup):
            if d != name:
                continue
            left = all(occurs.get(x, 0) < pos for x in tup[:k])
            right = all(occurs.get(x, 0) == 0 or occurs[x] > pos for x in tup[k + 1:])
            if left and right:
                return True
    return False


def orders_hold(tree: OracleTree) -> bool:
    n = len(tree.entries)
    occurs = [{SELF: i} for i in range(1, n + 1)]
    for h, d, name in scan_order(tree.arcs, n):
        if not order_at_attachment(tree.entries[h - 1].order, occurs[h - 1], name, d):
            return False
        occurs[h - 1][name] = d
    return True


def tree_valid(bundle: GrammarBundle, tree: OracleTree) -> bool:
    return replay(bundle, tree) is not None and orders_hold(tree)


def _candidate_trees(bundle: GrammarBundle, entries: tuple[LexemeEntry, ...]) -> list[frozenset[Arc]]:
    n = len(entries)
    labels: dict[tuple[int, int], tuple[str, ...]] = {}
    for h, d in itertools.permutations(range(1, n + 1), 2):
        head, mod = entries[h - 1], entries[d - 1]
        labels[h, d] = tuple(
            v.name for v in head.valencies
            if _class_ok(bundle, mod.word_class, v.word_class)
            and _concept_ok(bundle, head.concept, mod.concept, v.domain)
        )

    @lru_cache(maxsize=None)
    def trees(i: int, j: int) -> tuple[tuple[int, tuple[Arc, ...]], ...]:
        """Every projective tree covering words i..j, as (root, arcs)."""
        out = []
        for r in range(i, j + 1):
            for left in attached(i, r - 1, r):
                for right in attached(r + 1, j, r):
                    out.append((r, left + right))
        return tuple(out)

    @lru_cache(maxsize=None)
    def attached(i: int, j: int, head: int) -> tuple[tuple[Arc, ...], ...]:
        """Adjacent subtrees covering i..j, each root depending on ``head``."""
        if i > j:
            return ((),)
        out = []
        for k in range(i, j + 1):
            for r, arcs in trees(i, k):
                for name in labels[head, r]:
                    for rest in attached(k + 1, j, head):
                        out.append(((head, r, name),) + arcs + rest)
        return tuple(out)

    return [frozenset(arcs) for _, arcs in trees(1, n)]


def enumerate_trees(bundle: GrammarBundle, tokens: Sequence[str]) -> list[OracleTree]:
    choices = []
    for i, t in enumerate(tokens, 1):
        es = bundle.lookup(t)
        if not es:
            raise UnknownForm(f"unknown word form {t!r} at position {i}")
        choices.append(es)
    out = []
    for entries in itertools.product(*choices):
        for arcs in _candidate_trees(bundle, entries):
            tree = OracleTree(arcs, entries)
            if tree_valid(bundle, tree):
                out.append(tree)
    return out


def oracle_readings(bundle: GrammarBundle, tokens: Sequence[str]) -> list[ReadingRecord]:
    """Valid trees in the same record format the protocol harvests."""
    tokens = tuple(tokens)
    records = []
    for tree in enumerate_trees(bundle, tokens):
        feats = replay(bundle, tree)
        governed = {d for _, d, _ in tree.arcs}
        root = next(p for p in range(1, len(tokens) + 1) if p not in governed)
        records.append((tuple(sorted(tree.arcs)), tuple(render_fs(f) for f in feats), root))
    records.sort()
    return [ReadingRecord(i, True, tokens, arcs, root, feats) for i, (arcs, feats, root) in enumerate(records, 1)]


def oracle_set(bundle: GrammarBundle, tokens: Sequence[str]) -> frozenset:
    return frozenset(r.key() for r in oracle_readings(bundle, tokens))

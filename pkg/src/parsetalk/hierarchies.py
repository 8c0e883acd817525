"""Word-class taxonomy and the conceptual system (concepts, roles, integrity triples)."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping


class UnknownName(KeyError):
    """A class, concept or role name that was never declared."""

    def __str__(self) -> str:
        return self.args[0] if self.args else "unknown name"


@dataclass(frozen=True)
class ClassHierarchy:
    """Single-parent class tree; ``parent[root]`` is ``None``."""

    parent: Mapping[str, str | None]
    root: str = "WordActor"

    @property
    def classes(self) -> frozenset[str]:
        return frozenset(self.parent)

    def _require(self, name: str) -> None:
        if name not in self.parent:
            raise UnknownName(f"undeclared word class {name!r}")

    def ancestors(self, name: str) -> tuple[str, ...]:
        """``name`` followed by its chain of parents up to the root."""
        self._require(name)
        chain = [name]
        seen = {name}
        up = self.parent.get(name)
        while up is not None and up not in seen:
            chain.append(up)
            seen.add(up)
            up = self.parent.get(up)
        return tuple(chain)


def subsumes_class(h: ClassHierarchy, sub: str, sup: str) -> bool:
    """``sub isa_C* sup`` (reflexive, transitive)."""
    h._require(sup)
    return sup in h.ancestors(sub)


Triple = tuple[str, str, str]


@dataclass(frozen=True)
class ConceptSystem:
    concepts: Mapping[str, frozenset[str]]
    roles: frozenset[str]
    cic: frozenset[Triple] = field(default_factory=frozenset)

    @classmethod
    def build(
        cls,
        concepts: Mapping[str, Iterable[str]],
        roles: Iterable[str],
        cic: Iterable[Iterable[str]] = (),
    ) -> "ConceptSystem":
        return cls(
            {c: frozenset(ps) for c, ps in concepts.items()},
            frozenset(roles),
            frozenset(tuple(t) for t in cic),
        )

    def require_concept(self, name: str) -> None:
        if name not in self.concepts:
            raise UnknownName(f"undeclared concept {name!r}")

    def require_role(self, name: str) -> None:
        if name not in self.roles:
            raise UnknownName(f"undeclared role {name!r}")

    @cached_property
    def _upward(self) -> dict[str, frozenset[str]]:
        closure: dict[str, frozenset[str]] = {}

        def visit(c: str, stack: frozenset[str]) -> frozenset[str]:
            if c in closure:
                return closure[c]
            acc = {c}
            for p in self.concepts.get(c, ()):
                if p in stack:  # cycle; reported by validate_hierarchy
                    continue
                acc |= visit(p, stack | {c})
            closure[c] = frozenset(acc)
            return closure[c]

        for c in self.concepts:
            visit(c, frozenset())
        return closure

    @cached_property
    def _cic_by_role(self) -> dict[str, list[tuple[str, str]]]:
        index: dict[str, list[tuple[str, str]]] = defaultdict(list)
        for f, r, g in sorted(self.cic):
            index[r].append((f, g))
        return index

    def isa(self, sub: str, sup: str) -> bool:
        """``sub isa_F* sup``."""
        self.require_concept(sub)
        self.require_concept(sup)
        return sup in self._upward[sub]

    def ancestors(self, name: str) -> frozenset[str]:
        self.require_concept(name)
        return self._upward[name]


def permit(cs: ConceptSystem, x: str, r: str, y: str) -> bool:
    """Some integrity triple (f, r, g) has ``x isa_F* f`` and ``y isa_F* g``."""
    cs.require_concept(x)
    cs.require_concept(y)
    cs.require_role(r)
    up_x, up_y = cs._upward[x], cs._upward[y]
    return any(f in up_x and g in up_y for f, g in cs._cic_by_role.get(r, ()))


def roles_permitting(
    cs: ConceptSystem, head_concept: str, mod_concept: str, domain: Iterable[str]
) -> frozenset[str]:
    return frozenset(r for r in domain if permit(cs, head_concept, r, mod_concept))


def _parent_cycles(graph: Mapping[str, Iterable[str]]) -> list[list[str]]:
    """Each elementary cycle reported once, by its lexicographically least member."""
    cycles = []
    seen_keys = set()
    color: dict[str, int] = {}
    stack: list[str] = []

    def dfs(node: str) -> None:
        color[node] = 1
        stack.append(node)
        for p in sorted(graph.get(node, ())):
            if p not in graph:
                continue
            if color.get(p) == 1:
                cyc = stack[stack.index(p):]
                key = frozenset(cyc)
                if key not in seen_keys:
                    seen_keys.add(key)
                    cycles.append(cyc)
            elif color.get(p) is None:
                dfs(p)
        stack.pop()
        color[node] = 2

    for n in sorted(graph):
        if color.get(n) is None:
            dfs(n)
    return cycles


def validate_hierarchy(obj: ClassHierarchy | ConceptSystem) -> list[str]:
    """One diagnostic string per violated invariant; empty when clean."""
    diags: list[str] = []
    if isinstance(obj, ClassHierarchy):
        if obj.root not in obj.parent:
            diags.append(f"root class {obj.root!r} is not declared")
        elif obj.parent[obj.root] is not None:
            diags.append(f"root class {obj.root!r} must not have a parent")
        graph = {c: ([p] if p is not None else []) for c, p in obj.parent.items()}
        for c, p in sorted(obj.parent.items(), key=lambda kv: kv[0]):
            if p is not None and p not in obj.parent:
                diags.append(f"class {c!r} has undeclared parent {p!r}")
        for cyc in _parent_cycles(graph):
            diags.append("class cycle: " + " -> ".join(cyc + [cyc[0]]))
        if not diags:
            for c in sorted(obj.parent):
                if obj.ancestors(c)[-1] != obj.root:
                    diags.append(f"class {c!r} does not reach root {obj.root!r}")
        return diags

    for c, parents in sorted(obj.concepts.items()):
        for p in sorted(parents):
            if p not in obj.concepts:
                diags.append(f"concept {c!r} has undeclared parent {p!r}")
    for cyc in _parent_cycles(obj.concepts):
        diags.append("concept cycle: " + " -> ".join(cyc + [cyc[0]]))
    for f, r, g in sorted(obj.cic):
        for name, kind, known in ((f, "concept", obj.concepts), (r, "role", obj.roles), (g, "concept", obj.concepts)):
            if name not in known:
                diags.append(f"cic triple ({f}, {r}, {g}) references undeclared {kind} {name!r}")
    return diags

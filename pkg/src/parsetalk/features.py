"""Feature structures: atoms, atomic disjunction, complex terms, coreference.

Values are immutable graphs. Coreference is modelled as node sharing: two
labels whose values are the *same* node object carry the same tag when
rendered. Unification copies both arguments into a mutable union-find graph,
merges them, and freezes the result; cyclic results collapse to bottom.
"""
from __future__ import annotations

import re
from collections import Counter
from typing import Iterator, Mapping, Union

__all__ = [
    "BOTTOM",
    "EMPTY",
    "FSSyntaxError",
    "FeatureStructure",
    "equivalent",
    "expand",
    "extract",
    "parse_fs",
    "render_fs",
    "unify",
]


class _Atom:
    __slots__ = ("symbols",)

    def __init__(self, symbols: frozenset[str]):
        self.symbols = symbols


class _Complex:
    __slots__ = ("arcs",)

    def __init__(self, arcs: Mapping[str, "_Node"]):
        # sorted insertion keeps traversal order deterministic
        self.arcs = dict(sorted(arcs.items()))


_Node = Union[_Atom, _Complex]


class FeatureStructure:
    """An immutable feature structure, or bottom when ``is_bottom``.

    Equality is :func:`equivalent`; hashing uses the canonical rendering, so
    structures can be used as set members and dict keys.
    """

    __slots__ = ("_root", "_text")

    def __init__(self, root: _Node | None):
        self._root = root
        self._text: str | None = None

    @property
    def is_bottom(self) -> bool:
        return self._root is None

    @property
    def is_atomic(self) -> bool:
        return isinstance(self._root, _Atom)

    @property
    def symbols(self) -> frozenset[str]:
        if not isinstance(self._root, _Atom):
            raise TypeError("not an atomic value")
        return self._root.symbols

    def labels(self) -> tuple[str, ...]:
        if isinstance(self._root, _Complex):
            return tuple(self._root.arcs)
        return ()

    def __contains__(self, label: str) -> bool:
        return isinstance(self._root, _Complex) and label in self._root.arcs

    def __getitem__(self, label: str) -> "FeatureStructure":
        return extract(self, label)

    def get_path(self, *labels: str) -> "FeatureStructure":
        fs = self
        for label in labels:
            fs = extract(fs, label)
        return fs

    def shares(self, path_a: tuple[str, ...], path_b: tuple[str, ...]) -> bool:
        """True if both paths lead to the identical (coreferenced) node."""
        a, b = self._walk(path_a), self._walk(path_b)
        return a is not None and a is b

    def _walk(self, path: tuple[str, ...]) -> _Node | None:
        node = self._root
        for label in path:
            if not isinstance(node, _Complex) or label not in node.arcs:
                return None
            node = node.arcs[label]
        return node

    @classmethod
    def from_value(cls, value) -> "FeatureStructure":
        """Build from nested Python data: dict -> complex, str -> atom,
        set/frozenset -> disjunction. No coreference."""
        return cls(_from_value(value))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureStructure):
            return NotImplemented
        return render_fs(self) == render_fs(other)

    def __hash__(self) -> int:
        return hash(render_fs(self))

    def __repr__(self) -> str:
        return f"FeatureStructure({render_fs(self)!r})"

    def __str__(self) -> str:
        return render_fs(self)


def _from_value(value) -> _Node:
    if isinstance(value, str):
        return _Atom(frozenset([_check_symbol(value)]))
    if isinstance(value, (set, frozenset)):
        if not value:
            raise ValueError("empty disjunction")
        return _Atom(frozenset(_check_symbol(v) for v in value))
    if isinstance(value, Mapping):
        return _Complex({k: _from_value(v) for k, v in value.items()})
    raise TypeError(f"cannot build a feature value from {value!r}")


_IDENT = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_\-.]*\Z")


def _check_symbol(s: str) -> str:
    if not _IDENT.match(s):
        raise ValueError(f"invalid symbol {s!r}")
    return s


BOTTOM = FeatureStructure(None)
EMPTY = FeatureStructure(_Complex({}))


# ---------------------------------------------------------------- unification


class _Cell:
    __slots__ = ("symbols", "arcs", "fwd")

    def __init__(self, symbols: set[str] | None = None, arcs: dict | None = None):
        self.symbols = symbols
        self.arcs = arcs if arcs is not None else ({} if symbols is None else None)
        self.fwd: _Cell | None = None


def _deref(c: _Cell) -> _Cell:
    while c.fwd is not None:
        c = c.fwd
    return c


def _thaw(node: _Node, memo: dict[int, _Cell]) -> _Cell:
    key = id(node)
    if key in memo:
        return memo[key]
    if isinstance(node, _Atom):
        cell = _Cell(symbols=set(node.symbols))
        memo[key] = cell
        return cell
    cell = _Cell()
    memo[key] = cell
    for label, child in node.arcs.items():
        cell.arcs[label] = _thaw(child, memo)
    return cell


def _merge(a: _Cell, b: _Cell) -> bool:
    a, b = _deref(a), _deref(b)
    if a is b:
        return True
    if a.symbols is not None and b.symbols is not None:
        common = a.symbols & b.symbols
        if not common:
            return False
        a.symbols = common
        b.fwd = a
        return True
    if a.symbols is not None or b.symbols is not None:
        atom, cplx = (a, b) if a.symbols is not None else (b, a)
        # only the empty complex term (unconstrained) meets an atom
        if cplx.arcs:
            return False
        cplx.fwd = atom
        return True
    b.fwd = a
    for label, child in list(b.arcs.items()):
        mine = a.arcs.get(label)
        if mine is None:
            a.arcs[label] = child
        elif not _merge(mine, child):
            return False
    return True


class _Cycle(Exception):
    pass


def _freeze(cell: _Cell, memo: dict[int, _Node], active: set[int]) -> _Node:
    cell = _deref(cell)
    key = id(cell)
    if key in memo:
        return memo[key]
    if cell.symbols is not None:
        node: _Node = _Atom(frozenset(cell.symbols))
    else:
        if key in active:
            raise _Cycle
        active.add(key)
        node = _Complex({lab: _freeze(ch, memo, active) for lab, ch in cell.arcs.items()})
        active.discard(key)
    memo[key] = node
    return node


def _freeze_root(cell: _Cell) -> FeatureStructure:
    try:
        return FeatureStructure(_freeze(cell, {}, set()))
    except _Cycle:
        return BOTTOM


def unify(a: FeatureStructure, b: FeatureStructure) -> FeatureStructure:
    """Most general structure subsumed by both ``a`` and ``b``; BOTTOM on clash."""
    if a.is_bottom or b.is_bottom:
        return BOTTOM
    ca = _thaw(a._root, {})
    cb = _thaw(b._root, {})
    if not _merge(ca, cb):
        return BOTTOM
    return _freeze_root(ca)


def expand(label: str, u: FeatureStructure) -> FeatureStructure:
    """``[label: u]``."""
    if u.is_bottom:
        return BOTTOM
    return FeatureStructure(_Complex({label: u._root}))


def extract(u: FeatureStructure, label: str) -> FeatureStructure:
    """Value of ``label`` at the top level of ``u``; BOTTOM in all other cases."""
    if isinstance(u._root, _Complex):
        node = u._root.arcs.get(label)
        if node is not None:
            return FeatureStructure(node)
    return BOTTOM


def equivalent(a: FeatureStructure, b: FeatureStructure) -> bool:
    # canonical rendering is unique per isomorphism class of the node graph
    return render_fs(a) == render_fs(b)


# ---------------------------------------------------------------- rendering


def _count_refs(node: _Node, counts: Counter, seen: set[int]) -> None:
    if isinstance(node, _Atom) or id(node) in seen:
        return
    seen.add(id(node))
    for child in node.arcs.values():
        counts[id(child)] += 1
        _count_refs(child, counts, seen)


def render_fs(fs: FeatureStructure) -> str:
    """Deterministic text: labels sorted, tags numbered by first occurrence."""
    if fs._text is not None:
        return fs._text
    if fs._root is None:
        text = "⊥"
    else:
        counts: Counter = Counter()
        _count_refs(fs._root, counts, set())
        tags: dict[int, int] = {}

        def emit(node: _Node) -> str:
            key = id(node)
            if counts[key] > 1:
                if key in tags:
                    return f"<{tags[key]}>"
                tags[key] = len(tags) + 1
                return f"<{tags[key]}>={body(node)}"
            return body(node)

        def body(node: _Node) -> str:
            if isinstance(node, _Atom):
                if len(node.symbols) == 1:
                    return next(iter(node.symbols))
                return "{" + ", ".join(sorted(node.symbols)) + "}"
            return "[" + ", ".join(f"{lab}: {emit(ch)}" for lab, ch in node.arcs.items()) + "]"

        text = emit(fs._root)
    fs._text = text
    return text


# ---------------------------------------------------------------- parsing


class FSSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<punct>[\[\]{}<>=:,])|(?P<bottom>⊥)|(?P<ident>[A-Za-z0-9_][A-Za-z0-9_\-.]*)"
)


def _tokenize(text: str) -> Iterator[tuple[str, str, int]]:
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            yield "error", text[pos], pos
            return
        if m.lastgroup != "ws":
            kind = m.lastgroup
            value = m.group()
            yield (value if kind == "punct" else kind), value, pos
        pos = m.end()
    yield "eof", "", pos


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = list(_tokenize(text))
        self.i = 0
        self.tags: dict[int, _Cell] = {}

    def error(self, message: str, pos: int | None = None) -> FSSyntaxError:
        if pos is None:
            pos = self.tokens[self.i][2]
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return FSSyntaxError(message, line, col)

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self, kind: str) -> str:
        tkind, value, pos = self.tokens[self.i]
        if tkind != kind:
            shown = value or "end of input"
            raise self.error(f"expected {kind!r}, found {shown!r}", pos)
        self.i += 1
        return value

    def value(self) -> _Cell:
        kind = self.peek()
        if kind == "ident":
            return _Cell(symbols={self.take("ident")})
        if kind == "{":
            self.take("{")
            symbols = {self.take("ident")}
            while self.peek() == ",":
                self.take(",")
                symbols.add(self.take("ident"))
            self.take("}")
            return _Cell(symbols=symbols)
        if kind == "[":
            self.take("[")
            cell = _Cell()
            if self.peek() != "]":
                self.pair(cell)
                while self.peek() == ",":
                    self.take(",")
                    self.pair(cell)
            self.take("]")
            return cell
        if kind == "<":
            self.take("<")
            pos = self.tokens[self.i][2]
            raw = self.take("ident")
            if not raw.isdigit() or int(raw) < 1:
                raise self.error("coreference tag must be a positive integer", pos)
            self.take(">")
            tag = self.tags.setdefault(int(raw), _Cell())
            if self.peek() == "=":
                self.take("=")
                pos = self.tokens[self.i][2]
                if not _merge(tag, self.value()):
                    raise self.error(f"inconsistent values for tag <{raw}>", pos)
            return tag
        _, value, pos = self.tokens[self.i]
        raise self.error(f"unexpected {value or 'end of input'!r}", pos)

    def pair(self, cell: _Cell) -> None:
        pos = self.tokens[self.i][2]
        label = self.take("ident")
        if label in cell.arcs:
            raise self.error(f"duplicate label {label!r}", pos)
        self.take(":")
        cell.arcs[label] = self.value()


def parse_fs(text: str) -> FeatureStructure:
    """Parse the bracket notation, e.g. ``[self: [agr: <1>=[case: acc]], spec: [agr: <1>]]``."""
    parser = _Parser(text)
    if parser.peek() == "bottom":
        parser.take("bottom")
        parser.take("eof")
        return BOTTOM
    if parser.peek() == "error":
        raise parser.error(f"unexpected character {parser.tokens[parser.i][1]!r}")
    root = parser.value()
    if parser.peek() != "eof":
        raise parser.error("trailing input")
    try:
        return FeatureStructure(_freeze(root, {}, set()))
    except _Cycle:
        raise parser.error("cyclic coreference", 0) from None

"""Lexicon and grammar bundle: valencies, order tuples, class defaults, YAML ingestion."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Any, Iterable, Mapping

import yaml

from .features import FeatureStructure, FSSyntaxError, parse_fs
from .hierarchies import ClassHierarchy, ConceptSystem, validate_hierarchy

SELF = "self"


class GrammarError(Exception):
    """Loading or validation failed; ``diagnostics`` lists every problem found."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class Valency:
    name: str
    word_class: str
    features: FeatureStructure
    domain: frozenset[str]


@dataclass(frozen=True)
class LexemeEntry:
    form: str
    word_class: str
    features: FeatureStructure
    concept: str
    valencies: tuple[Valency, ...] = ()
    order: tuple[tuple[str, ...], ...] = ()

    def valency(self, name: str) -> Valency | None:
        for v in self.valencies:
            if v.name == name:
                return v
        return None

    @property
    def valency_names(self) -> frozenset[str]:
        return frozenset(v.name for v in self.valencies)


@dataclass(frozen=True)
class ClassDefaults:
    valencies: tuple[Valency, ...] = ()
    order: tuple[tuple[str, ...], ...] = ()


@dataclass(frozen=True)
class GrammarBundle:
    classes: ClassHierarchy
    concepts: ConceptSystem
    lexicon: Mapping[str, tuple[LexemeEntry, ...]]
    class_defaults: Mapping[str, ClassDefaults] = field(default_factory=dict)

    @property
    def dependency_names(self) -> frozenset[str]:
        names = {SELF}
        for entries in self.lexicon.values():
            for e in entries:
                names |= e.valency_names
        return frozenset(names)

    def lookup(self, form: str) -> tuple[LexemeEntry, ...]:
        """Entries whose form matches exactly; empty for unknown forms."""
        return self.lexicon.get(form, ())


def initial_occurs(entry: LexemeEntry, position: int) -> dict[str, int]:
    """Occurs map of a freshly instantiated word: ``self`` at its position, all else 0."""
    occurs = {SELF: position}
    for tup in entry.order:
        for name in tup:
            occurs.setdefault(name, 0)
    for v in entry.valencies:
        occurs.setdefault(v.name, 0)
    return occurs


def _merge_order(*groups: Iterable[tuple[str, ...]]) -> tuple[tuple[str, ...], ...]:
    out: list[tuple[str, ...]] = []
    for group in groups:
        for tup in group:
            if tup not in out:
                out.append(tup)
    return tuple(out)


def flatten_entry(bundle: GrammarBundle, entry: LexemeEntry) -> LexemeEntry:
    """Union of inherited class defaults (root first) with the entry's own
    declarations; a local valency replaces an inherited one of the same name."""
    merged: dict[str, Valency] = {}
    inherited_order: list[tuple[str, ...]] = []
    for cls in reversed(bundle.classes.ancestors(entry.word_class)):
        defaults = bundle.class_defaults.get(cls)
        if defaults is None:
            continue
        for v in defaults.valencies:
            merged[v.name] = v
        inherited_order.extend(defaults.order)
    for v in entry.valencies:
        merged[v.name] = v
    order = _merge_order(inherited_order, entry.order)
    names = set(merged)
    for tup in order:
        stray = [d for d in tup if d != SELF and d not in names]
        if stray:
            raise GrammarError(
                [f"{entry.form!r}: order tuple {list(tup)} names {stray} which are not valencies"]
            )
    return replace(entry, valencies=tuple(merged[n] for n in sorted(merged)), order=order)


# ---------------------------------------------------------------- ingestion


def _fs(text: Any, where: str, diags: list[str]) -> FeatureStructure | None:
    if not isinstance(text, str):
        diags.append(f"{where}: features must be a string in bracket notation")
        return None
    try:
        return parse_fs(text)
    except FSSyntaxError as exc:
        diags.append(f"{where}: {exc}")
        return None


def _valencies(raw: Any, where: str, diags: list[str]) -> tuple[Valency, ...]:
    out = []
    seen: set[str] = set()
    for i, item in enumerate(raw or ()):
        at = f"{where} valency #{i + 1}"
        try:
            name, cls = item["name"], item["class"]
        except (KeyError, TypeError):
            diags.append(f"{at}: needs 'name' and 'class'")
            continue
        if name == SELF:
            diags.append(f"{at}: 'self' is reserved and cannot name a valency")
            continue
        if name in seen:
            diags.append(f"{where}: duplicate valency name {name!r}")
            continue
        seen.add(name)
        fs = _fs(item.get("features", "[]"), at, diags)
        if fs is None:
            continue
        if fs.is_bottom:
            diags.append(f"{at}: features are inconsistent")
            continue
        out.append(Valency(name, cls, fs, frozenset(item.get("domain") or ())))
    return tuple(out)


def _order(raw: Any, where: str, diags: list[str]) -> tuple[tuple[str, ...], ...]:
    out = []
    for tup in raw or ():
        tup = tuple(tup)
        if tup.count(SELF) != 1:
            diags.append(f"{where}: order tuple {list(tup)} must contain 'self' exactly once")
            continue
        if len(set(tup)) != len(tup):
            diags.append(f"{where}: order tuple {list(tup)} repeats a name")
            continue
        out.append(tup)
    return tuple(out)


def _read_yaml(path: Path, diags: list[str]) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        diags.append(f"{path}: {exc}")
        return None


def build_bundle(classes_doc: Any, concepts_doc: Any, lexicon_doc: Any) -> GrammarBundle:
    """Validate parsed documents and return a flattened bundle."""
    diags: list[str] = []

    parent: dict[str, str | None] = {}
    defaults: dict[str, ClassDefaults] = {}
    for item in classes_doc or ():
        name = item.get("name") if isinstance(item, dict) else None
        if not name:
            diags.append(f"classes: entry without a name: {item!r}")
            continue
        if name in parent:
            diags.append(f"classes: duplicate class {name!r}")
        parent[name] = item.get("parent")
        vals = _valencies(item.get("valencies"), f"class {name}", diags)
        order = _order(item.get("order"), f"class {name}", diags)
        if vals or order:
            defaults[name] = ClassDefaults(vals, order)
    roots = [c for c, p in parent.items() if p is None]
    hierarchy = ClassHierarchy(parent, roots[0] if len(roots) == 1 else "WordActor")
    if len(roots) > 1:
        diags.append(f"classes: more than one root class: {sorted(roots)}")
    diags.extend(validate_hierarchy(hierarchy))

    concepts_doc = concepts_doc or {}
    concept_parents = {}
    for c in concepts_doc.get("concepts") or ():
        concept_parents[c["name"]] = c.get("parents") or []
    concept_system = ConceptSystem.build(
        concept_parents, concepts_doc.get("roles") or (), concepts_doc.get("cic") or ()
    )
    diags.extend(validate_hierarchy(concept_system))
    if diags:
        raise GrammarError(diags)

    bundle = GrammarBundle(hierarchy, concept_system, {}, MappingProxyType(defaults))
    for cls, d in defaults.items():
        for v in d.valencies:
            _check_valency(bundle, v, f"class {cls}", diags)

    lexicon: dict[str, list[LexemeEntry]] = {}
    for i, item in enumerate(lexicon_doc or ()):
        form = item.get("form") if isinstance(item, dict) else None
        where = f"lexicon entry {form or '#' + str(i + 1)}"
        if not form:
            diags.append(f"{where}: missing 'form'")
            continue
        missing = [k for k in ("class", "features", "concept") if k not in item]
        if missing:
            diags.append(f"{where}: missing {missing}")
            continue
        if item["class"] not in parent:
            diags.append(f"{where}: undeclared word class {item['class']!r}")
            continue
        if item["concept"] not in concept_system.concepts:
            diags.append(f"{where}: undeclared concept {item['concept']!r}")
        fs = _fs(item["features"], where, diags)
        if fs is not None and fs.is_bottom:
            diags.append(f"{where}: features are inconsistent")
        vals = _valencies(item.get("valencies"), where, diags)
        for v in vals:
            _check_valency(bundle, v, where, diags)
        order = _order(item.get("order"), where, diags)
        if fs is None or fs.is_bottom:
            continue
        entry = LexemeEntry(form, item["class"], fs, item["concept"], vals, order)
        try:
            entry = flatten_entry(bundle, entry)
        except GrammarError as exc:
            diags.extend(exc.diagnostics)
            continue
        lexicon.setdefault(form, []).append(entry)
    if diags:
        raise GrammarError(diags)
    frozen = MappingProxyType({f: tuple(es) for f, es in lexicon.items()})
    return replace(bundle, lexicon=frozen)


def _check_valency(bundle: GrammarBundle, v: Valency, where: str, diags: list[str]) -> None:
    if v.word_class not in bundle.classes.parent:
        diags.append(f"{where}: valency {v.name!r} has undeclared class {v.word_class!r}")
    for role in sorted(v.domain):
        if role not in bundle.concepts.roles:
            diags.append(f"{where}: valency {v.name!r} has undeclared role {role!r}")


def load_bundle(classes: str | Path, concepts: str | Path, lexicon: str | Path) -> GrammarBundle:
    diags: list[str] = []
    docs = [_read_yaml(Path(p), diags) for p in (classes, concepts, lexicon)]
    if diags:
        raise GrammarError(diags)
    return build_bundle(*docs)


def fixture_paths() -> tuple[Path, Path, Path]:
    """Paths of the bundled example grammar."""
    base = resources.files("parsetalk") / "data"
    return tuple(Path(str(base / name)) for name in ("classes.yaml", "concepts.yaml", "lexicon.yaml"))


def load_fixture_bundle() -> GrammarBundle:
    return load_bundle(*fixture_paths())


def fixture_sentences() -> list[tuple[str, ...]]:
    """Bundled test sentences as token tuples."""
    text = (resources.files("parsetalk") / "data" / "sentences.txt").read_text(encoding="utf-8")
    return [tuple(line.split()) for line in text.splitlines() if line.strip() and not line.startswith("#")]

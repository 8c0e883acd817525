"""Word actors negotiating dependency attachments, and the controller that scans the input.

Each word of each reading is an actor. When word ``n`` arrives the controller
runs, per reading, a sequence of episodes:

* a right-attachment probe for every root left of ``n`` (nearest first): the
  root asks ``w_n`` whether it would govern it;
* one head search: ``w_n`` departs a ``searchHead`` complex message to the
  word just left of its subtree, which forwards it up its chain of heads.

A candidate head answers with one ``headFound`` per satisfying valency. The
first one a modifier receives is accepted; any later one makes the modifier
copy the reading (``copyStructure`` down, ``duplicateStructure`` up) so that
the alternative attachment lives in a fresh reading. Every episode is a
reception task at its initiator; the controller moves to the next word only
after every reading has reported its episodes done.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Any, Mapping, Sequence

from .features import FeatureStructure, expand, extract, render_fs, unify
from .grammar import SELF, GrammarBundle, LexemeEntry, Valency, initial_occurs
from .runtime import (
    DEFAULT_STEP_BOUND,
    ActorRef,
    Behavior,
    ComplexMessageSpec,
    ContractViolation,
    Context,
    Envelope,
    RunResult,
    Runtime,
)
from .satisfies import CandidateView, satisfies

WORD = "word"
CONTROLLER = "controller"
DEFAULT_MAX_READINGS = 64


class UnknownForm(KeyError):
    def __str__(self) -> str:
        return self.args[0]


class ProtocolFault(RuntimeError):
    def __init__(self, message: str, result: "ParseResult"):
        super().__init__(message)
        self.result = result


class LivenessFailure(ProtocolFault):
    pass


@dataclass(frozen=True)
class ProtocolConfig:
    """Switches for mutation testing; the defaults are the correct protocol."""

    fringe_forwarding: bool = True
    crossing_guard: bool = True


@dataclass(frozen=True)
class Offer:
    id: str
    name: str
    modifier: ActorRef
    modifier_position: int
    result: FeatureStructure
    task: int | None  # head-side reception task; None for offers re-issued in a copy


@dataclass(frozen=True)
class WordState:
    form: str
    position: int
    reading: int
    word_class: str
    concept: str
    feats: FeatureStructure
    valencies: tuple[Valency, ...]
    order: tuple[tuple[str, ...], ...]
    occurs: Mapping[str, int]
    left_edge: int
    head: ActorRef | None = None
    head_name: str | None = None
    deps: tuple[tuple[str, ActorRef], ...] = ()
    pending: Mapping[str, Offer] = MappingProxyType({})
    step: tuple[int, int, ActorRef] | None = None  # (episode, task, reply-to) while initiating
    checkpoint: tuple[int, "WordState"] | None = None

    def view(self) -> CandidateView:
        return CandidateView(self.word_class, self.feats, self.concept, self.position, self.order, self.occurs)


def initial_state(entry: LexemeEntry, position: int, reading: int) -> WordState:
    return WordState(
        form=entry.form,
        position=position,
        reading=reading,
        word_class=entry.word_class,
        concept=entry.concept,
        feats=entry.features,
        valencies=entry.valencies,
        order=entry.order,
        occurs=MappingProxyType(initial_occurs(entry, position)),
        left_edge=position,
    )


def describe_word(s: WordState) -> str:
    deps = ",".join(f"{n}:{r}" for n, r in s.deps) or "-"
    return f"{s.form}@{s.position} r={s.reading} head={s.head or '-'} deps={deps} feats={render_fs(s.feats)}"


def snapshot(s: WordState, episode: int) -> WordState:
    """State as it was before ``episode`` first changed it."""
    if s.checkpoint is not None and s.checkpoint[0] == episode:
        return s.checkpoint[1]
    return s


def _update(ctx: Context, episode: int | None, **changes: Any) -> None:
    s: WordState = ctx.state
    cp = s.checkpoint
    if episode is not None and (cp is None or cp[0] != episode):
        cp = (episode, replace(s, checkpoint=None))
    ctx.become(replace(s, checkpoint=cp, **changes))


def _clone(snap: WordState, reading: int, *, head=None, head_name=None, deps=(), pending=None) -> WordState:
    return replace(
        snap,
        reading=reading,
        head=head,
        head_name=head_name,
        deps=tuple(sorted(deps)),
        pending=MappingProxyType(dict(pending or {})),
        step=None,
        checkpoint=None,
    )


def _governed(state: WordState, env: Envelope) -> bool:
    return state.head is not None


SEARCH_HEAD = ComplexMessageSpec(distribute=((_governed, "head"),))
SEARCH_HEAD_UNFORWARDED = ComplexMessageSpec()


# ------------------------------------------------------------------ word actor


class WordBehavior:
    """Handlers of a word actor; one instance is shared by every word of a run."""

    def __init__(self, bundle: GrammarBundle, config: ProtocolConfig):
        self.bundle = bundle
        self.config = config

    def behavior(self) -> Behavior:
        return Behavior(
            WORD,
            {
                "attachRight": self.on_attach_right,
                "startUp": self.on_start_up,
                "rightAttach": self.on_right_attach_probe,
                "searchHead": self.on_search_head,
                "headFound": self.on_head_found,
                "headAccepted": self.on_head_accepted,
                "headRejected": self.on_head_rejected,
                "copyStructure": self.on_copy_structure,
                "duplicateStructure": self.on_duplicate_structure,
            },
            describe_word,
        )

    # -- episode initiation --------------------------------------------------

    def _open_step(self, ctx: Context, episode: int, first: ActorRef) -> int:
        reply_to = ctx.message.sender

        def done(c: Context, task) -> None:
            s: WordState = c.state
            c.send(reply_to, "stepDone", {
                "reading": s.reading,
                "episode": episode,
                "attached": s.head is not None,
                "new_readings": tuple(task.collected),
            }, reading=s.reading)
            _update(c, episode, step=None)

        task = ctx.queue_task([first], done)
        _update(ctx, episode, step=(episode, task, reply_to))
        return task

    def on_attach_right(self, ctx: Context, env: Envelope) -> None:
        """Controller asks this root to offer itself to the new word on its right."""
        p = env.payload
        s: WordState = ctx.state
        task = self._open_step(ctx, p["episode"], p["target"])
        ctx.send(p["target"], "rightAttach", {
            "view": s.view(), "span": p["span"], "episode": p["episode"], "task": task,
        }, initiator=ctx.self_ref, reading=s.reading)

    def on_start_up(self, ctx: Context, env: Envelope) -> None:
        """Controller asks the new word to look for its head on the left."""
        p = env.payload
        s: WordState = ctx.state
        task = self._open_step(ctx, p["episode"], p["left"])
        spec = SEARCH_HEAD if self.config.fringe_forwarding else SEARCH_HEAD_UNFORWARDED
        ctx.depart(spec, p["left"], "searchHead", {
            "view": s.view(), "episode": p["episode"], "task": task,
        }, initiator=ctx.self_ref, reading=s.reading)

    # -- candidate head side -------------------------------------------------

    def _offer(self, ctx: Context, env: Envelope, forwarded: tuple[ActorRef, ...]) -> None:
        s: WordState = ctx.state
        p = env.payload
        init = env.initiator
        mod: CandidateView = p["view"]
        episode, step_task = p["episode"], p["task"]
        offers = []
        for val in s.valencies:
            if s.occurs.get(val.name, 0):
                continue  # slot already filled
            r = satisfies(mod, val, s.view(), self.bundle.classes, self.bundle.concepts)
            if r.holds:
                oid = f"{ctx.self_ref.id}.{episode}.{val.name}"
                offers.append(Offer(oid, val.name, init, mod.position, r.head_features, None))
        receipt = {"task": step_task, "forwarded": forwarded}
        if not offers:
            ctx.send(init, "receipt", receipt, reading=s.reading)
            return

        def all_answered(c: Context, task) -> None:
            c.send(init, "receipt", receipt, reading=s.reading)

        task = ctx.queue_task([init] * len(offers), all_answered)
        pending = dict(s.pending)
        for o in offers:
            pending[o.id] = replace(o, task=task)
            ctx.send(init, "headFound", {
                "head": ctx.self_ref,
                "name": o.name,
                "head_feats": extract(o.result, o.name),
                "offer_id": o.id,
                "episode": episode,
            }, initiator=init, reading=s.reading)
        _update(ctx, episode, pending=MappingProxyType(pending))

    def on_right_attach_probe(self, ctx: Context, env: Envelope) -> None:
        s: WordState = ctx.state
        span = env.payload["span"]
        if self.config.crossing_guard and span[1] + 1 != s.left_edge:
            # a root not adjacent to this word's subtree would cross the roots between
            ctx.send(env.initiator, "receipt", {"task": env.payload["task"], "forwarded": ()}, reading=s.reading)
            return
        self._offer(ctx, env, ())

    def on_search_head(self, ctx: Context, env: Envelope) -> None:
        self._offer(ctx, env, ctx.forwarded)

    def _apply_offer(self, ctx: Context, offer: Offer, span_left: int, episode: int | None) -> None:
        s: WordState = ctx.state
        occurs = dict(s.occurs)
        occurs[offer.name] = offer.modifier_position
        pending = {k: v for k, v in s.pending.items() if k != offer.id}
        _update(
            ctx, episode,
            feats=offer.result,
            deps=tuple(sorted(s.deps + ((offer.name, offer.modifier),))),
            occurs=MappingProxyType(occurs),
            left_edge=min(s.left_edge, span_left),
            pending=MappingProxyType(pending),
        )

    def _drop_offer(self, ctx: Context, offer_id: str, episode: int | None) -> Offer:
        s: WordState = ctx.state
        offer = s.pending.get(offer_id)
        if offer is None:
            raise ContractViolation(f"{s.form}@{s.position} has no pending offer {offer_id}")
        _update(ctx, episode, pending=MappingProxyType({k: v for k, v in s.pending.items() if k != offer_id}))
        return offer

    def on_head_accepted(self, ctx: Context, env: Envelope) -> None:
        p = env.payload
        s: WordState = ctx.state
        if p.get("link"):
            # a copied modifier reattaching to this copy
            deps = tuple(sorted(s.deps + ((p["name"], p["modifier"]),)))
            ctx.become(replace(s, deps=deps))
            _wave_receipt(ctx, p["wave"], ())
            return
        offer = s.pending.get(p["offer_id"])
        if offer is None or offer.modifier != env.sender:
            raise ContractViolation(f"{s.form}@{s.position}: headAccepted for unknown offer {p['offer_id']}")
        self._apply_offer(ctx, offer, p["span_left"], p.get("episode"))
        if "wave" in p:
            _wave_receipt(ctx, p["wave"], ())
        else:
            ctx.record_receipt(offer.task, env.sender)

    def on_head_rejected(self, ctx: Context, env: Envelope) -> None:
        p = env.payload
        offer = self._drop_offer(ctx, p["offer_id"], p.get("episode"))
        if "wave" in p:
            _wave_receipt(ctx, p["wave"], ())
        else:
            ctx.record_receipt(offer.task, env.sender)

    # -- modifier side -------------------------------------------------------

    def on_head_found(self, ctx: Context, env: Envelope) -> None:
        p = env.payload
        s: WordState = ctx.state
        if p.get("link"):
            # the copy of this copy's head announcing itself
            ctx.become(replace(s, head=p["head"], head_name=p["name"]))
            _wave_receipt(ctx, p["wave"], ())
            return
        if s.head is None:
            self._accept(ctx, p)
            return
        self._duplicate(ctx, env)

    def _accept(self, ctx: Context, p: Mapping[str, Any]) -> None:
        s: WordState = ctx.state
        head = p["head"]
        feats = unify(s.feats, expand(SELF, p["head_feats"]))
        reply: dict[str, Any] = {"offer_id": p["offer_id"]}
        if "wave" in p:
            reply["wave"] = p["wave"]
        else:
            reply["episode"] = p["episode"]
        if feats.is_bottom:
            ctx.send(head, "headRejected", reply, reading=s.reading)
        else:
            _update(ctx, p.get("episode"), head=head, head_name=p["name"], feats=feats)
            reply["span_left"] = s.left_edge
            ctx.send(head, "headAccepted", reply, reading=s.reading)
        if "wave" in p:
            _wave_receipt(ctx, p["wave"], (head,))

    def _duplicate(self, ctx: Context, env: Envelope) -> None:
        """A second head is on offer: copy the reading and take that head in the copy."""
        p = env.payload
        s: WordState = ctx.state
        head, episode = p["head"], p["episode"]
        if s.step is None or s.step[0] != episode:
            raise ContractViolation(f"{s.form}@{s.position}: headFound outside its own episode")
        rid = ctx.allocate_reading()
        if rid is None:
            ctx.warn(f"reading cap reached; {s.form}@{s.position} declines {p['name']} offer from {head}")
            ctx.send(head, "headRejected", {"offer_id": p["offer_id"], "episode": episode}, reading=s.reading)
            return
        snap = snapshot(s, episode)
        copy = ctx.spawn(WORD, _clone(snap, rid, deps=()))
        step_task = s.step[1]
        me = ctx.self_ref

        def copied(c: Context, task) -> None:
            c.record_receipt(step_task, me, (), tuple(task.collected) + ((rid, snap.position, copy),))

        targets = [ref for _, ref in snap.deps] + [head]
        dup = ctx.queue_task(targets, copied)
        ctx.expect(step_task, me)
        wave = (me, dup)
        for name, ref in snap.deps:
            ctx.send(ref, "copyStructure", {
                "wave": wave, "new_reading": rid, "episode": episode, "parent": copy, "name": name,
            }, reading=s.reading)
        ctx.send(head, "duplicateStructure", {
            "wave": wave, "new_reading": rid, "episode": episode,
            "child": None, "child_clone": None, "child_name": None,
            "offer_id": p["offer_id"], "offer_to": copy,
        }, reading=s.reading)

    # -- copying -------------------------------------------------------------

    def on_copy_structure(self, ctx: Context, env: Envelope) -> None:
        """Copy this word and its subtree into another reading under ``parent``."""
        p = env.payload
        s: WordState = ctx.state
        snap = snapshot(s, p["episode"])
        rid, parent = p["new_reading"], p["parent"]
        copy = ctx.spawn(WORD, _clone(snap, rid, head=parent, head_name=p["name"]))
        forwarded = []
        for name, ref in snap.deps:
            ctx.send(ref, "copyStructure", {**p, "parent": copy, "name": name}, reading=s.reading)
            forwarded.append(ref)
        if parent is not None:
            ctx.send(parent, "headAccepted", {
                "link": True, "wave": p["wave"], "name": p["name"], "modifier": copy,
            }, reading=s.reading)
            forwarded.append(parent)
        _wave_receipt(ctx, p["wave"], tuple(forwarded), (rid, snap.position, copy))

    def on_duplicate_structure(self, ctx: Context, env: Envelope) -> None:
        """Copy this word, its other modifiers and its heads into another reading."""
        p = env.payload
        s: WordState = ctx.state
        episode, rid = p["episode"], p["new_reading"]
        snap = snapshot(s, episode)
        child, child_clone = p["child"], p["child_clone"]
        deps = [(p["child_name"], child_clone)] if child_clone is not None else []
        pending = {}
        offer = None
        if p["offer_id"] is not None:
            offer = s.pending[p["offer_id"]]
            pending[offer.id] = replace(offer, modifier=p["offer_to"], task=None)
        copy = ctx.spawn(WORD, _clone(snap, rid, head_name=snap.head_name, deps=deps, pending=pending))
        forwarded = []
        for name, ref in snap.deps:
            if ref == child:
                continue
            ctx.send(ref, "copyStructure", {
                "wave": p["wave"], "new_reading": rid, "episode": episode, "parent": copy, "name": name,
            }, reading=s.reading)
            forwarded.append(ref)
        if snap.head is not None:
            ctx.send(snap.head, "duplicateStructure", {
                "wave": p["wave"], "new_reading": rid, "episode": episode,
                "child": ctx.self_ref, "child_clone": copy, "child_name": snap.head_name,
                "offer_id": None, "offer_to": None,
            }, reading=s.reading)
            forwarded.append(snap.head)
        if child_clone is not None:
            ctx.send(child_clone, "headFound", {
                "link": True, "wave": p["wave"], "head": copy, "name": p["child_name"],
            }, reading=s.reading)
            forwarded.append(child_clone)
        if offer is not None:
            ctx.send(p["offer_to"], "headFound", {
                "wave": p["wave"], "head": copy, "name": offer.name,
                "head_feats": extract(offer.result, offer.name), "offer_id": offer.id,
            }, reading=s.reading)
            forwarded.append(p["offer_to"])
            # this request doubles as the modifier's answer to the original offer
            self._drop_offer(ctx, offer.id, episode)
            ctx.record_receipt(offer.task, env.sender)
        _wave_receipt(ctx, p["wave"], tuple(forwarded), (rid, snap.position, copy))


def _wave_receipt(ctx: Context, wave: tuple[ActorRef, int], forwarded: tuple, data: Any = None) -> None:
    init, task = wave
    payload = {"task": task, "forwarded": forwarded, "wave": True}
    if data is not None:
        payload["data"] = data
    ctx.send(init, "receipt", payload, reading=getattr(ctx.state, "reading", None))


# ------------------------------------------------------------------ controller


@dataclass
class Track:
    """Controller-side bookkeeping for one reading."""

    rid: int
    actors: dict[int, ActorRef] = field(default_factory=dict)
    roots: list[int] = field(default_factory=list)
    spans: dict[int, tuple[int, int]] = field(default_factory=dict)
    probes: list[int] = field(default_factory=list)
    searched: bool = False
    phase: str = "idle"
    episode: int | None = None
    probe_root: int | None = None

    def copy(self, rid: int) -> "Track":
        return Track(rid, {}, list(self.roots), dict(self.spans), list(self.probes),
                     self.searched, self.phase, self.episode, self.probe_root)


@dataclass
class ControllerState:
    tokens: tuple[str, ...]
    entries: tuple[tuple[LexemeEntry, ...], ...]
    tracks: dict[int, Track] = field(default_factory=dict)
    n: int = 0
    next_episode: int = 1
    finished: bool = False


def _apply_episode(tr: Track, n: int, attached: bool) -> None:
    if not attached:
        return
    if tr.phase == "probe":
        r = tr.probe_root
        tr.roots.remove(r)
        left = tr.spans.pop(r)[0]
        tr.spans[n] = (left, tr.spans[n][1])
    else:
        left, right = tr.spans.pop(n)
        tr.roots.remove(n)
        for r, (l, rr) in tr.spans.items():
            if rr == left - 1:
                tr.spans[r] = (l, right)
                break
        else:
            raise ContractViolation(f"no root span ends at {left - 1}")


class ControllerBehavior:
    """The scan driver. Its state is a mutable record only its own handlers touch."""

    def behavior(self) -> Behavior:
        return Behavior(CONTROLLER, {"scan": self.on_scan, "stepDone": self.on_step_done},
                        lambda st: f"word={st.n} readings={len(st.tracks)}")

    def on_scan(self, ctx: Context, env: Envelope) -> None:
        st: ControllerState = ctx.state
        rid = ctx.allocate_reading()
        st.tracks[rid] = Track(rid)
        self._start_word(ctx, 1)

    def _episode(self, st: ControllerState) -> int:
        e = st.next_episode
        st.next_episode += 1
        return e

    def _start_word(self, ctx: Context, n: int) -> None:
        st: ControllerState = ctx.state
        st.n = n
        if n > len(st.tokens):
            st.finished = True
            ctx.become(st)
            return
        entries = st.entries[n - 1]
        plan = [(rid, entries[0]) for rid in sorted(st.tracks)]
        clones = []
        for rid in sorted(st.tracks):
            for entry in entries[1:]:
                new = ctx.allocate_reading()
                if new is None:
                    ctx.warn(f"reading cap reached; dropping entry {entry.form}/{entry.word_class} at {n}")
                    continue
                clones.append((rid, new, entry))
        if not clones:
            self._spawn_word(ctx, n, plan)
            return
        targets = []
        for src, new, entry in clones:
            st.tracks[new] = st.tracks[src].copy(new)
            plan.append((new, entry))
            for r in st.tracks[src].roots:
                targets.append((st.tracks[src].actors[r], new))
        if not targets:
            self._spawn_word(ctx, n, plan)
            return
        self._copy_roots(ctx, targets, lambda c: self._spawn_word(c, n, plan))

    def _copy_roots(self, ctx: Context, targets: list[tuple[ActorRef, int]], then) -> None:
        """Copy whole root trees into other readings, then continue with ``then``."""
        st: ControllerState = ctx.state

        def copied(c: Context, task) -> None:
            for rid, pos, ref in task.collected:
                st.tracks[rid].actors[pos] = ref
            then(c)

        task = ctx.queue_task([ref for ref, _ in targets], copied)
        for ref, rid in targets:
            ctx.send(ref, "copyStructure", {
                "wave": (ctx.self_ref, task), "new_reading": rid, "episode": 0, "parent": None, "name": None,
            })

    def _spawn_word(self, ctx: Context, n: int, plan: list[tuple[int, LexemeEntry]]) -> None:
        st: ControllerState = ctx.state
        for rid, entry in plan:
            tr = st.tracks[rid]
            if sorted(tr.actors) != list(range(1, n)):
                raise ContractViolation(f"reading {rid} is missing words before {n}")
            tr.actors[n] = ctx.spawn(WORD, initial_state(entry, n, rid))
            tr.roots.append(n)
            tr.spans[n] = (n, n)
            tr.probes = list(reversed(tr.roots[:-1]))
            tr.searched = False
        for rid, _ in plan:
            self._advance(ctx, st.tracks[rid])

    def _advance(self, ctx: Context, tr: Track) -> None:
        st: ControllerState = ctx.state
        n = st.n
        w = tr.actors[n]
        if tr.probes:
            r = tr.probes.pop(0)
            tr.phase, tr.probe_root, tr.episode = "probe", r, self._episode(st)
            ctx.send(tr.actors[r], "attachRight", {"episode": tr.episode, "target": w, "span": tr.spans[r]},
                     reading=tr.rid)
            return
        if not tr.searched:
            tr.searched = True
            left = tr.spans[n][0] - 1
            if left >= 1:
                tr.phase, tr.probe_root, tr.episode = "search", None, self._episode(st)
                ctx.send(w, "startUp", {"episode": tr.episode, "left": tr.actors[left]}, reading=tr.rid)
                return
        tr.phase = "done"
        if all(t.phase == "done" for t in st.tracks.values()):
            self._start_word(ctx, n + 1)

    def on_step_done(self, ctx: Context, env: Envelope) -> None:
        st: ControllerState = ctx.state
        p = env.payload
        tr = st.tracks[p["reading"]]
        if tr.episode != p["episode"]:
            raise ContractViolation(f"stepDone for episode {p['episode']} but reading {tr.rid} is in {tr.episode}")
        n = st.n
        pre_roots = list(tr.roots)
        groups: dict[int, dict[int, ActorRef]] = defaultdict(dict)
        for copied in p["new_readings"]:  # one batch per duplication
            for rid, pos, ref in copied:
                groups[rid][pos] = ref
        fresh = []
        for rid in sorted(groups):
            nt = tr.copy(rid)
            _apply_episode(nt, n, True)
            nt.actors = dict(groups[rid])
            st.tracks[rid] = nt
            fresh.append(nt)
        _apply_episode(tr, n, p["attached"])
        if not fresh:
            self._advance(ctx, tr)
            return
        for t in [tr] + fresh:
            t.phase = "cloning"
        targets = [(tr.actors[r], nt.rid) for nt in fresh for r in pre_roots if r not in nt.actors]

        def resume(c: Context) -> None:
            for t in [tr] + fresh:
                if sorted(t.actors) != list(range(1, n + 1)):
                    raise ContractViolation(f"reading {t.rid} is incomplete after copying")
                t.phase = "resumed"
            for t in [tr] + fresh:
                self._advance(c, t)

        if targets:
            self._copy_roots(ctx, targets, resume)
        else:
            resume(ctx)


# ------------------------------------------------------------------ driver


@dataclass(frozen=True)
class ReadingRecord:
    reading_id: int
    complete: bool
    tokens: tuple[str, ...]
    arcs: tuple[tuple[int, int, str], ...]  # (head, dependent, name)
    root: int | None
    features: tuple[str, ...]  # rendered final features per position

    def key(self) -> tuple:
        return (self.arcs, self.features)

    def as_json(self) -> dict:
        return {
            "readingId": self.reading_id,
            "complete": self.complete,
            "tokens": list(self.tokens),
            "arcs": [{"head": h, "dep": d, "name": n} for h, d, n in self.arcs],
            "rootPos": self.root,
        }


@dataclass
class ParseResult:
    tokens: tuple[str, ...]
    readings: list[ReadingRecord]
    run: RunResult
    runtime: Runtime
    tracks: dict[int, Track]

    @property
    def complete(self) -> list[ReadingRecord]:
        return [r for r in self.readings if r.complete]

    def reading_set(self) -> frozenset:
        return frozenset(r.key() for r in self.complete)

    def word_state(self, reading: int, position: int) -> WordState:
        return self.runtime.state_of(self.tracks[reading].actors[position])

    def actor_readings(self) -> dict[int, int]:
        """Actor id to reading id for every word actor of the run."""
        return {a.ref.id: a.state.reading for a in self.runtime.actors.values() if a.ref.kind == WORD}


def harvest(runtime: Runtime, tokens: Sequence[str], tracks: Mapping[int, Track]) -> list[ReadingRecord]:
    out = []
    n = len(tokens)
    for rid in sorted(tracks):
        tr = tracks[rid]
        if sorted(tr.actors) != list(range(1, n + 1)):
            continue
        states = {pos: runtime.state_of(ref) for pos, ref in tr.actors.items()}
        pos_of = {ref.id: pos for pos, ref in tr.actors.items()}
        arcs = []
        for pos, s in states.items():
            for name, ref in s.deps:
                if ref.id not in pos_of:
                    raise ContractViolation(f"reading {rid}: dependency {ref} lies outside the reading")
                arcs.append((pos, pos_of[ref.id], name))
        roots = [pos for pos, s in states.items() if s.head is None]
        out.append(ReadingRecord(
            rid,
            len(roots) == 1,
            tuple(tokens),
            tuple(sorted(arcs)),
            roots[0] if len(roots) == 1 else None,
            tuple(render_fs(states[pos].feats) for pos in range(1, n + 1)),
        ))
    return out


def parse(
    bundle: GrammarBundle,
    tokens: Sequence[str],
    *,
    seed: int = 0,
    mode: str = "deterministic",
    max_readings: int = DEFAULT_MAX_READINGS,
    step_bound: int = DEFAULT_STEP_BOUND,
    config: ProtocolConfig = ProtocolConfig(),
    workers: int = 4,
) -> ParseResult:
    """Run the actor protocol over ``tokens`` and harvest the readings.

    Raises :class:`UnknownForm` before running if a token has no lexicon
    entry, and :class:`ProtocolFault` (or :class:`LivenessFailure`) if the
    run faults; the partial result is attached to the exception.
    """
    tokens = tuple(tokens)
    if not tokens:
        raise ValueError("empty input")
    if max_readings < 1:
        raise ValueError("max_readings must be at least 1")
    entries = []
    for i, t in enumerate(tokens, 1):
        es = bundle.lookup(t)
        if not es:
            raise UnknownForm(f"unknown word form {t!r} at position {i}")
        entries.append(es)
    rt = Runtime(mode=mode, seed=seed, step_bound=step_bound, max_readings=max_readings, workers=workers)
    rt.register(WordBehavior(bundle, config).behavior())
    rt.register(ControllerBehavior().behavior())
    state = ControllerState(tokens, tuple(entries))
    ctrl = rt.spawn(CONTROLLER, state)
    rt.send(ctrl, "scan")
    run = rt.run()
    result = ParseResult(tokens, [], run, rt, state.tracks)
    if run.faults:
        message = "; ".join(run.faults)
        if any(f.startswith("liveness") for f in run.faults):
            raise LivenessFailure(message, result)
        raise ProtocolFault(message, result)
    if not state.finished:
        raise ProtocolFault("scan stopped before the last word", result)
    result.readings = harvest(rt, tokens, state.tracks)
    return result

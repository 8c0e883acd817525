"""A small actor runtime.

Actors process one message at a time. A handler sees the actor's state and
the delivered envelope, and buffers its effects (spawn, send, become,
receipts) in a :class:`Context`; the effects are committed atomically when
the handler returns, so no other handler ever sees a half-applied update.

Complex messages carry a :class:`ComplexMessageSpec`. On delivery the runtime
forwards a copy to every acquaintance named by a satisfied distribute clause,
runs the handler if a compute clause holds, then applies post-compute
distribute clauses.

Reception tasks implement termination detection for forwarded messages: a
task keeps a signed multiset of actors that still owe a receipt. A receipt
from ``a`` listing ``F`` removes one ``a`` and adds every member of ``F``;
the task fires once, when every count is back to zero. Counts may go
negative transiently when a receipt overtakes the one that announced it.
"""
from __future__ import annotations

import dataclasses
import random
import threading
import traceback
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Callable, Iterable, Mapping

from .features import FeatureStructure, render_fs

DEFAULT_STEP_BOUND = 10**6


class ContractViolation(Exception):
    pass


@dataclass(frozen=True, order=True)
class ActorRef:
    id: int
    kind: str = field(compare=False)

    def __str__(self) -> str:
        return f"#{self.id}"


Predicate = Callable[[Any, "Envelope"], bool]


def always(state: Any, env: "Envelope") -> bool:
    return True


@dataclass(frozen=True)
class ComplexMessageSpec:
    distribute: tuple[tuple[Predicate, str], ...] = ()
    compute: tuple[Predicate, ...] = (always,)
    post_distribute: tuple[tuple[Predicate, str], ...] = ()


@dataclass(frozen=True)
class Envelope:
    kind: str
    sender: ActorRef | None
    target: ActorRef
    payload: Mapping[str, Any]
    initiator: ActorRef | None = None
    reading: int | None = None
    seq: int = 0
    spec: ComplexMessageSpec | None = None


@dataclass
class ReceptionTask:
    id: int
    owner: ActorRef
    outstanding: Counter
    continuation: Callable[["Context", "ReceptionTask"], None] | None = None
    descriptors: tuple = ()
    collected: list = field(default_factory=list)
    fired: bool = False


@dataclass(frozen=True)
class Event:
    step: int
    kind: str
    actor: str
    message_kind: str
    digest: str

    def line(self) -> str:
        return f"{self.step}\t{self.kind}\t{self.actor}\t{self.message_kind}\t{self.digest}"


Handler = Callable[["Context", Envelope], None]


@dataclass
class Behavior:
    name: str
    handlers: dict[str, Handler]
    describe: Callable[[Any], str] = lambda state: ""


@dataclass
class _Actor:
    ref: ActorRef
    behavior: Behavior
    state: Any


@dataclass
class RunResult:
    quiescent: bool
    deliveries: int
    faults: list[str]
    warnings: list[str]
    trace: list[Event]

    @property
    def ok(self) -> bool:
        return self.quiescent and not self.faults


def digest(value: Any) -> str:
    """Deterministic compact rendering of a payload value."""
    if isinstance(value, FeatureStructure):
        return render_fs(value)
    if isinstance(value, ActorRef):
        return str(value)
    if isinstance(value, Mapping):
        return "{" + " ".join(f"{k}={digest(v)}" for k, v in sorted(value.items())) + "}"
    if isinstance(value, (frozenset, set)):
        return "{" + ",".join(sorted(digest(v) for v in value)) + "}"
    if isinstance(value, (tuple, list)):
        return "(" + ",".join(digest(v) for v in value) + ")"
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        inner = " ".join(f"{f.name}={digest(getattr(value, f.name))}" for f in dataclasses.fields(value))
        return f"{type(value).__name__}({inner})"
    if value is None:
        return "-"
    return str(value)


class Context:
    """Handler-side view of the runtime; every effect is buffered until commit."""

    def __init__(self, runtime: "Runtime", actor: _Actor, envelope: Envelope):
        self._rt = runtime
        self._actor = actor
        self.message = envelope
        self.self_ref = actor.ref
        self._state = actor.state
        self._ops: list[tuple] = []
        self._closed = False
        self.forwarded: tuple[ActorRef, ...] = ()

    def _check_open(self) -> None:
        if self._closed:
            raise ContractViolation("context used outside its handler")

    @property
    def state(self) -> Any:
        return self._state

    def send(
        self,
        target: ActorRef,
        kind: str,
        payload: Mapping[str, Any] | None = None,
        *,
        initiator: ActorRef | None = None,
        reading: int | None = None,
    ) -> None:
        self._check_open()
        self._ops.append(("send", kind, target, payload or {}, initiator, reading, None))

    def depart(
        self,
        spec: ComplexMessageSpec,
        target: ActorRef,
        kind: str,
        payload: Mapping[str, Any] | None = None,
        *,
        initiator: ActorRef | None = None,
        reading: int | None = None,
    ) -> None:
        self._check_open()
        self._ops.append(("send", kind, target, payload or {}, initiator, reading, spec))

    def spawn(self, behavior: str, state: Any) -> ActorRef:
        self._check_open()
        ref = self._rt._new_ref(behavior)
        self._ops.append(("spawn", ref, behavior, state))
        return ref

    def become(self, state: Any) -> None:
        self._check_open()
        self._state = state
        self._ops.append(("become", state))

    def queue_task(
        self,
        targets: Iterable[ActorRef],
        continuation: Callable[["Context", ReceptionTask], None] | None = None,
        descriptors: tuple = (),
    ) -> int:
        self._check_open()
        task = ReceptionTask(self._rt._new_task_id(), self.self_ref, Counter(targets), continuation, descriptors)
        self._rt.tasks[task.id] = task
        self._ops.append(("event", "task-queued", self.self_ref, f"task:{task.id}",
                          "outstanding=" + _counter_digest(task.outstanding)))
        return task.id

    def _owned(self, task_id: int) -> ReceptionTask:
        task = self._rt.tasks.get(task_id)
        if task is None:
            raise ContractViolation(f"unknown reception task {task_id}")
        if task.owner != self.self_ref:
            raise ContractViolation(f"task {task_id} is not owned by {self.self_ref}")
        if task.fired:
            raise ContractViolation(f"reception task {task_id} already fired")
        return task

    def expect(self, task_id: int, actor: ActorRef, n: int = 1) -> None:
        """Add ``n`` outstanding receipts from ``actor`` to an open task."""
        self._check_open()
        task = self._owned(task_id)
        task.outstanding[actor] += n
        self._ops.append(("event", "task-queued", self.self_ref, f"task:{task_id}",
                          f"expect={actor}x{n}"))

    def record_receipt(
        self,
        task_id: int,
        sender: ActorRef,
        forwarded: Iterable[ActorRef] = (),
        data: Any = None,
    ) -> None:
        self._check_open()
        task = self._owned(task_id)
        forwarded = tuple(forwarded)
        task.outstanding[sender] -= 1
        for f in forwarded:
            task.outstanding[f] += 1
        if data is not None:
            task.collected.append(data)
        self._ops.append(("event", "receipt", self.self_ref, f"task:{task_id}",
                          f"from={sender} fwd={','.join(str(f) for f in forwarded) or '-'}"))
        if not any(task.outstanding.values()):
            task.fired = True
            self._ops.append(("event", "task-fired", self.self_ref, f"task:{task_id}", ""))
            if task.continuation is not None:
                task.continuation(self, task)

    def allocate_reading(self) -> int | None:
        self._check_open()
        return self._rt.allocate_reading()

    def warn(self, text: str) -> None:
        self._ops.append(("warn", text))


def _counter_digest(c: Counter) -> str:
    return ",".join(f"{a}x{n}" for a, n in sorted(c.items()) if n) or "-"


def _default_receipt(ctx: Context, env: Envelope) -> None:
    p = env.payload
    ctx.record_receipt(p["task"], env.sender, p.get("forwarded", ()), p.get("data"))


class Runtime:
    def __init__(
        self,
        *,
        mode: str = "deterministic",
        seed: int = 0,
        step_bound: int = DEFAULT_STEP_BOUND,
        max_readings: int | None = None,
        workers: int = 4,
    ):
        if mode not in ("deterministic", "concurrent"):
            raise ValueError(f"unknown scheduler mode {mode!r}")
        if step_bound < 1:
            raise ValueError("step bound must be positive")
        self.mode = mode
        self.seed = seed
        self.step_bound = step_bound
        self.max_readings = max_readings
        self.workers = workers
        self.behaviors: dict[str, Behavior] = {}
        self.actors: dict[int, _Actor] = {}
        self.tasks: dict[int, ReceptionTask] = {}
        self.trace: list[Event] = []
        self.faults: list[str] = []
        self.warnings: list[str] = []
        self._inflight: list[Envelope] = []
        self._lock = threading.RLock()
        self._next_id = 1
        self._next_task = 1
        self._seq = 0
        self._readings = 0
        self._deliveries = 0
        self._stop = False

    # -- setup -------------------------------------------------------------

    def register(self, behavior: Behavior) -> None:
        self.behaviors[behavior.name] = behavior

    def _new_ref(self, behavior: str) -> ActorRef:
        if behavior not in self.behaviors:
            raise ContractViolation(f"unknown behavior {behavior!r}")
        with self._lock:
            ref = ActorRef(self._next_id, behavior)
            self._next_id += 1
            return ref

    def _new_task_id(self) -> int:
        with self._lock:
            tid = self._next_task
            self._next_task += 1
            return tid

    def allocate_reading(self) -> int | None:
        with self._lock:
            if self.max_readings is not None and self._readings >= self.max_readings:
                return None
            self._readings += 1
            return self._readings

    def spawn(self, behavior: str, state: Any) -> ActorRef:
        ref = self._new_ref(behavior)
        self._install(ref, behavior, state)
        return ref

    def send(self, target: ActorRef, kind: str, payload: Mapping[str, Any] | None = None,
             *, reading: int | None = None) -> None:
        self._enqueue(Envelope(kind, None, target, MappingProxyType(dict(payload or {})), None, reading))

    def state_of(self, ref: ActorRef) -> Any:
        return self.actors[ref.id].state

    # -- internals (callers hold the lock) -----------------------------------

    def _event(self, kind: str, actor: Any, message_kind: str, text: str) -> None:
        self.trace.append(Event(len(self.trace), kind, str(actor), message_kind, text))

    def _install(self, ref: ActorRef, behavior: str, state: Any) -> None:
        b = self.behaviors[behavior]
        self.actors[ref.id] = _Actor(ref, b, state)
        self._event("spawn", ref, behavior, b.describe(state))

    def _envelope_digest(self, env: Envelope) -> str:
        head = f"from={env.sender or '-'} init={env.initiator or '-'} r={env.reading if env.reading is not None else '-'}"
        return f"{head} {digest(env.payload)}"

    def _enqueue(self, env: Envelope) -> None:
        self._seq += 1
        env = dataclasses.replace(env, seq=self._seq)
        if env.target.id not in self.actors:
            self._fault(f"undeliverable {env.kind} to dead or unknown actor {env.target}")
            return
        self._event("send", env.target, env.kind, self._envelope_digest(env))
        self._inflight.append(env)

    def _fault(self, text: str) -> None:
        self.faults.append(text)
        self._event("fault", "-", "-", text)
        self._stop = True

    def _commit(self, ctx: Context, env: Envelope, forwards: list[Envelope]) -> None:
        self._deliveries += 1
        self._event("deliver", env.target, env.kind, self._envelope_digest(env))
        for fwd in forwards:
            self._enqueue(fwd)
        actor = ctx._actor
        for op in ctx._ops:
            tag = op[0]
            if tag == "spawn":
                _, ref, behavior, state = op
                self._install(ref, behavior, state)
            elif tag == "send":
                _, kind, target, payload, initiator, reading, spec = op
                self._enqueue(Envelope(kind, actor.ref, target, MappingProxyType(dict(payload)),
                                       initiator, reading, 0, spec))
            elif tag == "become":
                actor.state = op[1]
                self._event("become", actor.ref, env.kind, actor.behavior.describe(op[1]))
            elif tag == "event":
                _, kind, who, mkind, text = op
                self._event(kind, who, mkind, text)
            elif tag == "warn":
                self.warnings.append(op[1])
                self._event("warning", actor.ref, env.kind, op[1])

    def _run_handler(self, env: Envelope) -> tuple[Context, list[Envelope]]:
        actor = self.actors[env.target.id]
        ctx = Context(self, actor, env)
        forwards: list[Envelope] = []
        spec = env.spec
        if spec is not None:
            for pred, tag in spec.distribute:
                if pred(actor.state, env):
                    ref = getattr(actor.state, tag)
                    if ref is not None:
                        forwards.append(dataclasses.replace(env, sender=actor.ref, target=ref))
            ctx.forwarded = tuple(f.target for f in forwards)
            run = any(pred(actor.state, env) for pred in spec.compute)
        else:
            run = True
        if run:
            handler = actor.behavior.handlers.get(env.kind)
            if handler is None and env.kind == "receipt":
                handler = _default_receipt
            if handler is None:
                raise ContractViolation(f"{actor.behavior.name} has no handler for {env.kind!r}")
            handler(ctx, env)
        if spec is not None:
            for pred, tag in spec.post_distribute:
                if pred(ctx.state, env):
                    ref = getattr(ctx.state, tag)
                    if ref is not None:
                        forwards.append(dataclasses.replace(env, sender=actor.ref, target=ref))
        ctx._closed = True
        return ctx, forwards

    def _deliver(self, env: Envelope) -> None:
        try:
            ctx, forwards = self._run_handler(env)
        except Exception as exc:  # handler bugs and contract violations end the run
            with self._lock:
                detail = "".join(traceback.format_exception_only(type(exc), exc)).strip()
                self._fault(f"{env.kind} at {env.target}: {detail}")
            return
        with self._lock:
            self._commit(ctx, env, forwards)
            if self._deliveries >= self.step_bound and self._inflight:
                self._fault(f"liveness: step bound {self.step_bound} exceeded")

    # -- scheduling ----------------------------------------------------------

    def run(self) -> RunResult:
        if self.mode == "deterministic":
            self._run_deterministic()
        else:
            self._run_concurrent()
        quiescent = not self._inflight and not self._stop
        if quiescent:
            for task in sorted(self.tasks.values(), key=lambda t: t.id):
                if not task.fired:
                    self._fault(f"reception task {task.id} of {task.owner} never fired "
                                f"(outstanding {_counter_digest(task.outstanding)})")
            quiescent = not self.faults
        return RunResult(quiescent, self._deliveries, list(self.faults), list(self.warnings), self.trace)

    def _run_deterministic(self) -> None:
        rng = random.Random(self.seed)
        while self._inflight and not self._stop:
            i = rng.randrange(len(self._inflight))
            self._inflight[i], self._inflight[-1] = self._inflight[-1], self._inflight[i]
            self._deliver(self._inflight.pop())

    def _run_concurrent(self) -> None:
        rng = random.Random(self.seed)
        cond = threading.Condition(self._lock)
        busy: set[int] = set()
        running = 0

        def work(env: Envelope) -> None:
            nonlocal running
            try:
                self._deliver(env)
            finally:
                with cond:
                    busy.discard(env.target.id)
                    running -= 1
                    cond.notify_all()

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            while True:
                with cond:
                    while True:
                        if self._stop:
                            break
                        ready = [i for i, e in enumerate(self._inflight) if e.target.id not in busy]
                        if ready or running == 0:
                            break
                        cond.wait()
                    if self._stop or not ready:
                        if running == 0:
                            break
                        cond.wait()
                        continue
                    i = rng.choice(ready)
                    env = self._inflight.pop(i)
                    busy.add(env.target.id)
                    running += 1
                pool.submit(work, env)


def write_trace(events: Iterable[Event], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for e in events:
            fh.write(e.line() + "\n")

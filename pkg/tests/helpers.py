"""Trace checkers shared by the protocol and acceptance tests.

They read the tab-separated event trace back rather than poking at runtime
internals, so they double as a check that the trace is complete.
"""
from __future__ import annotations

import re
from collections import Counter, defaultdict

from parsetalk.protocol import ParseResult

# frozen from oracle runs over the bundled grammar
EXPECTED_READINGS = {
    "Compaq entwickelt einen Notebook mit einer 120-MByte-Harddisk": 1,
    "Compaq verkauft einen Notebook mit einer 120-MByte-Harddisk": 2,
    "Compaq entwickelt Computer": 2,
    "Compaq entwickelt einen Notebook": 1,
    "einen Notebook entwickelt Compaq": 1,
    "Compaq entwickelt einen schnellen Notebook": 1,
    "Compaq": 1,
    "mit einer 120-MByte-Harddisk": 1,
    "einen Notebook mit einer 120-MByte-Harddisk": 1,
    "einen Compaq": 0,
    "Compaq verkauft einen schnellen Notebook mit einer 120-MByte-Harddisk": 2,
    "Compaq verkauft Computer mit einer 120-MByte-Harddisk": 4,
    "entwickelt Compaq Computer": 2,
}

_REF = re.compile(r"#(\d+)")


def _refs(text: str) -> list[int]:
    return [int(m) for m in _REF.findall(text)]


def _fields(line: str) -> tuple[int, str, str, str, str]:
    step, kind, actor, mkind, digest = line.split("\t", 4)
    return int(step), kind, actor, mkind, digest


def check_receipts(lines: list[str]) -> list[str]:
    """Replay reception tasks from the trace; return every violation found.

    A task must fire exactly when its signed multiset of outstanding
    receipts first returns to all zeros, and never more than once.
    """
    problems = []
    outstanding: dict[str, Counter] = {}
    fired: Counter = Counter()
    last_zero: dict[str, bool] = {}
    for line in lines:
        step, kind, actor, mkind, digest = _fields(line)
        if kind == "fault":
            problems.append(f"step {step}: fault {digest}")
        if kind == "task-queued":
            c = outstanding.setdefault(mkind, Counter())
            if digest.startswith("outstanding="):
                for item in digest[len("outstanding="):].split(","):
                    if item != "-":
                        ref, n = item.split("x")
                        c[ref] += int(n)
            else:
                ref, n = digest[len("expect="):].split("x")
                c[ref] += int(n)
        elif kind == "receipt":
            c = outstanding.get(mkind)
            if c is None:
                problems.append(f"step {step}: receipt for unknown {mkind}")
                continue
            sender, fwd = digest.split(" ")
            c[sender[len("from="):]] -= 1
            for ref in fwd[len("fwd="):].split(","):
                if ref != "-":
                    c[ref] += 1
            last_zero[mkind] = not any(c.values())
        elif kind == "task-fired":
            fired[mkind] += 1
            if fired[mkind] > 1:
                problems.append(f"step {step}: {mkind} fired twice")
            if not last_zero.get(mkind):
                problems.append(f"step {step}: {mkind} fired with receipts outstanding")
    for task, c in outstanding.items():
        if fired[task] != 1:
            problems.append(f"{task} never fired (outstanding {dict(+c)})")
    return problems


def check_delivery(lines: list[str]) -> list[str]:
    sends = Counter()
    delivers = Counter()
    for line in lines:
        _, kind, actor, mkind, digest = _fields(line)
        if kind == "send":
            sends[actor, mkind, digest] += 1
        elif kind == "deliver":
            delivers[actor, mkind, digest] += 1
    if sends != delivers:
        return [f"sent but not delivered: {dict(sends - delivers)}", f"delivered unsent: {dict(delivers - sends)}"]
    return []


def check_fringe(result: ParseResult) -> list[str]:
    """Every searchHead copy reaches either the initiator's left neighbour or
    the head of an actor that itself received the message."""
    problems = []
    lines = [e.line() for e in result.run.trace]
    left_of_episode = {}
    received = defaultdict(set)
    heads = {a.ref.id: a.state.head for a in result.runtime.actors.values() if a.ref.kind == "word"}
    for line in lines:
        step, kind, actor, mkind, digest = _fields(line)
        if kind != "deliver":
            continue
        episode = re.search(r"\bepisode=(\d+)", digest)
        if mkind == "startUp":
            left_of_episode[episode.group(1)] = re.search(r"left=#(\d+)", digest).group(1)
        elif mkind == "searchHead":
            e = episode.group(1)
            target = actor[1:]
            sender = re.search(r"from=#(\d+)", digest).group(1)
            init = re.search(r"init=#(\d+)", digest).group(1)
            if sender == init:
                ok = target == left_of_episode.get(e)
            else:
                head = heads.get(int(sender))
                ok = sender in received[e] and head is not None and str(head.id) == target
            if not ok:
                problems.append(f"step {step}: searchHead to #{target} from #{sender} outside the fringe")
            received[e].add(target)
    return problems


def check_isolation(result: ParseResult) -> list[str]:
    """Messages between word actors of different readings belong to a copying wave."""
    problems = []
    reading = result.actor_readings()
    for e in result.run.trace:
        if e.kind != "deliver":
            continue
        target = int(e.actor[1:])
        sender = re.search(r"from=#(\d+)", e.digest)
        if sender is None or target not in reading or int(sender.group(1)) not in reading:
            continue
        if reading[target] != reading[int(sender.group(1))] and "wave=" not in e.digest:
            problems.append(f"step {e.step}: {e.message_kind} crosses readings outside a copying wave")
    return problems


def check_coherence(result: ParseResult) -> list[str]:
    """Filled occurs entries and dependency records agree for every word."""
    problems = []
    for a in result.runtime.actors.values():
        if a.ref.kind != "word":
            continue
        s = a.state
        positions = {ref.id: result.runtime.state_of(ref).position for _, ref in s.deps}
        from_deps = {name: positions[ref.id] for name, ref in s.deps}
        from_occurs = {name: p for name, p in s.occurs.items() if p and name != "self"}
        if from_deps != from_occurs or s.occurs["self"] != s.position:
            problems.append(f"{s.form}@{s.position} r={s.reading}: occurs {from_occurs} vs deps {from_deps}")
        if len(from_deps) != len(s.deps):
            problems.append(f"{s.form}@{s.position}: repeated dependency name")
        if s.feats.is_bottom:
            problems.append(f"{s.form}@{s.position}: features are bottom")
    return problems


def all_problems(result: ParseResult) -> list[str]:
    lines = [e.line() for e in result.run.trace]
    return (check_receipts(lines) + check_delivery(lines) + check_fringe(result)
            + check_isolation(result) + check_coherence(result))

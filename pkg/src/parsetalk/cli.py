"""Command-line front end: parse, validate, oracle, sweep."""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .grammar import GrammarBundle, GrammarError, fixture_paths, load_bundle
from .oracle import oracle_readings, oracle_set
from .protocol import (
    DEFAULT_MAX_READINGS,
    ProtocolConfig,
    ProtocolFault,
    ReadingRecord,
    UnknownForm,
    parse,
)
from .runtime import DEFAULT_STEP_BOUND, write_trace

EXIT_OK, EXIT_NO_READING, EXIT_LOAD, EXIT_FAULT = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    classes: Path
    concepts: Path
    lexicon: Path
    mode: str = "deterministic"
    seed: int = 0
    max_readings: int = DEFAULT_MAX_READINGS
    step_bound: int = DEFAULT_STEP_BOUND
    output_format: str = "json"
    trace_path: Path | None = None

    def __post_init__(self):
        if self.max_readings < 1:
            raise ValueError("--max-readings must be at least 1")
        if self.step_bound < 1:
            raise ValueError("--step-bound must be at least 1")


def render_json(records: Sequence[ReadingRecord], warnings: Sequence[str] = ()) -> str:
    out = []
    for r in records:
        item = r.as_json()
        item["features"] = list(r.features)
        out.append(item)
    return json.dumps({"readings": out, "warnings": list(warnings)}, ensure_ascii=False, indent=2)


def read_json(text: str) -> list[ReadingRecord]:
    doc = json.loads(text)
    return [
        ReadingRecord(
            item["readingId"],
            item["complete"],
            tuple(item["tokens"]),
            tuple((a["head"], a["dep"], a["name"]) for a in item["arcs"]),
            item["rootPos"],
            tuple(item["features"]),
        )
        for item in doc["readings"]
    ]


def render_tree(records: Sequence[ReadingRecord], warnings: Sequence[str] = ()) -> str:
    lines = []
    for r in records:
        lines.append(f"reading {r.reading_id} ({'complete' if r.complete else 'incomplete'})")
        children: dict[int, list[tuple[int, str]]] = {}
        governed = set()
        for h, d, name in r.arcs:
            children.setdefault(h, []).append((d, name))
            governed.add(d)

        def walk(pos: int, prefix: str) -> None:
            kids = sorted(children.get(pos, ()))
            for i, (d, name) in enumerate(kids):
                last = i == len(kids) - 1
                lines.append(f"{prefix}{'`-- ' if last else '|-- '}{name}: {r.tokens[d - 1]} [{d}]")
                walk(d, prefix + ("    " if last else "|   "))

        for root in range(1, len(r.tokens) + 1):
            if root not in governed:
                lines.append(f"{r.tokens[root - 1]} [{root}]")
                walk(root, "")
    if not records:
        lines.append("no readings")
    for w in warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def _seeds(text: str) -> range:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            seeds = range(int(lo), int(hi) + 1)
        else:
            seeds = range(int(text), int(text) + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed range must look like 0..199, got {text!r}") from None
    if len(seeds) == 0:
        raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
    return seeds


def build_parser() -> argparse.ArgumentParser:
    classes, concepts, lexicon = fixture_paths()
    grammar = argparse.ArgumentParser(add_help=False)
    grammar.add_argument("--classes", type=Path, default=classes)
    grammar.add_argument("--concepts", type=Path, default=concepts)
    grammar.add_argument("--lexicon", type=Path, default=lexicon)

    running = argparse.ArgumentParser(add_help=False)
    running.add_argument("--mode", choices=("deterministic", "concurrent"), default="deterministic")
    running.add_argument("--max-readings", type=int, default=DEFAULT_MAX_READINGS)
    running.add_argument("--step-bound", type=int, default=DEFAULT_STEP_BOUND)
    running.add_argument("--no-fringe-forwarding", action="store_true",
                         help="mutation: deliver searchHead to the left neighbour only")
    running.add_argument("--no-crossing-guard", action="store_true",
                         help="mutation: let non-adjacent roots attach to the new word")

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", choices=("json", "tree"), default="json")

    p = argparse.ArgumentParser(prog="parsetalk", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("parse", parents=[grammar, running, output], help="parse a sentence with the actor protocol")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trace-out", type=Path)
    sp.add_argument("tokens", nargs="+")
    sub.add_parser("validate", parents=[grammar], help="load and check a grammar")
    so = sub.add_parser("oracle", parents=[grammar, output], help="enumerate admissible trees by brute force")
    so.add_argument("tokens", nargs="+")
    sw = sub.add_parser("sweep", parents=[grammar, running], help="parse under many seeds and compare with the oracle")
    sw.add_argument("--seeds", type=_seeds, default=range(0, 200))
    sw.add_argument("tokens", nargs="+")
    return p


def _tokens(args) -> list[str]:
    return " ".join(args.tokens).split()


def _load(args) -> GrammarBundle:
    return load_bundle(args.classes, args.concepts, args.lexicon)


def _config(args) -> ProtocolConfig:
    return ProtocolConfig(fringe_forwarding=not args.no_fringe_forwarding,
                          crossing_guard=not args.no_crossing_guard)


def cmd_parse(args, out) -> int:
    cfg = RunConfig(args.classes, args.concepts, args.lexicon, args.mode, args.seed,
                    args.max_readings, args.step_bound, args.format, args.trace_out)
    bundle = _load(args)
    try:
        result = parse(bundle, _tokens(args), seed=cfg.seed, mode=cfg.mode, max_readings=cfg.max_readings,
                       step_bound=cfg.step_bound, config=_config(args))
    except ProtocolFault as exc:
        if cfg.trace_path:
            write_trace(exc.result.run.trace, cfg.trace_path)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAULT
    if cfg.trace_path:
        write_trace(result.run.trace, cfg.trace_path)
    render = render_json if cfg.output_format == "json" else render_tree
    print(render(result.readings, result.run.warnings), file=out)
    return EXIT_OK if result.complete else EXIT_NO_READING


def cmd_validate(args, out) -> int:
    _load(args)
    print("grammar ok", file=out)
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    records = oracle_readings(_load(args), _tokens(args))
    render = render_json if args.format == "json" else render_tree
    print(render(records), file=out)
    return EXIT_OK if records else EXIT_NO_READING


def cmd_sweep(args, out) -> int:
    bundle = _load(args)
    tokens = _tokens(args)
    expected = oracle_set(bundle, tokens)
    sets = {}
    for seed in args.seeds:
        try:
            result = parse(bundle, tokens, seed=seed, mode=args.mode, max_readings=args.max_readings,
                           step_bound=args.step_bound, config=_config(args))
        except ProtocolFault as exc:
            print(f"seed {seed}: error: {exc}", file=out)
            return EXIT_FAULT
        sets[seed] = result.reading_set()
    distinct = set(sets.values())
    identical = len(distinct) == 1
    match = identical and expected in distinct
    print(f"seeds: {len(sets)}  readings: {sorted(len(s) for s in distinct)}  oracle: {len(expected)}", file=out)
    print(f"identical: {str(identical).lower()}, oracle-match: {str(match).lower()}", file=out)
    for seed, s in sets.items():
        if s != expected:
            print(f"divergent seed {seed}: {len(s)} readings", file=out)
            break
    return EXIT_OK if match else EXIT_NO_READING


COMMANDS = {"parse": cmd_parse, "validate": cmd_validate, "oracle": cmd_oracle, "sweep": cmd_sweep}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except GrammarError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return EXIT_LOAD
    except (UnknownForm, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD


if __name__ == "__main__":
    sys.exit(main())

"""Compare protocol and oracle on every fixture sentence, with and without the mutation switches.

usage: python3 scripts/sweep_fixtures.py [SEEDS]   (default 200)
"""
import sys
import time

from parsetalk.grammar import fixture_sentences, load_fixture_bundle
from parsetalk.oracle import oracle_set
from parsetalk.protocol import ProtocolConfig, parse

CONFIGS = {
    "protocol": ProtocolConfig(),
    "no fringe forwarding": ProtocolConfig(fringe_forwarding=False),
    "no crossing guard": ProtocolConfig(crossing_guard=False),
}


def main(n_seeds: int) -> None:
    bundle = load_fixture_bundle()
    for label, config in CONFIGS.items():
        start = time.perf_counter()
        divergent = []
        for tokens in fixture_sentences():
            expected = oracle_set(bundle, tokens)
            bad = [s for s in range(n_seeds) if parse(bundle, tokens, seed=s, config=config).reading_set() != expected]
            if bad:
                divergent.append((" ".join(tokens), len(bad)))
        print(f"{label}: {len(divergent)} divergent sentences ({time.perf_counter() - start:.1f}s)")
        for sentence, n in divergent:
            print(f"  {sentence}: {n}/{n_seeds} seeds")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 200)

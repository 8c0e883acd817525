"""Parse the fixture sentence and show the "Notebook" actor before and after "mit" attaches."""
import sys

from parsetalk.features import render_fs
from parsetalk.grammar import load_fixture_bundle
from parsetalk.protocol import parse

TOKENS = "Compaq entwickelt einen Notebook mit einer 120-MByte-Harddisk".split()


def main(seed: int = 0) -> None:
    bundle = load_fixture_bundle()
    # the sentence cut off before "mit" leaves "Notebook" as it was before the attachment
    prefix = parse(bundle, TOKENS[:4], seed=seed)
    before = prefix.word_state(prefix.complete[0].reading_id, 4)
    result = parse(bundle, TOKENS, seed=seed)
    (reading,) = result.complete
    after = result.word_state(reading.reading_id, 4)
    for label, s in (("before", before), ("after", after)):
        print(f"{label}:")
        print(f"  class    {s.word_class}")
        print(f"  concept  {s.concept}")
        print(f"  features {render_fs(s.feats)}")
        print(f"  occurs   {dict(s.occurs)}")
    print("arcs:", ", ".join(f"{n}({h}->{d})" for h, d, n in reading.arcs))


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 0)

#!/usr/bin/env python3
"""Build data/corpus.jsonl from corpus.txt + tags.tsv + literals.txt.

Applies the same tagging rule as the engine: literal closed-class words map
to their uppercased selves, everything else through the tag lexicon. Fails
loudly on any untaggable word so fixture drift is caught at build time.
"""
import json
import sys
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"


def main() -> int:
    literals = set()
    for line in (DATA / "literals.txt").read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            literals.add(line.lower())

    tags = {}
    for line in (DATA / "tags.tsv").read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        word, tag = line.split("\t")
        tags[word.lower()] = tag

    stanzas = []
    current = []
    for line in (DATA / "corpus.txt").read_text().splitlines():
        line = line.strip()
        if not line:
            if current:
                stanzas.append(current)
                current = []
            continue
        current.append(line.lower().split())
    if current:
        stanzas.append(current)

    missing = set()
    records = []
    for idx, stanza in enumerate(stanzas, start=1):
        if len(stanza) != 5:
            print(f"stanza {idx}: {len(stanza)} lines", file=sys.stderr)
            return 1
        lines = []
        for words in stanza:
            tagged = []
            for word in words:
                if word in literals:
                    tagged.append({"word": word, "tag": word.upper()})
                elif word in tags:
                    tagged.append({"word": word, "tag": tags[word]})
                else:
                    missing.add(word)
            lines.append(tagged)
        records.append({"id": f"p{idx:02d}", "lines": lines})

    if missing:
        print("untaggable words:", " ".join(sorted(missing)), file=sys.stderr)
        return 1

    with open(DATA / "corpus.jsonl", "w") as out:
        for record in records:
            out.write(json.dumps(record, sort_keys=True) + "\n")
    print(f"wrote {len(records)} records")
    return 0


if __name__ == "__main__":
    sys.exit(main())

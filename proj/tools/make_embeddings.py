#!/usr/bin/env python3
"""Build data/embeddings.txt: one vector per corpus content word.

Vectors are topic-tinted: hand-grouped words share a dominant direction, the
rest get deterministic pseudo-random noise from sha256(word), so the file is
reproducible byte for byte.
"""
import hashlib
import struct
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"
DIM = 16

TOPICS = {
    0: "money gold trade bank debt paid earned rich prize treasure won squad fraud robbed".split(),
    1: "rain snow wind storm hail fog cold ice warm gray wet dry sun shade".split(),
    2: "sea lake stream pool canoe boat ship sailed shore tide wave swam swimmer sailor fish whale".split(),
    3: "moon night stars sky light glow dark noon day bright".split(),
    4: "dog cat pig sheep goat snake crow loon bug worm horse pigs toys pet".split(),
    5: "king queen crown knight castle guard sword pride gate royal".split(),
    6: "food bread soup meat tea cake cream feast lunch snack bun loaf roast cup mint pie cooked baked ate drank hungry".split(),
    7: "song tune sang music singer hummed guitar bell ring beat danced dance sing melody".split(),
    8: "book page letter desk clerk typed quill wrote teacher school work".split(),
    9: "train track car truck van jeep bike plane trip road mile".split(),
    10: "farm barn farmer hay pigs seed plant grew field garden".split(),
    11: "town street hill home house room door stair gate village".split(),
    12: "game play race team won skill lap pace fun played".split(),
    13: "smile laughed happy glad joy fun overjoyed enjoyed cheer".split(),
    14: "night sleep slept bed dream dreamed woke asleep".split(),
}


def noise(word: str) -> list[float]:
    digest = hashlib.sha256(word.encode()).digest()
    values = []
    for i in range(DIM):
        chunk = digest[(i * 2) % 30 : (i * 2) % 30 + 2]
        (raw,) = struct.unpack(">H", chunk)
        values.append(raw / 65535.0 - 0.5)
    return values


def main() -> None:
    literals = {
        line.strip().lower()
        for line in (DATA / "literals.txt").read_text().splitlines()
        if line.strip() and not line.startswith("#")
    }
    names = {
        line.split(",")[0].strip().lower()
        for line in (DATA / "names.txt").read_text().splitlines()
        if line.strip()
    }
    words = set()
    for line in (DATA / "corpus.txt").read_text().splitlines():
        for token in line.strip().lower().split():
            if token and token not in literals and token not in names:
                words.add(token)

    topic_of = {}
    for topic, members in TOPICS.items():
        for member in members:
            topic_of.setdefault(member, topic)

    rows = []
    for word in sorted(words):
        vec = noise(word)
        topic = topic_of.get(word)
        if topic is not None:
            vec[topic % DIM] += 2.0
        rows.append((word, vec))

    with open(DATA / "embeddings.txt", "w") as out:
        out.write(f"{len(rows)} {DIM}\n")
        for word, vec in rows:
            out.write(word + " " + " ".join(f"{v:.6f}" for v in vec) + "\n")
    print(f"wrote {len(rows)} vectors")


if __name__ == "__main__":
    main()

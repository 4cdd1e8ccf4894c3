"""Regenerate the bundled fixture corpus under src/argforge/data/fixture_corpus/.

The corpus is built so that, with the baseline clients, "nuclear energy" CON
arguments fall into aspect groups of exactly 60 (waste), 50 (cost/costs) and
40 (accident), and "school uniforms" PRO into 20 (safety) and 10 (discipline).
It also carries duplicates, non-arguments, off-topic sentences and documents
that no query retrieves.

    python scripts/make_fixture_corpus.py
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "argforge" / "data" / "fixture_corpus"

SUBJ = ["energy", "power", "plants", "reactors", "stations"]
NEG_VERB = ["opposed", "rejected", "abandoned", "stopped"]


def waste(i):
    clause = ["it leaves", "it creates", "it generates"][(i // 20) % 3]
    adj = ["toxic", "deadly", "hazardous", "poisonous"][i % 4]
    return f"Nuclear {SUBJ[i % 5]} should be {NEG_VERB[(i // 5) % 4]} because {clause} {adj} waste."


def cost(i):
    thing = ["construction", "maintenance", "insurance"][(i // 20) % 3]
    adj = ["huge", "enormous", "excessive", "rising", "massive"][(i // 3) % 5]
    noun = "costs" if i % 2 else "cost"
    return f"Nuclear {SUBJ[i % 5]} should be {NEG_VERB[(i // 5) % 4]} because of the {adj} {noun} of {thing}."


def accident(i):
    adj = ["serious", "severe", "major", "sudden"][(i // 3) % 4]
    tail = ["remain possible", "can happen anywhere"][(i // 20) % 2]
    return f"Nuclear {SUBJ[i % 5]} must be {NEG_VERB[(i // 5) % 4]} since {adj} accidents {tail}."


POS_VERB = ["welcomed", "supported", "adopted", "encouraged"]


def safety(i):
    verb = ["improve", "boost", "promote"][i % 3]
    place = ["student", "campus", "classroom", "hallway", "playground"][i // 4]
    return f"School uniforms should be {POS_VERB[i % 4]} as they {verb} {place} safety."


def discipline(i):
    place = ["in class", "during lessons", "on trips"][i // 4]
    return f"School uniforms should be {POS_VERB[i % 4]} because they help better discipline {place}."


NUCLEAR_INTRO = [
    "Nuclear power remains a contested topic.",
    "The nuclear energy debate continues in parliament.",
    "Nuclear plants are located near rivers.",
]
SCHOOL_INTRO = [
    "Every school uniform policy differs from place to place.",
    "The school dress code was discussed at the meeting.",
]
OFF_TOPIC = [
    "The weather was pleasant that week. Many people enjoy football on weekends.",
    "Dr. Smith opened a bakery downtown. It sells bread every morning.",
]


def docs():
    nuclear = [waste(i) for i in range(60)] + [cost(i) for i in range(50)] + [accident(i) for i in range(40)]
    school = [safety(i) for i in range(20)] + [discipline(i) for i in range(10)]
    # interleave so each document mixes aspects
    nuclear = [nuclear[j] for k in range(3) for j in range(k, len(nuclear), 3)]
    out = []
    for n, start in enumerate(range(0, len(nuclear), 4)):
        body = [NUCLEAR_INTRO[n % 3]] + nuclear[start:start + 4]
        if n % 9 == 4:
            # near-duplicate of an earlier sentence; dedup must drop it
            body.append("  " + nuclear[start - 4].upper().replace(" ", "  ").lower().capitalize())
        out.append(("nuc", " ".join(body)))
    for n, start in enumerate(range(0, len(school), 4)):
        body = [SCHOOL_INTRO[n % 2]] + school[start:start + 4] + ["Students walked home after the final bell."]
        out.append(("sch", " ".join(body)))
    for text in OFF_TOPIC:
        out.append(("off", text))
    return out


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    shards = {"shard_a.jsonl": [], "shard_b.jsonl": []}
    for i, (kind, text) in enumerate(docs()):
        name = "shard_a.jsonl" if i % 2 == 0 else "shard_b.jsonl"
        source = "cc" if i % 2 == 0 else "reddit"
        shards[name].append({"id": f"{kind}-{i:03d}", "text": text, "source": source})
    for name, recs in shards.items():
        with open(OUT / name, "w", encoding="utf-8") as fh:
            for rec in recs:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    print(f"wrote {sum(len(r) for r in shards.values())} documents to {OUT}")


if __name__ == "__main__":
    main()

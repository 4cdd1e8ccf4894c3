"""Boolean retrieval and sentence preparation on the bundled fixture corpus.

    python3 demos/01_queries_and_ingest.py
"""

from argforge import dedup, format_query, parse_query, retrieve, split_sentences, topic_filter
from argforge.ingest import iter_shards
from argforge.pipeline import default_config, fixture_config_path

# The shipped config carries one query per topic, and a per-source override
# where the forum data needed a wider net.
for topic in default_config()["topics"]:
    q = parse_query(topic["query"])
    print(f"{topic['name']:<24} {format_query(q)}")
    for source, raw in topic.get("queries", {}).items():
        print(f"{'':<24} [{source}] {format_query(parse_query(raw))}")

# AND binds tighter than OR, and phrases must match contiguously.
q = parse_query("nuclear power OR atomic AND energy")
print("\nparsed:", q)

shards = sorted((fixture_config_path().parent / "fixture_corpus").glob("*.jsonl"))
docs = retrieve(iter_shards(shards, "nuclear energy"), parse_query("nuclear"), limit=1000)
print(f"\nretrieved {len(docs)} documents for 'nuclear'")

sentences = [s for d in docs for s in split_sentences(d)]
unique = dedup(sentences)
kept = topic_filter(unique, "nuclear energy", ["atomic power", "fission"])
print(f"{len(sentences)} sentences, {len(unique)} after dedup, {len(kept)} mention the topic")
for s in kept[:3]:
    print("  ", s.text)

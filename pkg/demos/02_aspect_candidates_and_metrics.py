"""Aspect candidates, the coverage heuristic, BIO tags and the span metrics.

Uses the small aspect sample that ships with the package; point
``load_aspect_dataset`` at the full published file to run the same code at scale.

    python3 demos/02_aspect_candidates_and_metrics.py
"""

from importlib import resources

from argforge import (BaselineClient, bio_encode, extract_candidates, filter_candidates, load_aspect_dataset,
                      recall_at_k, token_f1_macro, top_t)
from argforge.aspects import rank, score_candidates

path = resources.files("argforge").joinpath("data", "aspect_sample.jsonl")
ds = load_aspect_dataset(str(path))
print(f"{len(ds.records)} records, {len(ds.failures)} offset failures")

rec = ds.records[0]
print("\nsentence:", rec.sentence)
print("gold:", [s.surface for s in rec.spans])

# Every 1-4 gram is a candidate; its score is the share of its tokens that
# fall inside a gold aspect. Filtering removes stopword edges and punctuation.
cands = filter_candidates(score_candidates(extract_candidates(rec.tokens), rec.spans))
for c in rank(cands)[:5]:
    print(f"  {c.score:.2f}  {c.span.surface}")
print("top-2 without overlap:", [s.surface for s in top_t(cands, 2)])

# recall@k over the whole sample, ranking candidates by heuristic score
samples = []
for r in ds.records:
    ranked = rank(filter_candidates(score_candidates(extract_candidates(r.tokens), r.spans)))
    samples.append((ranked, r.spans))
for k in (1, 5, 10):
    print(f"recall@{k:<2} {recall_at_k(samples, k):.3f}")

# Token-level macro F1 of the lexicon tagger against the gold BIO tags.
tagger = BaselineClient()
gold, pred = [], []
for r in ds.records:
    found = tagger.detect_aspect_spans([r.sentence], r.topic)[0]
    gold.append(bio_encode(len(r.tokens), r.spans))
    pred.append(bio_encode(len(r.tokens), found))
print()
print(token_f1_macro(pred, gold).table())

"""Counter-arguments, aspect presence and reference-grouped overlap scores.

The baseline client stands in for the trained models. Set ARGFORGE_ENDPOINT
and swap in ``HttpClient()`` to evaluate a real model server instead.

    python3 demos/04_generation_and_evaluation.py
"""

from argforge import (Argument, BaselineClient, CounterRequest, build_counter_codes, generate_counters,
                      meteor_lite, presence_rate, quality_report, reference_grouped_eval, rouge_l)
from argforge.clients import GenerationRequest
from argforge.evaluation import build_reference_sets
from argforge.text import lower_tokens

client = BaselineClient()

text = "Nuclear energy produces waste that stays radioactive for thousands of years and pollutes the environment."
codes = build_counter_codes(CounterRequest("nuclear energy", text, "CON"), client)
batch = generate_counters(codes, client)
print("input:", text)
for r in batch.results:
    print(f"  ({r.code.render()}) {r.text}   present={r.aspect_present}")

# The presence measure should separate a generator that uses the aspect
# from one that ignores it.
pairs = [(c.render(), seed) for c in codes for seed in range(4)]
for name, gen in (("aspect-aware", client), ("ablated", BaselineClient(use_aspect=False))):
    out = [(code, gen.generate_text(GenerationRequest(code, 64, seed))) for code, seed in pairs]
    print(f"presence rate, {name:<12} {presence_rate(out):.2f}")

# Overlap metrics on a single pair
cand, ref = lower_tokens("costs rise every year"), lower_tokens("the cost rises each year")
print(f"\nMETEOR {meteor_lite(cand, ref):.4f}  ROUGE-L F {rouge_l(cand, ref)[2]:.4f}")

# Reference-grouped evaluation only compares arguments that share an aspect stem.
refs = build_reference_sets([
    {"topic": "nuclear energy", "stance": "PRO", "text": "Modern storage keeps the waste isolated for centuries."},
    {"topic": "nuclear energy", "stance": "PRO", "text": "Reactors protect the environment by cutting emissions."},
], client)
generated = []
for r in batch.results:
    spans = client.detect_aspect_spans([r.text], r.code.topic)[0]
    generated.append(Argument(r.text, r.code.topic, r.code.stance, 1.0, tuple(spans)))
print()
print(reference_grouped_eval(generated, refs).table())
print()
print(quality_report([(r.code, r.text) for r in batch.results], client).table())

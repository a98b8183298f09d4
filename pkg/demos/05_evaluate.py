"""Scoring a tagger's output against annotated ground truth.

Run:  python demos/05_evaluate.py
"""

import random

from citeforge import (
    BuildStats,
    EvalPolicy,
    align_training,
    build_dataset,
    classify_match,
    evaluate_dataset,
    format_report,
    normalize,
    tag_reference,
    train_hmm,
)
from citeforge.styles import load_builtin_styles
from citeforge.synth import random_corpus

# Values are normalized before comparison: case, dash variants, edge
# punctuation and ampersands all wash out.
print("normalize('70–72.')          ->", repr(normalize("70–72.")))
print("normalize('  IEEE   Comm. ') ->", repr(normalize("  IEEE   Comm. ")))

# Each compared pair lands in exactly one match class.
print("\nmatch classes:")
for pred, truth in [
    ("john smith", "john smith"),
    ("john smith and jane doe", "john smith"),
    ("smith", "john smith"),
    ("jhn smith", "john smith"),
    ("someone else", "john smith"),
]:
    print(f"  {pred!r:>28} vs {truth!r}: {classify_match(pred, truth, tau=0.15).value}")

# Full pipeline: build a dataset, train on two thirds, tag the rest, score.
rng = random.Random(11)
styles = load_builtin_styles()[:5]
records = list(build_dataset(random_corpus(rng, 150), styles, stats=BuildStats()))
train, evaluation = records[:100], records[100:]

model = train_hmm(
    [align_training(c["annoRef"]) for r in train for c in r.citations], alpha=0.1
)
tagged = []
for record in evaluation:
    for cit in record.citations:
        fields, log_prob = tag_reference(model, cit["bibRef"])
        tagged.append(
            {
                "id": record.id,
                "style": cit["style"],
                "fields": [{"label": f.label, "value": f.value} for f in fields],
                "log_prob": log_prob,
            }
        )

report = evaluate_dataset(tagged, evaluation, EvalPolicy(tau=0.15))
print("\n" + format_report(report))

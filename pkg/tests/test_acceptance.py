"""Acceptance suite: one test per release criterion, at its stated
tolerance.  Run with `pytest tests/test_acceptance.py -v` for the
per-criterion pass/fail lines (add -s for the printed summaries)."""

import itertools
import math
import random
import time

import numpy as np
import pytest

from citeforge.annotation import strip_tags
from citeforge.bibtex import (
    ENTRY_TYPES,
    REQUIRED_FIELDS,
    BibEntry,
    IssueKind,
    validate_entry,
)
from citeforge.dataset import split_dataset
from citeforge.evaluate import (
    ExtractedField,
    evaluate_dataset,
    levenshtein,
    score,
)
from citeforge.fixture import FixtureScript, FixtureServer
from citeforge.harvest import HarvestConfig, harvest, resume
from citeforge.hmm import (
    HmmModel,
    align_training,
    fields_from_labels,
    train_hmm,
    viterbi,
)
from citeforge.refsection import NoReferenceSection, extract_references
from citeforge.styles import annotate, load_builtin_styles, render
from citeforge.synth import sample_article, random_corpus
from citeforge.tokens import tokenize

# scheduling slack on throttle gap measurements, seconds
EPSILON_S = 0.25


def test_round_trip_annotation_1000_entries_10_styles():
    styles = load_builtin_styles()
    assert len(styles) == 10
    entries = random_corpus(random.Random(2018), 1000)
    started = time.perf_counter()
    checked = 0
    for entry in entries:
        for style in styles:
            ref = annotate(entry, style)
            assert strip_tags(ref.anno_ref) == ref.bib_ref, (entry.key, style.style_id)
            checked += 1
    elapsed = time.perf_counter() - started
    assert checked == 10_000
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    print(f"PASS round-trip annotation: {checked} cases in {elapsed:.1f}s")


def test_sample_style_fidelity():
    style2 = next(
        s for s in load_builtin_styles() if s.style_id == "author-year-compact"
    )
    out = render(sample_article(), style2)
    assert out == (
        "Argon C, McLaughlin SW. 2002. A parallel decoder for low latency "
        "decoding of turbo product codes. IEEE Communications Letters. "
        "6(2):70–72"
    )
    print("PASS sample-style fidelity: " + out)


def _random_model(rng, n_states, vocab_size):
    def rows(r, c):
        raw = np.array(
            [[rng.random() + 1e-3 for _ in range(c)] for _ in range(r)]
        )
        return raw / raw.sum(axis=1, keepdims=True)

    return HmmModel(
        states=[f"s{i}" for i in range(n_states)],
        vocab=[f"w{i}" for i in range(vocab_size)],
        initial=rows(1, n_states)[0],
        transition=rows(n_states, n_states),
        emission=rows(n_states, vocab_size),
        smoothing_alpha=0.0,
    )


def _enumerate_optima(model, obs, slack=1e-9):
    scored = []
    n = len(model.states)
    for seq in itertools.product(range(n), repeat=len(obs)):
        s = math.log(model.initial[seq[0]]) + math.log(model.emission[seq[0], obs[0]])
        for prev, cur, sym in zip(seq, seq[1:], obs[1:]):
            s += math.log(model.transition[prev, cur])
            s += math.log(model.emission[cur, sym])
        scored.append((s, list(seq)))
    best = max(s for s, _ in scored)
    return best, [seq for s, seq in scored if s >= best - slack]


def test_viterbi_matches_enumeration_and_scales_quadratically():
    rng = random.Random(42)
    for _ in range(200):
        n, t = rng.randint(1, 5), rng.randint(1, 6)
        model = _random_model(rng, n, rng.randint(2, 6))
        obs = [rng.randrange(len(model.vocab)) for _ in range(t)]
        tokens = tokenize(" ".join(model.vocab[i] for i in obs))
        seq, log_prob = viterbi(model, tokens)
        best, optima = _enumerate_optima(model, obs)
        decoded = [model.states.index(l) for l in seq.labels]
        assert decoded in optima
        assert log_prob == pytest.approx(best, abs=1e-9)

    # doubling N at fixed T: time may grow at most ~4.5x
    t_len = 120
    timings = {}
    for n in (100, 200):
        model = _random_model(rng, n, 30)
        tokens = tokenize(
            " ".join(model.vocab[rng.randrange(30)] for _ in range(t_len))
        )
        runs = []
        for _ in range(9):
            started = time.perf_counter()
            viterbi(model, tokens)
            runs.append(time.perf_counter() - started)
        timings[n] = min(runs)
    ratio = timings[200] / timings[100]
    assert ratio <= 4.5, f"doubling N scaled time by {ratio:.2f}x"
    print(f"PASS viterbi oracle: 200 trials exact, N-doubling ratio {ratio:.2f}x")


def test_metric_oracles():
    # frozen hand count: 3 predictions, 2 correct, 4 truths
    truth = [ExtractedField("title", f"t{i}") for i in range(4)]
    preds = [
        ExtractedField("title", "t0"),
        ExtractedField("title", "t1"),
        ExtractedField("title", "zzz"),
    ]
    p, r, f1 = score(preds, truth).micro
    assert p == pytest.approx(2 / 3, abs=1e-12)
    assert r == pytest.approx(1 / 2, abs=1e-12)
    assert f1 == pytest.approx(4 / 7, abs=1e-12)

    assert levenshtein("kitten", "sitting") == 3

    # metric axioms on 1000 random triples
    rng = random.Random(360)
    for _ in range(1000):
        x, y, z = (
            "".join(rng.choice("abcd") for _ in range(rng.randint(0, 7)))
            for _ in range(3)
        )
        assert levenshtein(x, y) >= 0
        assert levenshtein(x, y) == levenshtein(y, x)
        assert (levenshtein(x, y) == 0) == (x == y)
        assert levenshtein(x, z) <= levenshtein(x, y) + levenshtein(y, z)

    # 50 randomized scoring cases against an independent brute-force scorer
    from test_evaluate import brute_force_score

    labels = ["title", "author", "issued", "page"]
    values = ["alpha beta", "gamma", "delta", "epsilon zeta", "eta"]
    for _ in range(50):
        truths = [
            ExtractedField(rng.choice(labels), rng.choice(values))
            for _ in range(rng.randint(0, 7))
        ]
        predictions = [
            ExtractedField(rng.choice(labels), rng.choice(values))
            for _ in range(rng.randint(0, 7))
        ]
        mine = score(predictions, truths).micro
        assert mine == pytest.approx(brute_force_score(predictions, truths))
    print("PASS metric oracles: hand counts, edit distance, 50 randomized cases")


def test_split_exactness():
    ids = [f"rec{i}" for i in range(100)]
    first = split_dataset(ids, seed=42)
    second = split_dataset(ids, seed=42)
    assert first == second
    assert len(first.train_ids) == 66
    assert len(first.eval_ids) == 34
    assert set(first.train_ids) | set(first.eval_ids) == set(ids)
    assert not set(first.train_ids) & set(first.eval_ids)
    print("PASS split exactness: 66/34, disjoint, seed-deterministic")


def test_end_to_end_learning_check():
    started = time.perf_counter()
    styles = load_builtin_styles()[:5]
    train_entries = random_corpus(random.Random(101), 400)
    eval_entries = random_corpus(random.Random(202), 100)

    train_refs = [
        annotate(e, s).anno_ref for e in train_entries for s in styles
    ]
    assert len(train_refs) == 2000
    corpus = [align_training(anno) for anno in train_refs]
    model = train_hmm(corpus, alpha=0.1)

    # majority-label baseline over the training tokens
    counts = {}
    for seq in corpus:
        for label in seq.labels:
            counts[label] = counts.get(label, 0) + 1
    majority = max(sorted(counts), key=counts.get)

    held_out = [
        (e, s, annotate(e, s)) for e in eval_entries for s in styles
    ]
    assert len(held_out) == 500

    correct = total = 0
    hmm_rows, baseline_rows = [], []
    for i, (entry, style, ref) in enumerate(held_out):
        truth_seq = align_training(ref.anno_ref)
        decoded, _ = viterbi(model, truth_seq.tokens)
        correct += sum(a == b for a, b in zip(decoded.labels, truth_seq.labels))
        total += len(truth_seq.labels)
        hmm_fields = fields_from_labels(decoded.tokens, decoded.labels)
        base_fields = fields_from_labels(
            truth_seq.tokens, [majority] * len(truth_seq.tokens)
        )
        key = {"id": f"ref{i}", "style": style.style_id}
        hmm_rows.append(
            dict(key, fields=[{"label": f.label, "value": f.value} for f in hmm_fields])
        )
        baseline_rows.append(
            dict(key, fields=[{"label": f.label, "value": f.value} for f in base_fields])
        )

    token_accuracy = correct / total
    assert token_accuracy >= 0.80, f"token accuracy {token_accuracy:.3f}"

    class _Rec:
        def __init__(self, rid, style_id, anno):
            self.id = rid
            self.citations = [{"style": style_id, "annoRef": anno}]

    records = [
        _Rec(f"ref{i}", style.style_id, ref.anno_ref)
        for i, (entry, style, ref) in enumerate(held_out)
    ]
    hmm_f1 = evaluate_dataset(hmm_rows, records).micro[2]
    baseline_f1 = evaluate_dataset(baseline_rows, records).micro[2]
    elapsed = time.perf_counter() - started
    assert hmm_f1 - baseline_f1 >= 0.30, (hmm_f1, baseline_f1)
    assert elapsed < 60.0, f"pipeline took {elapsed:.1f}s"
    print(
        f"PASS end-to-end learning: token accuracy {token_accuracy:.3f}, "
        f"micro F1 {hmm_f1:.3f} vs baseline {baseline_f1:.3f}, {elapsed:.1f}s"
    )


def test_required_field_validation_suite():
    checked = 0
    for entry_type in sorted(ENTRY_TYPES):
        requirements = REQUIRED_FIELDS[entry_type]
        # every requirement satisfied, by each member of each disjunction
        for choice in itertools.product(*requirements) if requirements else [()]:
            entry = BibEntry(entry_type, "k", {name: "v" for name in choice})
            assert validate_entry(entry) == [], (entry_type, choice)
            checked += 1
        # drop each requirement in turn: exactly that issue must appear
        base = {alts[0]: "v" for alts in requirements}
        for alts in requirements:
            fields = {k: v for k, v in base.items() if k != alts[0]}
            issues = validate_entry(BibEntry(entry_type, "k", fields))
            assert [i.kind for i in issues] == [IssueKind.MISSING_REQUIRED_FIELD]
            assert issues[0].detail == " or ".join(alts)
            checked += 1
    print(f"PASS required-field validation: 14 types, {checked} cases")


def test_harvester_hermetic(tmp_path):
    script = FixtureScript(entries={10: 4})  # one multi-entry body
    with FixtureServer(script) as server:
        phase1 = HarvestConfig(
            url_template=server.url_template(),
            id_start=1,
            id_end=25,  # crash-inject: the process dies after id 25
            td_millis=100,
            rid_millis=50,
            output_path=tmp_path / "h.bib",
            checkpoint_path=tmp_path / "h.checkpoint.json",
            user_agents=("ua-a", "ua-b", "ua-c"),
        )
        stats1 = harvest(phase1, random.Random(77))
        crash_mark = len(server.request_log)

        phase2 = HarvestConfig(
            url_template=server.url_template(),
            id_start=1,
            id_end=50,
            td_millis=100,
            rid_millis=50,
            output_path=tmp_path / "h.bib",
            checkpoint_path=tmp_path / "h.checkpoint.json",
            user_agents=("ua-a", "ua-b", "ua-c"),
        )
        stats2 = resume(phase2, random.Random(78))
        log = server.request_log

    # throttle bounds, measured at the server, within each request stream
    for stream in (log[:crash_mark], log[crash_mark:]):
        gaps = [b["monotonic"] - a["monotonic"] for a, b in zip(stream, stream[1:])]
        assert all(gap >= 0.100 for gap in gaps), min(gaps)
        assert all(gap <= 0.150 + EPSILON_S for gap in gaps), max(gaps)

    # resume fetched exactly 26..50, and the union covers 1..50 once each
    resumed_ids = [event["id"] for event in log[crash_mark:]]
    assert sorted(resumed_ids) == list(range(26, 51))
    all_ids = [event["id"] for event in log]
    assert sorted(all_ids) == list(range(1, 51))
    assert len(set(all_ids)) == 50

    # scripted multi-entry body shows up as entries-per-request > 1
    assert stats1.entries == 25 + 3
    assert stats1.efficiency > 1.0
    assert stats1.fetched_ids == 25 and stats2.fetched_ids == 25
    print(
        f"PASS harvester hermetic: gaps within bounds, resume exact, "
        f"efficiency {stats1.efficiency:.2f} entries/request"
    )


def test_reference_section_extraction_50_documents():
    filler = "Padding sentence for the body of the document. "
    rng = random.Random(4411)
    accepted = rejected = 0
    for i in range(50):
        n_refs = rng.randint(1, 10)
        refs = "\n".join(f"[{k}] Reference number {k}." for k in range(1, n_refs + 1))
        if i % 2 == 0:
            document = filler * 60 + "\nReferences\n" + refs
            block = extract_references(document)
            assert block.section_start / len(document) >= 0.4
            assert len(block.reference_strings) == n_refs
            accepted += 1
        else:
            document = "References\n" + refs + "\n" + filler * 60
            with pytest.raises(NoReferenceSection):
                extract_references(document)
            rejected += 1
    assert accepted == 25 and rejected == 25
    print("PASS reference-section extraction: 25 accepted exactly, 25 rejected")

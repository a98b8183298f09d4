"""Label-sequence HMM: training from annotated references and Viterbi
decoding of new ones.

States are field labels; observations are token classes (lowercased
surfaces seen at least twice in training, everything rarer backing off to
its orthographic class).  Decoding is log-space Viterbi, O(T*N^2), with
ties broken toward the lower state index so output is reproducible.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .annotation import parse_annotation
from .labels import field_for_label
from .tokens import (
    CASE_CLASSES,
    LAST_CHAR_CLASSES,
    PUNCT_CLASSES,
    Token,
    tokenize,
)

MIN_SURFACE_FREQ = 2


class EmptyCorpus(ValueError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass
class LabelSequence:
    tokens: list[Token]
    labels: list[str]

    def __post_init__(self):
        if len(self.tokens) != len(self.labels):
            raise ValueError("tokens and labels differ in length")


@dataclass
class HmmModel:
    states: list[str]
    vocab: list[str]
    initial: np.ndarray  # (N,)
    transition: np.ndarray  # (N, N)
    emission: np.ndarray  # (N, V)
    smoothing_alpha: float

    def __post_init__(self):
        self._sym_index = {sym: i for i, sym in enumerate(self.vocab)}

    def symbol_index(self, token: Token) -> int:
        """Column of a token's emission symbol; rare and unseen surfaces
        land on their orthographic backoff class."""
        idx = self._sym_index.get(token.features.lower)
        if idx is None:
            idx = self._sym_index[token.features.backoff_class()]
        return idx

    def save(self, path: str | Path) -> None:
        data = {
            "states": self.states,
            "vocab": self.vocab,
            "alpha": self.smoothing_alpha,
            "initial": self.initial.tolist(),
            "transition": self.transition.tolist(),
            "emission": self.emission.tolist(),
        }
        Path(path).write_text(json.dumps(data), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "HmmModel":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            states=data["states"],
            vocab=data["vocab"],
            initial=np.array(data["initial"]),
            transition=np.array(data["transition"]),
            emission=np.array(data["emission"]),
            smoothing_alpha=data["alpha"],
        )


def align_training(anno_ref: str) -> LabelSequence:
    """Token/label pairs out of one annotated reference.

    The plain text is tokenized as the tagger will see it; each token takes
    the label whose span covers the majority of its characters (name parts
    count as author), and tokens outside every span get `other`.
    """
    plain, spans = parse_annotation(anno_ref)
    tokens = tokenize(plain)
    labels = []
    for tok in tokens:
        best, best_cover = "other", 0
        for span in spans:
            cover = min(tok.end, span.end) - max(tok.start, span.start)
            if cover > best_cover:
                best, best_cover = span.label, cover
        labels.append(best)
    return LabelSequence(tokens, labels)


def _all_backoff_classes() -> list[str]:
    return [
        f"C={c}|P={p}|L={l}"
        for c in CASE_CLASSES
        for p in PUNCT_CLASSES
        for l in LAST_CHAR_CLASSES
    ]


def _normalize_rows(counts: np.ndarray) -> np.ndarray:
    """Rows scaled to sum to 1; rows with no mass at all fall back to
    uniform (only reachable with alpha=0)."""
    counts = counts.astype(float)
    totals = counts.sum(axis=-1, keepdims=True)
    uniform = np.full_like(counts, 1.0 / counts.shape[-1])
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), uniform)
    return out


def train_hmm(corpus: list[LabelSequence], alpha: float = 0.1) -> HmmModel:
    """Count-based HMM estimation with Laplace smoothing `alpha`.

    The emission vocabulary is every lowercased surface with corpus
    frequency >= 2 plus the full set of backoff classes, so any token maps
    to some column at decode time.
    """
    if not corpus:
        raise EmptyCorpus("training corpus is empty")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")

    states = sorted({label for seq in corpus for label in seq.labels})
    surface_freq = Counter(
        tok.features.lower for seq in corpus for tok in seq.tokens
    )
    kept = sorted(s for s, n in surface_freq.items() if n >= MIN_SURFACE_FREQ)
    vocab = kept + _all_backoff_classes()
    sym_index = {sym: i for i, sym in enumerate(vocab)}
    state_index = {s: i for i, s in enumerate(states)}

    n, v = len(states), len(vocab)
    initial = np.zeros(n)
    transition = np.zeros((n, n))
    emission = np.zeros((n, v))
    for seq in corpus:
        if not seq.labels:
            continue
        initial[state_index[seq.labels[0]]] += 1
        for prev, cur in zip(seq.labels, seq.labels[1:]):
            transition[state_index[prev], state_index[cur]] += 1
        for tok, label in zip(seq.tokens, seq.labels):
            lower = tok.features.lower
            sym = lower if surface_freq[lower] >= MIN_SURFACE_FREQ else tok.features.backoff_class()
            emission[state_index[label], sym_index[sym]] += 1

    return HmmModel(
        states=states,
        vocab=vocab,
        initial=_normalize_rows(initial + alpha),
        transition=_normalize_rows(transition + alpha),
        emission=_normalize_rows(emission + alpha),
        smoothing_alpha=alpha,
    )


def viterbi(model: HmmModel, tokens: list[Token]) -> tuple[LabelSequence, float]:
    """Most probable state sequence and its log-probability.

    Log-space dynamic program over T observations and N states; at every
    argmax, equal scores resolve to the lower state index.
    """
    if not tokens:
        raise EmptyInput("no tokens to decode")
    with np.errstate(divide="ignore"):
        log_init = np.log(model.initial)
        log_trans = np.log(model.transition)
        log_emis = np.log(model.emission)

    obs = [model.symbol_index(tok) for tok in tokens]
    t_len, n = len(obs), len(model.states)
    delta = log_init + log_emis[:, obs[0]]
    back = np.zeros((t_len, n), dtype=int)
    for t in range(1, t_len):
        scores = delta[:, None] + log_trans  # (from, to)
        best_from = np.argmax(scores, axis=0)  # first max = lowest index
        delta = scores[best_from, np.arange(n)] + log_emis[:, obs[t]]
        back[t] = best_from

    last = int(np.argmax(delta))
    log_prob = float(delta[last])
    path = [last]
    for t in range(t_len - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    path.reverse()
    labels = [model.states[i] for i in path]
    return LabelSequence(list(tokens), labels), log_prob


@dataclass(frozen=True)
class TaggedField:
    label: str  # BibTeX field name (canonical labels resolved through the map)
    value: str


def fields_from_labels(tokens: list[Token], labels: list[str]) -> list[TaggedField]:
    """Concatenate maximal runs of one label into (field, value) pairs.

    `other` runs are dropped; surfaces join with single spaces; labels map
    to their BibTeX field names.
    """
    fields: list[TaggedField] = []
    run_label: str | None = None
    run_surfaces: list[str] = []
    for tok, label in zip(tokens, labels):
        if label != run_label:
            if run_label is not None and run_label != "other":
                fields.append(TaggedField(field_for_label(run_label), " ".join(run_surfaces)))
            run_label, run_surfaces = label, []
        run_surfaces.append(tok.surface)
    if run_label is not None and run_label != "other":
        fields.append(TaggedField(field_for_label(run_label), " ".join(run_surfaces)))
    return fields


def tag_reference(model: HmmModel, reference: str) -> tuple[list[TaggedField], float]:
    """Decode one reference string into extracted fields plus the decode
    log-probability."""
    tokens = tokenize(reference)
    seq, log_prob = viterbi(model, tokens)
    return fields_from_labels(seq.tokens, seq.labels), log_prob

"""Tokenization and per-token orthographic features for reference strings.

Tokens are whitespace-separated runs with punctuation left attached; the
feature vector captures the token's identity forms, its 1-4 character
prefixes and suffixes, and coarse case/punctuation classes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

CASE_CLASSES = ("Initialcaps", "MixedCaps", "ALLCAPS", "others")
PUNCT_CLASSES = (
    "leadingQuotes",
    "endingQuotes",
    "multipleHyphens",
    "continuingPunctuation",
    "stopPunctuation",
    "pairedBraces",
    "possibleVolume",
    "others",
)
LAST_CHAR_CLASSES = ("upper", "lower", "numeric", "other")

_QUOTES = "\"'`‘’“”"
_HYPHENS = "-‐‑‒–—"
_VOLUME_RE = re.compile(r"\d+\(\d+\)[.,;:]?$")
_PAIRS = (("(", ")"), ("[", "]"), ("{", "}"))


@dataclass(frozen=True)
class FeatureVector:
    identity: str
    lower: str
    lower_nopunct: str
    prefixes: tuple[str, str, str, str]
    suffixes: tuple[str, str, str, str]
    last_char_class: str
    case_class: str
    punct_class: str

    def backoff_class(self) -> str:
        """Coarse emission symbol for surfaces too rare to stand alone.

        The C=/P=/L= markers keep these distinct from any lowercased
        surface form.
        """
        return f"C={self.case_class}|P={self.punct_class}|L={self.last_char_class}"


@dataclass(frozen=True)
class Token:
    surface: str
    start: int
    end: int
    features: FeatureVector


def _case_class(surface: str) -> str:
    letters = [c for c in surface if c.isalpha()]
    if not letters:
        return "others"
    if all(c.isupper() for c in letters):
        return "ALLCAPS"
    if all(c.islower() for c in letters):
        return "others"
    if letters[0].isupper() and all(c.islower() for c in letters[1:]):
        return "Initialcaps"
    return "MixedCaps"


def _punct_class(surface: str) -> str:
    if surface[0] in _QUOTES:
        return "leadingQuotes"
    if surface[-1] in _QUOTES or (
        len(surface) > 1 and surface[-1] in ".,;:" and surface[-2] in _QUOTES
    ):
        return "endingQuotes"
    if sum(surface.count(h) for h in _HYPHENS) >= 2:
        return "multipleHyphens"
    if _VOLUME_RE.fullmatch(surface):
        return "possibleVolume"
    if any(a in surface and b in surface for a, b in _PAIRS):
        return "pairedBraces"
    if surface[-1] in ",;":
        return "continuingPunctuation"
    if surface[-1] in ".!?":
        return "stopPunctuation"
    return "others"


def _last_char_class(surface: str) -> str:
    c = surface[-1]
    if c.isupper():
        return "upper"
    if c.islower():
        return "lower"
    if c.isdigit():
        return "numeric"
    return "other"


def extract_features(surface: str) -> FeatureVector:
    """Feature vector for a non-empty token surface.  Pure: equal surfaces
    always give equal vectors."""
    lower = surface.lower()
    return FeatureVector(
        identity=surface,
        lower=lower,
        lower_nopunct="".join(c for c in lower if c.isalnum()),
        prefixes=tuple(surface[:n] for n in range(1, 5)),
        suffixes=tuple(surface[-n:] for n in range(1, 5)),
        last_char_class=_last_char_class(surface),
        case_class=_case_class(surface),
        punct_class=_punct_class(surface),
    )


_WORD = re.compile(r"\S+")


def tokenize(reference: str) -> list[Token]:
    """Split a reference on whitespace into offset-exact tokens.

    Punctuation stays attached; the feature extractor deals with it.
    """
    return [
        Token(m.group(0), m.start(), m.end(), extract_features(m.group(0)))
        for m in _WORD.finditer(reference)
    ]

"""Lexicon-and-rules compound sentiment scorer.

A simplified valence scorer: per-token valences, booster words that push the
following token's magnitude up or down, negation within a three-token
window, and the usual ``S / sqrt(S**2 + 15)`` normalization to (-1, 1).
Capitalization, punctuation emphasis and idioms are deliberately ignored.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

NORMALIZATION_ALPHA = 15.0
NEGATION_SCALAR = -0.74
NEGATION_WINDOW = 3

# letters/digits with optional inner apostrophes: "isn't" is one token
_TOKEN = re.compile(r"[^\W_]+(?:'[^\W_]+)*")


class MalformedLexiconLine(ValueError):
    def __init__(self, line, reason=""):
        self.line = line
        super().__init__(f"lexicon line {line}: {reason}" if reason else f"lexicon line {line}")


@dataclass(frozen=True)
class Lexicon:
    valence: dict[str, float] = field(default_factory=dict)
    boosters: dict[str, float] = field(default_factory=dict)
    negations: frozenset[str] = frozenset()


def parse_lexicon(lines):
    """Parse TSV lexicon lines.

    Lines are ``token<TAB>value``. A line ``#boosters`` switches to booster
    increments and ``#negations`` to bare negation tokens, one per line. Any
    other line starting with ``#`` is a comment.
    """
    valence, boosters, negations = {}, {}, set()
    section = "valence"
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.startswith("#"):
            name = line[1:].strip().lower()
            if name in ("boosters", "negations", "valence"):
                section = name
            continue
        if section == "negations":
            tok = line.strip().lower()
            if "\t" in tok or " " in tok:
                raise MalformedLexiconLine(lineno, "negation entries take a single token")
            if tok in negations:
                raise MalformedLexiconLine(lineno, f"duplicate token {tok!r}")
            negations.add(tok)
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip():
            raise MalformedLexiconLine(lineno, "expected token<TAB>value")
        tok = parts[0].strip().lower()
        try:
            val = float(parts[1])
        except ValueError:
            raise MalformedLexiconLine(lineno, f"bad number {parts[1]!r}") from None
        if not math.isfinite(val):
            raise MalformedLexiconLine(lineno, "value must be finite")
        table = valence if section == "valence" else boosters
        if tok in table:
            raise MalformedLexiconLine(lineno, f"duplicate token {tok!r}")
        table[tok] = val
    return Lexicon(valence, boosters, frozenset(negations))


@lru_cache(maxsize=1)
def default_lexicon():
    """The bundled ~200-word lexicon."""
    text = resources.files("hpnf").joinpath("data/default_lexicon.tsv").read_text(encoding="utf-8")
    return parse_lexicon(text.splitlines())


def load_lexicon(path=None):
    if path is None:
        return default_lexicon()
    with open(Path(path), encoding="utf-8") as fh:
        return parse_lexicon(fh)


def tokenize(text):
    return _TOKEN.findall(text.lower())


def _sign(x):
    return (x > 0) - (x < 0)


def valence_sum(text, lexicon):
    tokens = tokenize(text)
    total = 0.0
    for i, tok in enumerate(tokens):
        v = lexicon.valence.get(tok)
        if v is None:
            continue
        if i > 0 and tokens[i - 1] in lexicon.boosters:
            v += _sign(v) * lexicon.boosters[tokens[i - 1]]
        if any(t in lexicon.negations for t in tokens[max(0, i - NEGATION_WINDOW):i]):
            v *= NEGATION_SCALAR
        total += v
    return total


def normalize(score, alpha=NORMALIZATION_ALPHA):
    value = score / math.sqrt(score * score + alpha)
    return min(1.0, max(-1.0, value))


def score_compound(text, lexicon=None):
    """Compound score in [-1, 1]; text with no lexicon tokens scores exactly 0."""
    if lexicon is None:
        lexicon = default_lexicon()
    return normalize(valence_sum(text, lexicon))


class SentimentScorer:
    """Callable wrapper so feature extraction can take any ``text -> float``."""

    def __init__(self, lexicon=None):
        self.lexicon = default_lexicon() if lexicon is None else lexicon

    def __call__(self, text):
        return score_compound(text, self.lexicon)

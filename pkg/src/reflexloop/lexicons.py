"""Marker lexicons and punctuation weight tables.

Word lists ship as editable JSON under ``reflexloop/data`` and load into
flat lookup structures used by the metric, axis and generator code.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources


@dataclass(frozen=True)
class MarkerLexicon:
    """One marker family: word -> weight mapping plus the raw groups."""

    name: str
    weights: dict  # word -> weight
    groups: dict   # group name -> {"weight": w, "words": [...]}

    def count_weighted(self, tokens) -> float:
        """Weighted count of marker hits in a token surface list."""
        return sum(self.weights.get(t, 0.0) for t in tokens)

    def count(self, tokens) -> int:
        return sum(1 for t in tokens if t in self.weights)

    def __contains__(self, word: str) -> bool:
        return word in self.weights


@lru_cache(maxsize=1)
def load_markers() -> dict:
    """Load all marker families as {family: MarkerLexicon}."""
    raw = json.loads(
        resources.files("reflexloop.data").joinpath("markers.json").read_text("utf-8")
    )
    out = {}
    for family, groups in raw.items():
        weights = {}
        for g in groups.values():
            for wd in g["words"]:
                weights[wd] = g["weight"]
        out[family] = MarkerLexicon(name=family, weights=weights, groups=groups)
    return out


@lru_cache(maxsize=1)
def neutral_filler() -> tuple:
    raw = json.loads(
        resources.files("reflexloop.data")
        .joinpath("neutral_filler.json")
        .read_text("utf-8")
    )
    return tuple(raw["words"])


# ---------------------------------------------------------------------------
# Punctuation weight tables
# ---------------------------------------------------------------------------

# Canonical punctuation classes; both ASCII and CJK forms map onto them.
PUNCT_CLASSES = {
    ".": "period", "。": "period",
    ",": "comma", "、": "comma",
    "...": "ellipsis", "…": "ellipsis", "‥": "ellipsis",
    "—": "em-dash", "――": "em-dash", "--": "em-dash", "ー-": "em-dash",
    "?": "question", "？": "question",
    "!": "exclamation", "！": "exclamation",
    ":": "colon-semicolon", ";": "colon-semicolon",
    "：": "colon-semicolon", "；": "colon-semicolon",
    '"': "quote", "'": "quote", "「": "quote", "」": "quote",
    "『": "quote", "』": "quote",
}

PUNCT_PRESETS = {
    # Default preset: stylistic-intensity weights.
    "D22": {
        "period": 1.0, "comma": 0.8, "ellipsis": 2.5, "em-dash": 2.0,
        "question": 1.8, "exclamation": 1.5, "colon-semicolon": 1.3,
    },
    # Light structural weights.
    "D2": {
        "period": 0.1, "comma": 0.05, "exclamation": 1.0, "question": 0.8,
        "ellipsis": 0.9, "em-dash": 0.7, "quote": 0.3,
    },
    # Expressive-emphasis weights.
    "S42": {
        "period": 1.0, "comma": 1.2, "ellipsis": 2.5,
        "exclamation": 3.0, "question": 1.8,
    },
}


def punct_weights(preset: str = "D22") -> dict:
    """Return a copy of a named punctuation weight table."""
    try:
        return dict(PUNCT_PRESETS[preset])
    except KeyError:
        raise KeyError(
            f"unknown punctuation preset {preset!r}; "
            f"choose from {sorted(PUNCT_PRESETS)}"
        ) from None


def punct_class(surface: str) -> str | None:
    """Canonical punctuation class of a token surface, or None."""
    if surface in PUNCT_CLASSES:
        return PUNCT_CLASSES[surface]
    if surface and all(ch in ".…‥" for ch in surface) and len(surface) > 1:
        return "ellipsis"
    if surface and all(ch in "—-ー―" for ch in surface) and len(surface) > 1:
        return "em-dash"
    return None
